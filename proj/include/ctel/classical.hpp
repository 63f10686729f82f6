#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "ctel/channel.hpp"
#include "ctel/epistemic.hpp"

namespace ctel {

enum class ClassicalOutcome : std::uint8_t { Same = 0, Different = 1 };

const char* outcome_name(ClassicalOutcome o);

enum class ClassicalCorrection : std::uint8_t { Identity = 0, Rotate = 1 };

const char* classical_correction_name(ClassicalCorrection c);

// Full per-trial record. Fields prefixed truth_ are ground truth the parties
// never see; they exist so "no information" claims can be tested without
// breaching them in-protocol.
struct TrialRecord {
    std::uint64_t trial_index = 0;
    double x_charlie = 0.0;
    Face truth_charlie_face = Face::Heads;  // face at selection time
    ClassicalOutcome alice_outcome = ClassicalOutcome::Same;
    std::uint32_t bits_sent = 0;
    ClassicalCorrection bob_correction = ClassicalCorrection::Identity;
    Face truth_bob_final_face = Face::Heads;
    std::array<Face, 2> truth_alice_faces{};  // opened (pair component, charlie's box)
    EventOrder event_order = canonical_event_order();

    // Bob's face before step 5, recovered by undoing the correction.
    Face truth_bob_precorrection_face() const {
        return bob_correction == ClassicalCorrection::Rotate ? flip(truth_bob_final_face)
                                                             : truth_bob_final_face;
    }

    bool operator==(const TrialRecord&) const = default;
};

// Raised when a trial breaks the deterministic invariant (Bob's final face
// must equal Charlie's face at selection). Carries the offending record.
class InvariantViolation : public std::runtime_error {
public:
    InvariantViolation(std::string what, TrialRecord record)
        : std::runtime_error(std::move(what)), record(std::move(record)) {}

    TrialRecord record;
};

// The machine (or external protagonist) that performs the joint measurement:
// rotates both boxes through the same random parity, opens them, and reports
// only same/different. Opened faces are surfaced solely for the ground-truth
// trial record.
class MeasurementDevice {
public:
    explicit MeasurementDevice(SubstreamRng rng) : rng_(std::move(rng)) {}

    struct Result {
        ClassicalOutcome outcome;      // the one thing a party learns
        std::array<Face, 2> opened;    // ground truth, same order as the arguments
    };

    Result measure_same_different(SealedBox first, SealedBox second);

private:
    SubstreamRng rng_;
};

// Step 1: prepare |1/2>_HH + |1/2>_TT and hand one box to each of Alice and
// Bob. Transfer does not mutate; no further rotations happen in transit.
std::pair<SealedBox, SealedBox> step1_distribute(SubstreamRng& source_rng);

// Step 2: Charlie prepares a coin-in-a-box in |x>. Alice's and Bob's
// descriptions stay uninformed.
PreparedState step2_charlie_prepare(double x, PreparationMode mode, SubstreamRng& charlie_rng);

// Step 3: joint same/different measurement of Alice's two boxes. Both boxes
// are destroyed (opened); Alice learns the outcome and nothing else.
MeasurementDevice::Result step3_alice_measure(SealedBox alice_pair_box, SealedBox charlie_box,
                                              MeasurementDevice& device);

// Step 4: exactly one bit crosses the Alice->Bob channel (Same=0, Different=1).
void step4_send_bit(ClassicalOutcome outcome, Link& alice_to_bob, std::uint64_t session_id,
                    std::uint32_t trial_index);

// Step 5: identity on Same, one rotation on Different.
ClassicalCorrection step5_bob_correct(SealedBox& bob_box, ClassicalOutcome bit);

struct ClassicalTrialConfig {
    double x = 0.5;
    PreparationMode mode = PreparationMode::Direct;
    std::uint64_t seed = 0;
    std::uint64_t session_id = 0;
};

// Runs steps 1-5 in order, drawing every party's randomness from its
// (seed, trial, party) substream, and asserts the deterministic invariant:
// Bob's final face equals Charlie's face at selection.
TrialRecord run_trial(const ClassicalTrialConfig& config, std::uint64_t trial_index,
                      Link& alice_to_bob);

// Convenience wrapper with a throwaway local link.
TrialRecord run_trial(const ClassicalTrialConfig& config, std::uint64_t trial_index);

}  // namespace ctel

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ctel/channel.hpp"
#include "ctel/epistemic.hpp"
#include "ctel/rng.hpp"

namespace ctel {

using Amplitude = std::complex<double>;

// Shared tolerance for every exactness claim (norms, fidelities, reduced
// states). State equality is always up to global phase; comparisons go
// through fidelity, never componentwise.
inline constexpr double kStateTolerance = 1e-12;

// Single-qubit pure state a0|0> + a1|1>, unit norm within kStateTolerance.
struct PureState {
    Amplitude a0{1.0, 0.0};
    Amplitude a1{0.0, 0.0};

    PureState() = default;
    PureState(Amplitude a0, Amplitude a1);  // throws std::invalid_argument off the sphere

    static PureState normalized(Amplitude a0, Amplitude a1);
    static PureState basis0() { return PureState(); }
    static PureState basis1() { return PureState(Amplitude{0.0, 0.0}, Amplitude{1.0, 0.0}); }

    double norm_sq() const { return std::norm(a0) + std::norm(a1); }
};

double fidelity(const PureState& a, const PureState& b);
std::array<double, 3> bloch_vector(const PureState& s);

// Haar-uniform random pure state.
PureState random_pure_state(SubstreamRng& rng);

enum class Qubit : std::uint8_t { Charlie = 0, Alice = 1, Bob = 2 };

const char* qubit_name(Qubit q);

// State vector over 1-3 labeled qubits. Labels are listed most significant
// bit first, so amplitudes()[ (c<<2)|(a<<1)|b ] addresses |c a b> for labels
// {Charlie, Alice, Bob}.
class RegisterState {
public:
    RegisterState(std::vector<Qubit> labels_msb_first, std::vector<Amplitude> amplitudes);

    std::size_t num_qubits() const { return labels_.size(); }
    const std::vector<Qubit>& labels() const { return labels_; }
    const std::vector<Amplitude>& amplitudes() const { return amps_; }
    double norm_sq() const;

private:
    std::vector<Qubit> labels_;
    std::vector<Amplitude> amps_;
};

// (|00> + |11>)/sqrt(2) on (alice, bob).
RegisterState prepare_epr();

// Charlie's qubit joins the register: tensor product in order
// (charlie, alice, bob).
RegisterState compose(const PureState& psi, const RegisterState& epr);

enum class BellOutcome : std::uint8_t { PhiPlus = 0, PhiMinus = 1, PsiPlus = 2, PsiMinus = 3 };

inline constexpr std::array<BellOutcome, 4> kAllBellOutcomes{
    BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus, BellOutcome::PsiMinus};

const char* bell_outcome_name(BellOutcome o);

enum class Correction : std::uint8_t { Identity = 0, FlipX = 1, PhaseZ = 2, FlipXPhaseZ = 3 };

const char* correction_name(Correction c);

// Fixed outcome -> correction table; PhiPlus is the "do nothing" case.
Correction correction_for(BellOutcome o);

// Wire encoding: bit0 set iff an X is needed, bit1 set iff a Z is needed.
std::uint8_t encode_two_bits(BellOutcome o);
BellOutcome decode_two_bits(std::uint8_t bits);

using Unitary2 = std::array<std::array<Amplitude, 2>, 2>;

Unitary2 correction_matrix(Correction c);

// U_k with Bob's pre-correction state = U_k |psi> for outcome k.
Unitary2 outcome_transform(BellOutcome o);

PureState apply_unitary(const Unitary2& u, const PureState& s);
PureState apply_correction(const PureState& bob_state, BellOutcome outcome);

// Analytic projection of a (charlie, alice, bob) register onto Bell outcome
// k of the (charlie, alice) pair.
struct BellProjection {
    double probability;
    PureState bob_state;         // normalized post-measurement state of Bob's qubit
    RegisterState post_register; // full collapsed register
};

BellProjection bell_project(const RegisterState& s, BellOutcome k);

std::array<double, 4> bell_outcome_probabilities(const RegisterState& s);

// Samples an outcome from the Born probabilities using the trial substream.
struct BellMeasurement {
    BellOutcome outcome;
    PureState bob_state;
    RegisterState post_register;
    std::array<double, 4> probabilities;
};

BellMeasurement bell_measure(const RegisterState& s, SubstreamRng& rng);

// Density matrix over 1 or 2 qubits, row-major.
struct DensityMatrix {
    std::size_t dim = 2;
    std::vector<Amplitude> elems;  // dim * dim entries

    Amplitude at(std::size_t row, std::size_t col) const { return elems[row * dim + col]; }
};

// Partial trace keeping the given qubits (in the given order, most
// significant first). Result is Hermitian, trace 1, positive semidefinite.
DensityMatrix reduced_density(const RegisterState& s, std::span<const Qubit> keep);
DensityMatrix reduced_density(const RegisterState& s, Qubit keep);

DensityMatrix maximally_mixed(std::size_t num_qubits);
DensityMatrix bell_projector(BellOutcome k);
double max_entry_deviation(const DensityMatrix& a, const DensityMatrix& b);

// A pure quantum state always admits a measurement whose outcome is certain
// (the projector onto itself). The classical |x> behaves like the mixture
// x|0><0| + (1-x)|1><1|: opening the box is deterministic only at x in {0,1}.
bool deterministic_observable_exists(const PureState& psi);
bool deterministic_observable_exists(const ClassicalState& state);

struct QuantumTrialConfig {
    std::optional<PureState> fixed_psi;  // absent: Haar-random from Charlie's substream
    std::uint64_t seed = 0;
    std::uint64_t session_id = 0;
};

struct QuantumTrialRecord {
    std::uint64_t trial_index = 0;
    PureState psi;  // ground truth: Charlie's prepared state
    BellOutcome outcome = BellOutcome::PhiPlus;
    std::uint32_t bits_sent = 0;
    Correction correction = Correction::Identity;
    PureState bob_final;
    double fidelity_to_input = 0.0;
    EventOrder event_order = canonical_event_order();
};

// Full protocol over a register: steps (1)-(6) with the 2-bit message sent
// through the given link.
QuantumTrialRecord run_quantum_trial(const QuantumTrialConfig& config, std::uint64_t trial_index,
                                     Link& alice_to_bob);
QuantumTrialRecord run_quantum_trial(const QuantumTrialConfig& config, std::uint64_t trial_index);

}  // namespace ctel

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ctel/classical.hpp"
#include "ctel/quantum.hpp"
#include "ctel/session.hpp"
#include "ctel/stats.hpp"

namespace ctel {

// The four claimed features, checked for both protocols.
enum class FeatureId : std::uint8_t {
    InfoGap = 0,        // (a) unbounded description, fixed channel bits
    Ignorance = 1,      // (b) no party ever learns the state
    Instantaneity = 2,  // (c) Bob's state is a known transform before the message
    Erasure = 3,        // (d) no trace of the state survives at Alice
};

const char* feature_name(FeatureId f);
const char* feature_label(FeatureId f);

// Pre-registered thresholds and sizes. Fixed up front; never tuned post hoc.
struct VerifyConfig {
    std::uint64_t seed = 42;
    std::uint64_t trials_per_point = 100000;
    double z = 3.0;                   // confidence half-width multiplier
    double min_chi_square_p = 0.001;  // uniformity tests must exceed this
    double max_mi_bits = 0.01;        // >= 10x plug-in estimator bias at default sizes
    double tolerance = kStateTolerance;
    std::vector<double> x_grid{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<double> correctness_grid{0.0, 0.25, 0.3, 0.5, 0.75, 1.0};
    std::vector<int> precisions{1, 3, 6, 12};
    int num_random_states = 100;
    std::uint64_t feature_a_trials = 500;      // per precision level
    std::uint64_t equivalence_trials = 1000;   // transport cross-check
    int jobs = 1;
};

struct Metric {
    std::string name;
    double value;
};

struct FeatureEntry {
    FeatureId feature = FeatureId::InfoGap;
    ProtocolKind protocol = ProtocolKind::Classical;
    bool analytic = false;  // exact 1e-12 evidence rather than statistical
    bool pass = false;
    std::string threshold;
    std::vector<Metric> metrics;
    std::string evidence;
};

struct CorrectnessEntry {
    double x = 0.0;
    MonteCarloResult result;
};

struct ClassicalCorrectnessReport {
    std::vector<CorrectnessEntry> entries;
    std::uint64_t total_trials = 0;
    std::uint64_t determinism_violations = 0;
    std::string first_violation;  // offending record, when any
    bool pass = false;
};

struct QuantumCorrectnessReport {
    int states = 0;
    double max_fidelity_deficit = 0.0;
    double max_probability_deviation = 0.0;
    bool pass = false;
};

struct TransportReport {
    std::uint64_t roundtrip_messages = 0;
    bool roundtrip_pass = false;
    bool golden_pass = false;
    bool corrupt_detection_pass = false;
    std::uint64_t equivalence_trials = 0;
    bool hub_equivalence_pass = false;
    bool tcp_equivalence_pass = false;
    bool quantum_equivalence_pass = false;
    bool pass = false;
};

struct VerifyReport {
    VerifyConfig config;
    std::optional<ClassicalCorrectnessReport> classical_correctness;
    std::optional<QuantumCorrectnessReport> quantum_correctness;
    std::optional<std::vector<FeatureEntry>> features;
    std::optional<TransportReport> transport;

    bool all_pass() const;
};

enum class Suite : std::uint8_t { Correctness, Features, Transport, All };

// Monte Carlo batches. Each trial draws from its own (seed, trial, party)
// substreams, so parallel execution is bit-identical to serial.
std::vector<TrialRecord> run_classical_batch(double x, std::uint64_t trials, std::uint64_t seed,
                                             int jobs,
                                             PreparationMode mode = PreparationMode::Direct);
std::vector<QuantumTrialRecord> run_quantum_batch(std::uint64_t trials, std::uint64_t seed,
                                                  int jobs);

ClassicalCorrectnessReport verify_classical_correctness(const VerifyConfig& config);
QuantumCorrectnessReport verify_quantum_correctness(const VerifyConfig& config);

FeatureEntry feature_a_info_gap(ProtocolKind protocol, const VerifyConfig& config);
FeatureEntry feature_b_ignorance(ProtocolKind protocol, const VerifyConfig& config);
FeatureEntry feature_c_instantaneity(ProtocolKind protocol, const VerifyConfig& config);
FeatureEntry feature_d_erasure(ProtocolKind protocol, const VerifyConfig& config);

// All four features for both protocols (8 entries), classical grid batches
// shared across (b), (c), (d).
std::vector<FeatureEntry> compare_protocols(const VerifyConfig& config);

TransportReport run_transport_suite(const VerifyConfig& config);

VerifyReport run_verify(const VerifyConfig& config, Suite suite);

// Deterministic renderings: same config and seed give identical bytes.
std::string render_markdown(const VerifyReport& report);
std::string render_json(const VerifyReport& report);

}  // namespace ctel

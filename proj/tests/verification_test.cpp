#include <doctest.h>

#include "ctel/run_log.hpp"
#include "ctel/verification.hpp"

using namespace ctel;

namespace {

VerifyConfig small_config() {
    VerifyConfig config;
    config.seed = 42;
    config.trials_per_point = 20000;
    config.num_random_states = 40;
    config.feature_a_trials = 100;
    config.equivalence_trials = 200;
    return config;
}

}  // namespace

TEST_CASE("classical correctness across the grid") {
    VerifyConfig config = small_config();
    ClassicalCorrectnessReport report = verify_classical_correctness(config);
    CHECK(report.pass);
    CHECK(report.determinism_violations == 0);
    CHECK(report.entries.size() == config.correctness_grid.size());
    CHECK(report.total_trials ==
          config.trials_per_point * config.correctness_grid.size());
    for (const CorrectnessEntry& e : report.entries) {
        CHECK(e.result.pass);
        CHECK(e.result.ci_low <= e.result.point_estimate);
        CHECK(e.result.point_estimate <= e.result.ci_high);
    }
}

TEST_CASE("quantum correctness is exact") {
    QuantumCorrectnessReport report = verify_quantum_correctness(small_config());
    CHECK(report.pass);
    CHECK(report.max_fidelity_deficit <= kStateTolerance);
    CHECK(report.max_probability_deviation <= kStateTolerance);
}

TEST_CASE("feature comparison produces eight passing entries") {
    VerifyConfig config = small_config();
    std::vector<FeatureEntry> entries = compare_protocols(config);
    REQUIRE(entries.size() == 8);
    int classical_count = 0;
    for (const FeatureEntry& e : entries) {
        CHECK(e.pass);
        if (e.protocol == ProtocolKind::Classical) ++classical_count;
    }
    CHECK(classical_count == 4);

    // the (a) rows carry the one-vs-two contrast the protocols differ by
    for (const FeatureEntry& e : entries) {
        if (e.feature != FeatureId::InfoGap) continue;
        double expected_bits = e.protocol == ProtocolKind::Classical ? 1.0 : 2.0;
        for (const Metric& m : e.metrics) {
            if (m.name == "bits_per_trial") CHECK(m.value == expected_bits);
            if (m.name == "parameters_to_describe_state") CHECK(m.value == expected_bits);
            if (m.name == "composed_two_trials_bits") CHECK(m.value == 2.0);
        }
    }
}

TEST_CASE("parallel batches are identical to serial ones") {
    VerifyConfig config = small_config();
    std::vector<TrialRecord> serial = run_classical_batch(0.3, 4000, 77, 1);
    std::vector<TrialRecord> parallel = run_classical_batch(0.3, 4000, 77, 4);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i] == parallel[i]);
    }
}

TEST_CASE("reports are byte-identical across runs and job counts") {
    VerifyConfig config = small_config();
    config.trials_per_point = 5000;
    config.equivalence_trials = 100;

    VerifyReport first = run_verify(config, Suite::Features);
    VerifyReport second = run_verify(config, Suite::Features);
    CHECK(render_markdown(first) == render_markdown(second));
    CHECK(render_json(first) == render_json(second));

    VerifyConfig parallel = config;
    parallel.jobs = 3;
    VerifyReport third = run_verify(parallel, Suite::Features);
    CHECK(render_json(first) == render_json(third));
}

TEST_CASE("transport suite passes end to end") {
    VerifyConfig config = small_config();
    TransportReport report = run_transport_suite(config);
    CHECK(report.golden_pass);
    CHECK(report.corrupt_detection_pass);
    CHECK(report.roundtrip_pass);
    CHECK(report.hub_equivalence_pass);
    CHECK(report.tcp_equivalence_pass);
    CHECK(report.quantum_equivalence_pass);
    CHECK(report.pass);
}

TEST_CASE("run log lines are stable and self-contained") {
    ClassicalTrialConfig config{0.3, PreparationMode::Direct, 42, 0};
    TrialRecord record = run_trial(config, 0);
    std::string line = trial_record_line(record);
    CHECK(line == trial_record_line(record));  // deterministic
    CHECK(line.find("\"trial_index\":0") != std::string::npos);
    CHECK(line.find("truth_charlie_face") != std::string::npos);
    CHECK(line.find("\"bits_sent\":1") != std::string::npos);
    CHECK(line.find('\n') == std::string::npos);

    QuantumTrialConfig quantum_config{std::nullopt, 42, 0};
    std::string quantum_line = quantum_record_line(run_quantum_trial(quantum_config, 0));
    CHECK(quantum_line.find("\"bits_sent\":2") != std::string::npos);
    CHECK(quantum_line.find("fidelity") != std::string::npos);
}

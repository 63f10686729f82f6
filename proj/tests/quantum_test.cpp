#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <complex>

#include "ctel/quantum.hpp"

using namespace ctel;

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;

PureState plus_state() { return PureState(kInvSqrt2, kInvSqrt2); }

bool unitary_within_tolerance(const Unitary2& u) {
    // U dagger U = I
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            Amplitude sum{0.0, 0.0};
            for (int k = 0; k < 2; ++k) sum += std::conj(u[k][r]) * u[k][c];
            Amplitude expected = r == c ? Amplitude{1.0, 0.0} : Amplitude{0.0, 0.0};
            if (std::abs(sum - expected) > kStateTolerance) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("EPR pair amplitudes and reduced states") {
    RegisterState epr = prepare_epr();
    const auto& amps = epr.amplitudes();
    CHECK(std::abs(amps[0b00] - Amplitude{kInvSqrt2, 0.0}) <= kStateTolerance);
    CHECK(std::abs(amps[0b01]) <= kStateTolerance);
    CHECK(std::abs(amps[0b10]) <= kStateTolerance);
    CHECK(std::abs(amps[0b11] - Amplitude{kInvSqrt2, 0.0}) <= kStateTolerance);
    CHECK(std::abs(epr.norm_sq() - 1.0) <= kStateTolerance);

    // partial trace of either qubit is maximally mixed
    for (Qubit q : {Qubit::Alice, Qubit::Bob}) {
        DensityMatrix rho = reduced_density(epr, q);
        CHECK(max_entry_deviation(rho, maximally_mixed(1)) <= kStateTolerance);
    }
}

TEST_CASE("pure state construction enforces the norm") {
    CHECK_THROWS_AS(PureState(1.0, 1.0), std::invalid_argument);
    PureState normalized = PureState::normalized(1.0, 1.0);
    CHECK(std::abs(normalized.norm_sq() - 1.0) <= kStateTolerance);
}

TEST_CASE("haar-random states are uniform on the sphere") {
    SubstreamRng rng(1234);
    double mean_bloch[3] = {0.0, 0.0, 0.0};
    double mean_p0 = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        PureState psi = random_pure_state(rng);
        CHECK(std::abs(psi.norm_sq() - 1.0) <= kStateTolerance);
        auto bloch = bloch_vector(psi);
        for (int k = 0; k < 3; ++k) mean_bloch[k] += bloch[k] / n;
        mean_p0 += std::norm(psi.a0) / n;
    }
    double mean_length = std::sqrt(mean_bloch[0] * mean_bloch[0] +
                                   mean_bloch[1] * mean_bloch[1] +
                                   mean_bloch[2] * mean_bloch[2]);
    CHECK(mean_length <= 0.05);              // isotropy
    CHECK(mean_p0 == doctest::Approx(0.5).epsilon(0.04));  // uniform |a0|^2 moment
}

TEST_CASE("compose is the tensor product in (charlie, alice, bob) order") {
    SubstreamRng rng(5);
    RegisterState epr = prepare_epr();

    RegisterState zero = compose(PureState::basis0(), epr);
    for (std::size_t idx = 4; idx < 8; ++idx) {  // charlie bit set
        CHECK(std::abs(zero.amplitudes()[idx]) <= kStateTolerance);
    }

    for (int i = 0; i < 50; ++i) {
        PureState psi = random_pure_state(rng);
        RegisterState joint = compose(psi, epr);
        CHECK(std::abs(joint.norm_sq() - 1.0) <= kStateTolerance);
        // coefficient of |000> is a0 / sqrt(2)
        CHECK(std::abs(joint.amplitudes()[0] - psi.a0 * kInvSqrt2) <= kStateTolerance);
    }
}

TEST_CASE("fidelity on hand-computed cases") {
    PureState zero = PureState::basis0();
    PureState one = PureState::basis1();
    CHECK(fidelity(zero, zero) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fidelity(zero, one) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fidelity(plus_state(), zero) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("every Bell outcome has probability 1/4 for every input") {
    SubstreamRng rng(6);
    RegisterState epr = prepare_epr();
    for (int i = 0; i < 100; ++i) {
        RegisterState joint = compose(random_pure_state(rng), epr);
        for (double p : bell_outcome_probabilities(joint)) {
            CHECK(std::abs(p - 0.25) <= kStateTolerance);
        }
    }
}

TEST_CASE("projection for |0> and PhiPlus leaves Bob in |0>") {
    RegisterState joint = compose(PureState::basis0(), prepare_epr());
    BellProjection projection = bell_project(joint, BellOutcome::PhiPlus);
    CHECK(projection.probability == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(fidelity(projection.bob_state, PureState::basis0()) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Bob's pre-correction state is the outcome's known unitary on psi") {
    SubstreamRng rng(7);
    RegisterState epr = prepare_epr();
    for (int i = 0; i < 100; ++i) {
        PureState psi = random_pure_state(rng);
        RegisterState joint = compose(psi, epr);
        for (BellOutcome outcome : kAllBellOutcomes) {
            PureState expected = apply_unitary(outcome_transform(outcome), psi);
            BellProjection projection = bell_project(joint, outcome);
            CHECK(1.0 - fidelity(expected, projection.bob_state) <= kStateTolerance);
        }
    }
}

TEST_CASE("all four corrections are unitary and PhiPlus does nothing") {
    for (Correction c : {Correction::Identity, Correction::FlipX, Correction::PhaseZ,
                         Correction::FlipXPhaseZ}) {
        CHECK(unitary_within_tolerance(correction_matrix(c)));
    }
    CHECK(correction_for(BellOutcome::PhiPlus) == Correction::Identity);
    PureState psi = plus_state();
    PureState corrected = apply_correction(psi, BellOutcome::PhiPlus);
    CHECK(std::abs(corrected.a0 - psi.a0) <= kStateTolerance);
    CHECK(std::abs(corrected.a1 - psi.a1) <= kStateTolerance);
}

TEST_CASE("teleportation is exact for all outcomes and random states") {
    SubstreamRng rng(8);
    RegisterState epr = prepare_epr();
    for (int i = 0; i < 100; ++i) {
        PureState psi = random_pure_state(rng);
        RegisterState joint = compose(psi, epr);
        for (BellOutcome outcome : kAllBellOutcomes) {
            BellProjection projection = bell_project(joint, outcome);
            PureState corrected = apply_correction(projection.bob_state, outcome);
            CHECK(1.0 - fidelity(psi, corrected) <= kStateTolerance);
        }
    }
}

TEST_CASE("two-bit encoding is a bijection with X/Z semantics") {
    CHECK(encode_two_bits(BellOutcome::PhiPlus) == 0x00);
    CHECK(encode_two_bits(BellOutcome::PsiPlus) == 0x01);
    CHECK(encode_two_bits(BellOutcome::PhiMinus) == 0x02);
    CHECK(encode_two_bits(BellOutcome::PsiMinus) == 0x03);
    for (BellOutcome outcome : kAllBellOutcomes) {
        CHECK(decode_two_bits(encode_two_bits(outcome)) == outcome);
    }
    CHECK_THROWS_AS(decode_two_bits(0x04), std::invalid_argument);
}

TEST_CASE("sampled outcomes are uniform") {
    SubstreamRng rng(9);
    RegisterState joint = compose(random_pure_state(rng), prepare_epr());
    std::array<std::uint64_t, 4> counts{};
    const std::uint64_t n = 40000;
    for (std::uint64_t t = 0; t < n; ++t) {
        SubstreamRng device = SubstreamRng::for_trial(10, t, Party::Device);
        counts[static_cast<std::size_t>(bell_measure(joint, device).outcome)] += 1;
    }
    double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
    for (std::uint64_t c : counts) {
        CHECK(std::abs(static_cast<double>(c) / static_cast<double>(n) - 0.25) <= 3.0 * sigma);
    }
}

TEST_CASE("product state reduces to its factor") {
    std::vector<Amplitude> amps{1.0, 0.0, 0.0, 0.0};  // |0>|0>
    RegisterState product({Qubit::Alice, Qubit::Bob}, amps);
    DensityMatrix rho = reduced_density(product, Qubit::Alice);
    CHECK(std::abs(rho.at(0, 0) - Amplitude{1.0, 0.0}) <= kStateTolerance);
    CHECK(std::abs(rho.at(1, 1)) <= kStateTolerance);
    CHECK(std::abs(rho.at(0, 1)) <= kStateTolerance);
}

TEST_CASE("after the measurement Alice holds a Bell state and mixed singles") {
    SubstreamRng rng(11);
    RegisterState epr = prepare_epr();
    const std::array<Qubit, 2> alice_side{Qubit::Charlie, Qubit::Alice};
    for (int i = 0; i < 20; ++i) {
        RegisterState joint = compose(random_pure_state(rng), epr);
        for (BellOutcome outcome : kAllBellOutcomes) {
            BellProjection projection = bell_project(joint, outcome);
            DensityMatrix rho_ca = reduced_density(projection.post_register, alice_side);
            CHECK(max_entry_deviation(rho_ca, bell_projector(outcome)) <= kStateTolerance);
            for (Qubit q : alice_side) {
                DensityMatrix rho = reduced_density(projection.post_register, q);
                CHECK(max_entry_deviation(rho, maximally_mixed(1)) <= kStateTolerance);
            }
        }
    }
}

TEST_CASE("a deterministic observable exists for pure states only") {
    SubstreamRng rng(12);
    for (int i = 0; i < 100; ++i) {
        CHECK(deterministic_observable_exists(random_pure_state(rng)));
    }
    CHECK_FALSE(deterministic_observable_exists(ClassicalState(0.1, "t")));
    CHECK_FALSE(deterministic_observable_exists(ClassicalState(0.5, "t")));
    CHECK_FALSE(deterministic_observable_exists(ClassicalState(0.9, "t")));
    CHECK(deterministic_observable_exists(ClassicalState(0.0, "t")));
    CHECK(deterministic_observable_exists(ClassicalState(1.0, "t")));
}

TEST_CASE("full quantum trial: two bits, exact copy, ordered events") {
    LocalLink link;
    QuantumTrialConfig config{std::nullopt, 77, 4};
    const EventOrder expected_order = canonical_event_order();
    for (std::uint64_t t = 0; t < 300; ++t) {
        std::uint64_t bits_before = link.stats().semantic_bits;
        QuantumTrialRecord r = run_quantum_trial(config, t, link);
        CHECK(r.bits_sent == 2);
        CHECK(link.stats().semantic_bits - bits_before == 2);
        CHECK(1.0 - r.fidelity_to_input <= kStateTolerance);
        CHECK(r.event_order == expected_order);
        CHECK(r.correction == correction_for(r.outcome));
    }
}

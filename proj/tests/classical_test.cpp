#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

#include "ctel/classical.hpp"
#include "ctel/stats.hpp"

using namespace ctel;

namespace {

// Independent oracle: the whole classical trial reduced to its three binary
// degrees of freedom (Charlie's face, the pair's common face, the
// measurement parity). Written from the protocol description, not from the
// simulator.
struct Branch {
    Face charlie;
    Face pair;
    bool parity;
};

struct BranchOutcome {
    bool same;
    Face bob_final;
    Face alice_pair_opened;
    Face charlie_opened;
    Face bob_precorrection;
};

BranchOutcome enumerate_branch(const Branch& b) {
    Face pair_rotated = b.parity ? flip(b.pair) : b.pair;
    Face charlie_rotated = b.parity ? flip(b.charlie) : b.charlie;
    bool same = pair_rotated == charlie_rotated;
    Face bob_pre = b.pair;  // Bob's box is untouched until the correction
    Face bob_final = same ? bob_pre : flip(bob_pre);
    return {same, bob_final, pair_rotated, charlie_rotated, bob_pre};
}

std::vector<Branch> all_branches() {
    std::vector<Branch> branches;
    for (Face charlie : {Face::Heads, Face::Tails}) {
        for (Face pair : {Face::Heads, Face::Tails}) {
            for (bool parity : {false, true}) {
                branches.push_back({charlie, pair, parity});
            }
        }
    }
    return branches;
}

double binomial_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace

TEST_CASE("eight-branch enumeration: Bob always ends with Charlie's face") {
    for (const Branch& b : all_branches()) {
        BranchOutcome outcome = enumerate_branch(b);
        CHECK(outcome.bob_final == b.charlie);
        // outcome is 'same' exactly when Bob's untouched face already matches
        CHECK(outcome.same == (outcome.bob_precorrection == b.charlie));
    }
}

TEST_CASE("eight-branch enumeration: conditional tables") {
    // Given Same, Bob's pre-correction face equals Charlie's; given
    // Different, it is the flip. With the pair face uniform, P(Same) = 1/2
    // regardless of Charlie's face.
    int same_count = 0;
    for (const Branch& b : all_branches()) {
        BranchOutcome outcome = enumerate_branch(b);
        if (outcome.same) {
            ++same_count;
            CHECK(outcome.bob_precorrection == b.charlie);
        } else {
            CHECK(outcome.bob_precorrection == flip(b.charlie));
        }
    }
    CHECK(same_count == 4);
}

TEST_CASE("simulated trials agree with the enumeration oracle") {
    // Every simulated record must be one of the oracle branches, and carry
    // that branch's exact outcome and final face.
    std::vector<BranchOutcome> oracle;
    for (const Branch& b : all_branches()) oracle.push_back(enumerate_branch(b));

    ClassicalTrialConfig config{0.3, PreparationMode::Direct, 99, 0};
    for (std::uint64_t t = 0; t < 2000; ++t) {
        TrialRecord r = run_trial(config, t);
        bool matched = false;
        for (const BranchOutcome& o : oracle) {
            matched |= o.same == (r.alice_outcome == ClassicalOutcome::Same) &&
                       o.bob_final == r.truth_bob_final_face &&
                       o.alice_pair_opened == r.truth_alice_faces[0] &&
                       o.charlie_opened == r.truth_alice_faces[1] &&
                       o.bob_precorrection == r.truth_bob_precorrection_face();
        }
        CHECK(matched);
        CHECK(r.truth_bob_final_face == r.truth_charlie_face);
        CHECK(r.bits_sent == 1);
    }
}

TEST_CASE("step 3: equal hidden faces always measure Same") {
    for (std::uint64_t seed = 0; seed < 32; ++seed) {  // any device parity
        MeasurementDevice device(SubstreamRng::for_trial(seed, 0, Party::Device));
        auto result = device.measure_same_different(SealedBox(Face::Heads),
                                                    SealedBox(Face::Heads));
        CHECK(result.outcome == ClassicalOutcome::Same);
        CHECK(result.opened[0] == result.opened[1]);
    }
}

TEST_CASE("step 3 refuses opened boxes") {
    MeasurementDevice device(SubstreamRng(1));
    SealedBox opened(Face::Heads);
    opened.open();
    CHECK_THROWS_AS(device.measure_same_different(std::move(opened), SealedBox(Face::Tails)),
                    std::logic_error);
}

TEST_CASE("step 4 wire encoding: Same is 0, Different is 1") {
    LocalLink link;
    step4_send_bit(ClassicalOutcome::Same, link, 5, 17);
    Message same = link.recv();
    CHECK(same.type == MessageType::ClassicalBit);
    CHECK(same.payload == std::vector<std::uint8_t>{0x00});
    CHECK(same.trial_index == 17);
    CHECK(same.semantic_bits() == 1);

    step4_send_bit(ClassicalOutcome::Different, link, 5, 18);
    CHECK(link.recv().payload == std::vector<std::uint8_t>{0x01});
}

TEST_CASE("step 5: identity on Same, rotation on Different") {
    SealedBox box(Face::Heads);
    CHECK(step5_bob_correct(box, ClassicalOutcome::Same) == ClassicalCorrection::Identity);
    CHECK(GroundTruth::face(box) == Face::Heads);
    CHECK(step5_bob_correct(box, ClassicalOutcome::Different) == ClassicalCorrection::Rotate);
    CHECK(GroundTruth::face(box) == Face::Tails);
}

TEST_CASE("x=1 teleports Heads every time") {
    ClassicalTrialConfig config{1.0, PreparationMode::Direct, 3, 0};
    for (std::uint64_t t = 0; t < 200; ++t) {
        CHECK(run_trial(config, t).truth_bob_final_face == Face::Heads);
    }
}

TEST_CASE("Bob's heads frequency tracks x") {
    const std::uint64_t n = 100000;
    const double x = 0.3;
    ClassicalTrialConfig config{x, PreparationMode::Direct, 42, 0};
    std::uint64_t heads = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        if (run_trial(config, t).truth_bob_final_face == Face::Heads) ++heads;
    }
    double freq = static_cast<double>(heads) / static_cast<double>(n);
    CHECK(std::abs(freq - x) <= 3.0 * binomial_sigma(x, n));  // 3 sigma = 0.004349
}

TEST_CASE("outcome distribution is half-half for every x") {
    const std::uint64_t n = 20000;
    for (double x : {0.0, 0.25, 0.5, 0.9, 1.0}) {
        ClassicalTrialConfig config{x, PreparationMode::Direct, 7, 0};
        std::uint64_t same = 0;
        for (std::uint64_t t = 0; t < n; ++t) {
            if (run_trial(config, t).alice_outcome == ClassicalOutcome::Same) ++same;
        }
        double freq = static_cast<double>(same) / static_cast<double>(n);
        CHECK(std::abs(freq - 0.5) <= 3.0 * binomial_sigma(0.5, n));
    }
}

TEST_CASE("Alice's opened faces are uniform even at extreme x") {
    const std::uint64_t n = 20000;
    ClassicalTrialConfig config{0.9, PreparationMode::Direct, 9, 0};
    std::uint64_t pair_heads = 0;
    std::uint64_t charlie_heads = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        TrialRecord r = run_trial(config, t);
        pair_heads += r.truth_alice_faces[0] == Face::Heads ? 1 : 0;
        charlie_heads += r.truth_alice_faces[1] == Face::Heads ? 1 : 0;
    }
    // Parity averaging: (0.9 + 0.1) / 2 = 0.5.
    double sigma = binomial_sigma(0.5, n);
    CHECK(std::abs(static_cast<double>(pair_heads) / n - 0.5) <= 3.0 * sigma);
    CHECK(std::abs(static_cast<double>(charlie_heads) / n - 0.5) <= 3.0 * sigma);
}

TEST_CASE("before the message, Bob's conditional state is |x> or |1-x>") {
    const std::uint64_t n = 50000;
    const double x = 0.3;
    ClassicalTrialConfig config{x, PreparationMode::Direct, 11, 0};
    std::uint64_t same = 0, same_heads = 0, diff = 0, diff_heads = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        TrialRecord r = run_trial(config, t);
        bool heads = r.truth_bob_precorrection_face() == Face::Heads;
        if (r.alice_outcome == ClassicalOutcome::Same) {
            ++same;
            same_heads += heads ? 1 : 0;
        } else {
            ++diff;
            diff_heads += heads ? 1 : 0;
        }
    }
    double p_same = static_cast<double>(same_heads) / static_cast<double>(same);
    double p_diff = static_cast<double>(diff_heads) / static_cast<double>(diff);
    CHECK(std::abs(p_same - x) <= 3.0 * binomial_sigma(x, static_cast<double>(same)));
    CHECK(std::abs(p_diff - (1.0 - x)) <= 3.0 * binomial_sigma(1.0 - x, static_cast<double>(diff)));
}

TEST_CASE("event order is always measure before send before correct") {
    ClassicalTrialConfig config{0.5, PreparationMode::Direct, 13, 0};
    const EventOrder expected = canonical_event_order();
    for (std::uint64_t t = 0; t < 500; ++t) {
        TrialRecord r = run_trial(config, t);
        CHECK(r.event_order == expected);
    }
}

TEST_CASE("correction matches the outcome bit") {
    ClassicalTrialConfig config{0.4, PreparationMode::Direct, 15, 0};
    for (std::uint64_t t = 0; t < 500; ++t) {
        TrialRecord r = run_trial(config, t);
        bool rotated = r.bob_correction == ClassicalCorrection::Rotate;
        CHECK(rotated == (r.alice_outcome == ClassicalOutcome::Different));
    }
}

TEST_CASE("ensemble preparation mode runs the full protocol too") {
    const std::uint64_t n = 20000;
    const double x = 0.25;
    ClassicalTrialConfig config{x, PreparationMode::Ensemble, 17, 0};
    std::uint64_t heads = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
        TrialRecord r = run_trial(config, t);
        CHECK(r.truth_bob_final_face == r.truth_charlie_face);
        heads += r.truth_bob_final_face == Face::Heads ? 1 : 0;
    }
    CHECK(std::abs(static_cast<double>(heads) / n - x) <= 3.0 * binomial_sigma(x, n));
}

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <utility>
#include <vector>

#include "ctel/rng.hpp"
#include "ctel/stats.hpp"

using namespace ctel;

TEST_CASE("mutual information of independent uniform bits stays near zero") {
    SubstreamRng rng(101);
    std::vector<std::pair<int, int>> samples;
    const std::size_t n = 100000;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        samples.emplace_back(rng.next_bit() ? 1 : 0, rng.next_bit() ? 1 : 0);
    }
    double mi = mutual_information(samples);
    // plug-in bias ~ (|O|-1)(|L|-1)/(2 N ln 2) = 7.2e-6 bits at this size
    CHECK(mi >= 0.0);
    CHECK(mi <= 0.005);
}

TEST_CASE("mutual information of a perfectly correlated bit is one bit") {
    SubstreamRng rng(102);
    std::vector<std::pair<int, int>> samples;
    for (std::size_t i = 0; i < 100000; ++i) {
        int b = rng.next_bit() ? 1 : 0;
        samples.emplace_back(b, b);
    }
    CHECK(mutual_information(samples) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("mutual information with a constant label is exactly zero") {
    std::vector<std::pair<int, int>> samples;
    SubstreamRng rng(103);
    for (std::size_t i = 0; i < 1000; ++i) samples.emplace_back(rng.next_bit() ? 1 : 0, 7);
    CHECK(mutual_information(samples) == 0.0);

    std::vector<std::pair<int, int>> empty;
    CHECK_THROWS_AS(mutual_information(empty), std::invalid_argument);
}

TEST_CASE("chi-square p-values hit the textbook quantiles") {
    // 95th and 99th percentile quantiles of chi-square distributions.
    CHECK(chi_square_pvalue(3.841, 1) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi_square_pvalue(6.635, 1) == doctest::Approx(0.01).epsilon(0.01));
    CHECK(chi_square_pvalue(7.815, 3) == doctest::Approx(0.05).epsilon(0.01));
    CHECK(chi_square_pvalue(0.0, 1) == 1.0);
    CHECK_THROWS_AS(chi_square_pvalue(1.0, 0), std::invalid_argument);
}

TEST_CASE("goodness of fit against uniform") {
    std::vector<std::uint64_t> balanced{5000, 5000};
    std::vector<double> uniform{0.5, 0.5};
    CHECK(chi_square_gof_pvalue(balanced, uniform) == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<std::uint64_t> skewed{6000, 4000};
    CHECK(chi_square_gof_pvalue(skewed, uniform) < 1e-6);
}

TEST_CASE("two-sample homogeneity") {
    std::vector<std::uint64_t> a{5000, 5000};
    std::vector<std::uint64_t> b{5050, 4950};
    CHECK(chi_square_two_sample_pvalue(a, a) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(chi_square_two_sample_pvalue(a, b) > 0.001);

    std::vector<std::uint64_t> c{9000, 1000};
    CHECK(chi_square_two_sample_pvalue(a, c) < 1e-9);
}

TEST_CASE("binomial check intervals") {
    MonteCarloResult r = binomial_check(30150, 100000, 0.3, 3.0);
    CHECK(r.pass);
    CHECK(r.ci_low <= r.point_estimate);
    CHECK(r.point_estimate <= r.ci_high);
    // 3 sigma half-width at n=1e5, p=0.3 is 0.004348...
    CHECK(r.ci_high - r.point_estimate == doctest::Approx(0.0043474).epsilon(1e-3));

    CHECK_FALSE(binomial_check(31000, 100000, 0.3, 3.0).pass);

    // degenerate targets demand exact equality
    CHECK(binomial_check(100, 100, 1.0, 3.0).pass);
    CHECK_FALSE(binomial_check(99, 100, 1.0, 3.0).pass);
    CHECK(binomial_check(0, 100, 0.0, 3.0).pass);

    CHECK_THROWS_AS(binomial_check(1, 0, 0.5, 3.0), std::invalid_argument);
}

TEST_CASE("substreams are distinct per trial and party") {
    SubstreamRng a = SubstreamRng::for_trial(42, 0, Party::Alice);
    SubstreamRng b = SubstreamRng::for_trial(42, 0, Party::Bob);
    SubstreamRng a1 = SubstreamRng::for_trial(42, 1, Party::Alice);
    SubstreamRng a_again = SubstreamRng::for_trial(42, 0, Party::Alice);
    std::uint64_t va = a.next_u64();
    CHECK(va != b.next_u64());
    CHECK(va != a1.next_u64());
    CHECK(va == a_again.next_u64());
}

TEST_CASE("uniform doubles live in the half-open unit interval") {
    SubstreamRng rng(999);
    double min = 1.0, max = 0.0, sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double u = rng.next_double();
        min = std::min(min, u);
        max = std::max(max, u);
        sum += u;
    }
    CHECK(min >= 0.0);
    CHECK(max < 1.0);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("unbiased bounded draws") {
    SubstreamRng rng(1000);
    std::array<int, 3> counts{};
    for (int i = 0; i < 30000; ++i) counts[rng.next_below(3)] += 1;
    for (int c : counts) CHECK(std::abs(c - 10000) < 500);
    CHECK_THROWS_AS(rng.next_below(0), std::invalid_argument);
}

TEST_CASE("gaussians have the right first two moments") {
    SubstreamRng rng(1001);
    double sum = 0.0, sum_sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        double g = rng.next_gaussian();
        sum += g;
        sum_sq += g * g;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(sum_sq / n == doctest::Approx(1.0).epsilon(0.03));
}

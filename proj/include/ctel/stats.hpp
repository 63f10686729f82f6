#pragma once

#include <cstdint>
#include <span>
#include <utility>

namespace ctel {

// Plug-in mutual information in bits between two finite-alphabet variables,
// clamped at >= 0. Estimator bias is about (|O|-1)(|L|-1) / (2 N ln 2) bits
// for N samples, which thresholds must leave headroom for.
double mutual_information(std::span<const std::pair<int, int>> samples);

// Regularized upper incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
double gamma_q(double a, double x);

// Upper-tail p-value of a chi-square statistic with dof degrees of freedom.
double chi_square_pvalue(double statistic, int dof);

// Pearson goodness-of-fit against expected proportions; dof = cells - 1.
double chi_square_gof_pvalue(std::span<const std::uint64_t> counts,
                             std::span<const double> expected_props);

// 2 x k homogeneity test between two samples over the same alphabet.
double chi_square_two_sample_pvalue(std::span<const std::uint64_t> a,
                                    std::span<const std::uint64_t> b);

struct MonteCarloResult {
    std::uint64_t trials = 0;
    double point_estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double target = 0.0;
    bool pass = false;
};

// Normal-approximation check of a binomial frequency against its target:
// pass iff |estimate - target| <= z * sqrt(target (1 - target) / trials).
// Degenerate targets (0 or 1) demand exact equality.
MonteCarloResult binomial_check(std::uint64_t successes, std::uint64_t trials, double target,
                                double z);

}  // namespace ctel

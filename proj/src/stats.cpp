#include "ctel/stats.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace ctel {

double mutual_information(std::span<const std::pair<int, int>> samples) {
    if (samples.empty()) throw std::invalid_argument("mutual_information: empty input");
    std::map<std::pair<int, int>, std::uint64_t> joint;
    std::map<int, std::uint64_t> left;
    std::map<int, std::uint64_t> right;
    for (const auto& s : samples) {
        joint[s] += 1;
        left[s.first] += 1;
        right[s.second] += 1;
    }
    const double n = static_cast<double>(samples.size());
    double bits = 0.0;
    for (const auto& [pair, count] : joint) {
        double p_joint = static_cast<double>(count) / n;
        double p_left = static_cast<double>(left[pair.first]) / n;
        double p_right = static_cast<double>(right[pair.second]) / n;
        bits += p_joint * std::log2(p_joint / (p_left * p_right));
    }
    return bits < 0.0 ? 0.0 : bits;
}

namespace {

// Series and continued-fraction evaluation of the incomplete gamma function.
constexpr int kMaxIterations = 300;
constexpr double kEpsilon = 1e-14;

double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIterations; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * kEpsilon) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_continued_fraction(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIterations; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kEpsilon) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: bad arguments");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

double chi_square_pvalue(double statistic, int dof) {
    if (dof < 1) throw std::invalid_argument("chi_square_pvalue: dof must be >= 1");
    if (statistic <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * statistic);
}

double chi_square_gof_pvalue(std::span<const std::uint64_t> counts,
                             std::span<const double> expected_props) {
    if (counts.size() != expected_props.size() || counts.size() < 2) {
        throw std::invalid_argument("chi_square_gof_pvalue: need matching cells, >= 2");
    }
    std::uint64_t total = 0;
    for (std::uint64_t c : counts) total += c;
    if (total == 0) throw std::invalid_argument("chi_square_gof_pvalue: empty sample");
    double statistic = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        double expected = expected_props[i] * static_cast<double>(total);
        if (expected <= 0.0) {
            throw std::invalid_argument("chi_square_gof_pvalue: nonpositive expected cell");
        }
        double diff = static_cast<double>(counts[i]) - expected;
        statistic += diff * diff / expected;
    }
    return chi_square_pvalue(statistic, static_cast<int>(counts.size()) - 1);
}

double chi_square_two_sample_pvalue(std::span<const std::uint64_t> a,
                                    std::span<const std::uint64_t> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw std::invalid_argument("chi_square_two_sample_pvalue: need matching cells, >= 2");
    }
    const std::size_t k = a.size();
    double total_a = 0.0, total_b = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        total_a += static_cast<double>(a[i]);
        total_b += static_cast<double>(b[i]);
    }
    if (total_a == 0.0 || total_b == 0.0) {
        throw std::invalid_argument("chi_square_two_sample_pvalue: empty sample");
    }
    const double grand = total_a + total_b;
    double statistic = 0.0;
    int dof = 0;
    for (std::size_t i = 0; i < k; ++i) {
        double column = static_cast<double>(a[i]) + static_cast<double>(b[i]);
        if (column == 0.0) continue;  // empty category contributes nothing
        double expected_a = total_a * column / grand;
        double expected_b = total_b * column / grand;
        double da = static_cast<double>(a[i]) - expected_a;
        double db = static_cast<double>(b[i]) - expected_b;
        statistic += da * da / expected_a + db * db / expected_b;
        ++dof;
    }
    if (dof < 2) return 1.0;  // all mass in one category on both sides
    return chi_square_pvalue(statistic, dof - 1);
}

MonteCarloResult binomial_check(std::uint64_t successes, std::uint64_t trials, double target,
                                double z) {
    if (trials == 0) throw std::invalid_argument("binomial_check: zero trials");
    if (successes > trials) throw std::invalid_argument("binomial_check: successes > trials");
    MonteCarloResult result;
    result.trials = trials;
    result.target = target;
    result.point_estimate = static_cast<double>(successes) / static_cast<double>(trials);
    double half_width = z * std::sqrt(target * (1.0 - target) / static_cast<double>(trials));
    result.ci_low = result.point_estimate - half_width;
    result.ci_high = result.point_estimate + half_width;
    result.pass = std::abs(result.point_estimate - target) <= half_width;
    return result;
}

}  // namespace ctel

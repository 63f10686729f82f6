#pragma once

#include <cstdint>
#include <random>

#include "ctel/common.hpp"

namespace ctel {

std::uint64_t splitmix64(std::uint64_t& state);

// Independent child seed for a tagged sub-experiment (grid point, suite, ...).
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag);

// Deterministic random substream keyed by (root seed, trial index, party).
//
// Streams are derived by hashing the triple, so trials can run in any order,
// on any thread, or in a different process and still consume identical
// numbers. Only raw engine output is used (mt19937_64 is fully specified by
// the standard); std::*_distribution is avoided because its mapping from
// engine output is implementation-defined.
class SubstreamRng {
public:
    explicit SubstreamRng(std::uint64_t seed) : engine_(seed) {}

    static SubstreamRng for_trial(std::uint64_t root_seed, std::uint64_t trial_index, Party party);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bit() { return (next_u64() >> 63) != 0; }

    // Unbiased uniform integer in [0, n); n must be nonzero.
    std::uint64_t next_below(std::uint64_t n);

    // Bernoulli(p) draw.
    bool next_bernoulli(double p) { return next_double() < p; }

    // Standard normal via Box-Muller.
    double next_gaussian();

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace ctel

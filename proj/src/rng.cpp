#include "ctel/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ctel {

const char* party_name(Party p) {
    switch (p) {
        case Party::Driver: return "driver";
        case Party::Alice: return "alice";
        case Party::Bob: return "bob";
        case Party::Charlie: return "charlie";
        case Party::Device: return "device";
        case Party::Source: return "source";
    }
    return "?";
}

const char* event_name(LogicalEvent e) {
    switch (e) {
        case LogicalEvent::Prepare: return "prepare";
        case LogicalEvent::Distribute: return "distribute";
        case LogicalEvent::Measure: return "measure";
        case LogicalEvent::Send: return "send";
        case LogicalEvent::Correct: return "correct";
        case LogicalEvent::Done: return "done";
    }
    return "?";
}

std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::uint64_t tag) {
    std::uint64_t state = root ^ (tag * 0x9e3779b97f4a7c15ULL);
    std::uint64_t a = splitmix64(state);
    std::uint64_t b = splitmix64(state);
    return a ^ (b >> 1);
}

SubstreamRng SubstreamRng::for_trial(std::uint64_t root_seed, std::uint64_t trial_index,
                                     Party party) {
    std::uint64_t state = root_seed;
    std::uint64_t a = splitmix64(state);
    state ^= trial_index * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
    std::uint64_t b = splitmix64(state);
    state ^= static_cast<std::uint64_t>(party) * 0xda942042e4dd58b5ULL + 1ULL;
    std::uint64_t c = splitmix64(state);
    return SubstreamRng(a ^ (b + 0x9e3779b97f4a7c15ULL) ^ (c << 1));
}

std::uint64_t SubstreamRng::next_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("next_below: n must be nonzero");
    // Rejection sampling over the largest multiple of n.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t r;
    do {
        r = next_u64();
    } while (r >= limit);
    return r % n;
}

double SubstreamRng::next_gaussian() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller; u1 must be in (0, 1].
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

}  // namespace ctel

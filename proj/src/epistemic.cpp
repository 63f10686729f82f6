#include "ctel/epistemic.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace ctel {

namespace {

std::atomic<std::uint64_t> next_box_id{1};

void check_probability(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
    }
}

}  // namespace

const char* face_name(Face f) { return f == Face::Heads ? "H" : "T"; }

SealedBox::SealedBox(Face hidden_face)
    : hidden_(hidden_face), id_(next_box_id.fetch_add(1, std::memory_order_relaxed)) {}

void SealedBox::rotate() {
    if (!sealed_) throw std::logic_error("rotate: box already opened");
    hidden_ = flip(hidden_);
}

Face SealedBox::open() {
    if (!sealed_) throw std::logic_error("open: box already opened");
    sealed_ = false;
    return hidden_;
}

Face SealedBox::face() const {
    if (sealed_) throw std::logic_error("face: box is still sealed");
    return hidden_;
}

ClassicalState::ClassicalState(double x, std::string owner) : x(x), owner(std::move(owner)) {
    check_probability(x, "classical state x");
}

Ensemble::Ensemble(std::size_t n_heads, std::size_t size, SubstreamRng& rng) : n_heads_(n_heads) {
    if (n_heads > size) throw std::invalid_argument("ensemble: n_heads exceeds size");
    if (size == 0) throw std::invalid_argument("ensemble: size must be positive");
    boxes_.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        boxes_.emplace_back(i < n_heads ? Face::Heads : Face::Tails);
    }
    // Fisher-Yates
    for (std::size_t i = size - 1; i > 0; --i) {
        std::size_t j = rng.next_below(i + 1);
        std::swap(boxes_[i], boxes_[j]);
    }
}

SealedBox Ensemble::draw(SubstreamRng& rng) {
    if (boxes_.empty()) throw std::logic_error("ensemble: no boxes left to draw");
    std::size_t i = rng.next_below(boxes_.size());
    std::swap(boxes_[i], boxes_.back());
    SealedBox box = std::move(boxes_.back());
    boxes_.pop_back();
    return box;
}

int decimal_precision(double x, int max_digits) {
    double scaled = x;
    for (int d = 0; d <= max_digits; ++d) {
        if (std::abs(scaled - std::round(scaled)) <= 1e-6) return d;
        scaled *= 10.0;
    }
    return -1;
}

PreparedState prepare_state(double x, PreparationMode mode, SubstreamRng& rng,
                            std::string owner) {
    check_probability(x, "x");
    if (mode == PreparationMode::Direct) {
        Face f = rng.next_bernoulli(x) ? Face::Heads : Face::Tails;
        return PreparedState{SealedBox(f), ClassicalState(x, std::move(owner))};
    }
    int digits = decimal_precision(x);
    if (digits < 0) {
        throw std::invalid_argument(
            "ensemble mode: x * 10^d is not an integer for any d <= " +
            std::to_string(kMaxEnsembleDigits) + "; use direct mode or reduce precision");
    }
    std::size_t size = 1;
    for (int d = 0; d < digits; ++d) size *= 10;
    auto n_heads = static_cast<std::size_t>(std::llround(x * static_cast<double>(size)));
    // Fresh ensemble per preparation; one box drawn without replacement.
    Ensemble ensemble(n_heads, size, rng);
    return PreparedState{ensemble.draw(rng), ClassicalState(x, std::move(owner))};
}

CorrelatedPair prepare_correlated_pair(double y, SubstreamRng& rng) {
    check_probability(y, "y");
    Face common = rng.next_bernoulli(y) ? Face::Heads : Face::Tails;
    return CorrelatedPair{y, SealedBox(common), SealedBox(common)};
}

CorrelatedPair prepare_shared_half_by_rotation(SubstreamRng& rng) {
    SealedBox first(Face::Heads);
    SealedBox second(Face::Heads);
    // The parity bit is the preparer's; it is never visible to any party.
    if (rng.next_bit()) {
        first.rotate();
        second.rotate();
    }
    return CorrelatedPair{0.5, std::move(first), std::move(second)};
}

double estimate_state(std::span<SealedBox> boxes) {
    if (boxes.empty()) throw std::invalid_argument("estimate_state: empty collection");
    std::size_t heads = 0;
    for (SealedBox& box : boxes) {
        if (box.open() == Face::Heads) ++heads;
    }
    return static_cast<double>(heads) / static_cast<double>(boxes.size());
}

}  // namespace ctel

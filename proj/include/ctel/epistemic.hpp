#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ctel/rng.hpp"

namespace ctel {

enum class Face : std::uint8_t { Heads = 0, Tails = 1 };

constexpr Face flip(Face f) { return f == Face::Heads ? Face::Tails : Face::Heads; }

const char* face_name(Face f);  // "H" / "T"

// A coin sealed inside an opaque, 180-degree-rotatable box.
//
// While sealed, the face is unreadable through the party-facing interface:
// rotate() flips it blindly, open() breaks the seal and reveals it, and that
// is all. Verification code reads sealed boxes through GroundTruth, which
// party logic never touches.
class SealedBox {
public:
    explicit SealedBox(Face hidden_face);

    std::uint64_t id() const { return id_; }
    bool sealed() const { return sealed_; }

    // Flips the hidden face without revealing it. Throws std::logic_error if
    // the box has been opened.
    void rotate();

    // Breaks the seal and reveals the face. Throws std::logic_error if
    // already open.
    Face open();

    // Face of an already-opened box; throws std::logic_error while sealed.
    Face face() const;

private:
    friend struct GroundTruth;
    Face hidden_;
    bool sealed_ = true;
    std::uint64_t id_;
};

// Omniscient access for trial records and tests only.
struct GroundTruth {
    static Face face(const SealedBox& box) { return box.hidden_; }
};

// The epistemic state |x>: the probability, for the named observer, that a
// two-configuration system is in the reference configuration (Heads).
// Rotating the box maps |x> to |1-x>.
struct ClassicalState {
    double x;
    std::string owner;

    ClassicalState(double x, std::string owner);

    ClassicalState rotated() const { return ClassicalState(1.0 - x, owner); }
};

// An explicit finite ensemble: exactly n_heads of the boxes hide Heads, the
// rest Tails, in shuffled order.
class Ensemble {
public:
    Ensemble(std::size_t n_heads, std::size_t size, SubstreamRng& rng);

    std::size_t size() const { return boxes_.size(); }
    std::size_t n_heads() const { return n_heads_; }
    const std::vector<SealedBox>& boxes() const { return boxes_; }

    // Removes and returns a uniformly random box (without replacement).
    SealedBox draw(SubstreamRng& rng);

private:
    std::size_t n_heads_;
    std::vector<SealedBox> boxes_;
};

// Two sealed boxes guaranteed to hide the same face; Heads-Heads with
// probability y at preparation.
struct CorrelatedPair {
    double y;
    SealedBox first;
    SealedBox second;
};

enum class PreparationMode : std::uint8_t { Direct = 0, Ensemble = 1 };

struct PreparedState {
    SealedBox box;
    ClassicalState state;
};

// Ensemble sizes are capped at 10^6 boxes, i.e. at most 6 decimal digits of
// x in ensemble mode. Direct mode has no precision cap.
inline constexpr int kMaxEnsembleDigits = 6;

// Smallest d <= max_digits with x * 10^d integral, or -1 if none.
int decimal_precision(double x, int max_digits = kMaxEnsembleDigits);

// Prepares one coin-in-a-box in |x>. Direct mode draws the face as a single
// Bernoulli(x); ensemble mode builds Ensemble(x * 10^d, 10^d) and draws one
// box from it. The two modes are distributionally identical.
PreparedState prepare_state(double x, PreparationMode mode, SubstreamRng& rng,
                            std::string owner = "preparer");

// Prepares |y>_HH + |1-y>_TT by the ensemble-of-pairs construction collapsed
// to its distribution: one Bernoulli(y) draw shared by both boxes.
CorrelatedPair prepare_correlated_pair(double y, SubstreamRng& rng);

// Prepares |1/2>_HH + |1/2>_TT from a single pair: both coins start Heads,
// then both boxes get the same random number of 180-degree turns. Only the
// parity of the count matters, so one uniform parity bit is drawn.
CorrelatedPair prepare_shared_half_by_rotation(SubstreamRng& rng);

// Ensemble tomography: opens every box and returns the Heads fraction.
// Destructive; a single box can never determine |x>.
double estimate_state(std::span<SealedBox> boxes);

}  // namespace ctel

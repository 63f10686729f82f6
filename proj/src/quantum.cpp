#include "ctel/quantum.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ctel {

namespace {

constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490; // 1/sqrt(2)

void check_unit_norm(double norm_sq, const char* what) {
    if (std::abs(norm_sq - 1.0) > kStateTolerance) {
        throw std::invalid_argument(std::string(what) + ": state is not unit norm");
    }
}

}  // namespace

PureState::PureState(Amplitude a0, Amplitude a1) : a0(a0), a1(a1) {
    check_unit_norm(norm_sq(), "PureState");
}

PureState PureState::normalized(Amplitude a0, Amplitude a1) {
    double n = std::sqrt(std::norm(a0) + std::norm(a1));
    if (n < 1e-15) throw std::invalid_argument("PureState::normalized: zero vector");
    return PureState(a0 / n, a1 / n);
}

double fidelity(const PureState& a, const PureState& b) {
    return std::norm(std::conj(a.a0) * b.a0 + std::conj(a.a1) * b.a1);
}

std::array<double, 3> bloch_vector(const PureState& s) {
    Amplitude cross = std::conj(s.a0) * s.a1;
    return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(s.a0) - std::norm(s.a1)};
}

PureState random_pure_state(SubstreamRng& rng) {
    // Four independent gaussians, normalized: Haar-uniform on the sphere.
    Amplitude a0{rng.next_gaussian(), rng.next_gaussian()};
    Amplitude a1{rng.next_gaussian(), rng.next_gaussian()};
    return PureState::normalized(a0, a1);
}

const char* qubit_name(Qubit q) {
    switch (q) {
        case Qubit::Charlie: return "charlie";
        case Qubit::Alice: return "alice";
        case Qubit::Bob: return "bob";
    }
    return "?";
}

RegisterState::RegisterState(std::vector<Qubit> labels_msb_first,
                             std::vector<Amplitude> amplitudes)
    : labels_(std::move(labels_msb_first)), amps_(std::move(amplitudes)) {
    if (labels_.empty() || labels_.size() > 3) {
        throw std::invalid_argument("RegisterState: 1 to 3 qubits");
    }
    if (amps_.size() != (std::size_t{1} << labels_.size())) {
        throw std::invalid_argument("RegisterState: amplitude count must be 2^k");
    }
    check_unit_norm(norm_sq(), "RegisterState");
}

double RegisterState::norm_sq() const {
    double total = 0.0;
    for (const Amplitude& a : amps_) total += std::norm(a);
    return total;
}

RegisterState prepare_epr() {
    std::vector<Amplitude> amps(4, Amplitude{0.0, 0.0});
    amps[0b00] = kInvSqrt2;
    amps[0b11] = kInvSqrt2;
    return RegisterState({Qubit::Alice, Qubit::Bob}, std::move(amps));
}

RegisterState compose(const PureState& psi, const RegisterState& epr) {
    if (epr.num_qubits() != 2) throw std::invalid_argument("compose: expected a 2-qubit register");
    const auto& e = epr.amplitudes();
    std::vector<Amplitude> amps(8);
    for (std::size_t c = 0; c < 2; ++c) {
        Amplitude pc = c == 0 ? psi.a0 : psi.a1;
        for (std::size_t ab = 0; ab < 4; ++ab) {
            amps[(c << 2) | ab] = pc * e[ab];
        }
    }
    std::vector<Qubit> labels{Qubit::Charlie};
    labels.insert(labels.end(), epr.labels().begin(), epr.labels().end());
    return RegisterState(std::move(labels), std::move(amps));
}

const char* bell_outcome_name(BellOutcome o) {
    switch (o) {
        case BellOutcome::PhiPlus: return "phi_plus";
        case BellOutcome::PhiMinus: return "phi_minus";
        case BellOutcome::PsiPlus: return "psi_plus";
        case BellOutcome::PsiMinus: return "psi_minus";
    }
    return "?";
}

const char* correction_name(Correction c) {
    switch (c) {
        case Correction::Identity: return "identity";
        case Correction::FlipX: return "flip_x";
        case Correction::PhaseZ: return "phase_z";
        case Correction::FlipXPhaseZ: return "flip_x_phase_z";
    }
    return "?";
}

Correction correction_for(BellOutcome o) {
    switch (o) {
        case BellOutcome::PhiPlus: return Correction::Identity;
        case BellOutcome::PsiPlus: return Correction::FlipX;
        case BellOutcome::PhiMinus: return Correction::PhaseZ;
        case BellOutcome::PsiMinus: return Correction::FlipXPhaseZ;
    }
    throw std::invalid_argument("correction_for: bad outcome");
}

std::uint8_t encode_two_bits(BellOutcome o) {
    std::uint8_t bits = 0;
    if (o == BellOutcome::PsiPlus || o == BellOutcome::PsiMinus) bits |= 0x01;  // X needed
    if (o == BellOutcome::PhiMinus || o == BellOutcome::PsiMinus) bits |= 0x02; // Z needed
    return bits;
}

BellOutcome decode_two_bits(std::uint8_t bits) {
    switch (bits) {
        case 0x00: return BellOutcome::PhiPlus;
        case 0x01: return BellOutcome::PsiPlus;
        case 0x02: return BellOutcome::PhiMinus;
        case 0x03: return BellOutcome::PsiMinus;
        default: throw std::invalid_argument("decode_two_bits: value exceeds two bits");
    }
}

Unitary2 correction_matrix(Correction c) {
    const Amplitude zero{0.0, 0.0};
    const Amplitude one{1.0, 0.0};
    switch (c) {
        case Correction::Identity: return {{{one, zero}, {zero, one}}};
        case Correction::FlipX: return {{{zero, one}, {one, zero}}};
        case Correction::PhaseZ: return {{{one, zero}, {zero, -one}}};
        // X*Z: apply Z, then X.
        case Correction::FlipXPhaseZ: return {{{zero, -one}, {one, zero}}};
    }
    throw std::invalid_argument("correction_matrix: bad correction");
}

Unitary2 outcome_transform(BellOutcome o) {
    switch (o) {
        case BellOutcome::PhiPlus: return correction_matrix(Correction::Identity);
        case BellOutcome::PhiMinus: return correction_matrix(Correction::PhaseZ);
        case BellOutcome::PsiPlus: return correction_matrix(Correction::FlipX);
        case BellOutcome::PsiMinus: return correction_matrix(Correction::FlipXPhaseZ);
    }
    throw std::invalid_argument("outcome_transform: bad outcome");
}

PureState apply_unitary(const Unitary2& u, const PureState& s) {
    return PureState(u[0][0] * s.a0 + u[0][1] * s.a1, u[1][0] * s.a0 + u[1][1] * s.a1);
}

PureState apply_correction(const PureState& bob_state, BellOutcome outcome) {
    return apply_unitary(correction_matrix(correction_for(outcome)), bob_state);
}

namespace {

// Bell basis amplitudes over (charlie, alice): pairs of (ca index, sign).
struct BellComponents {
    std::size_t ca_a;
    std::size_t ca_b;
    double sign_b;
};

BellComponents bell_components(BellOutcome k) {
    switch (k) {
        case BellOutcome::PhiPlus: return {0b00, 0b11, +1.0};
        case BellOutcome::PhiMinus: return {0b00, 0b11, -1.0};
        case BellOutcome::PsiPlus: return {0b01, 0b10, +1.0};
        case BellOutcome::PsiMinus: return {0b01, 0b10, -1.0};
    }
    throw std::invalid_argument("bell_components: bad outcome");
}

void require_teleport_register(const RegisterState& s) {
    if (s.num_qubits() != 3 ||
        s.labels() != std::vector<Qubit>{Qubit::Charlie, Qubit::Alice, Qubit::Bob}) {
        throw std::invalid_argument("expected a (charlie, alice, bob) register");
    }
}

}  // namespace

BellProjection bell_project(const RegisterState& s, BellOutcome k) {
    require_teleport_register(s);
    const auto& amps = s.amplitudes();
    const BellComponents bc = bell_components(k);
    // <bell_k|_{CA} tensor I_B applied to the state.
    Amplitude b0 = kInvSqrt2 * (amps[(bc.ca_a << 1) | 0] + bc.sign_b * amps[(bc.ca_b << 1) | 0]);
    Amplitude b1 = kInvSqrt2 * (amps[(bc.ca_a << 1) | 1] + bc.sign_b * amps[(bc.ca_b << 1) | 1]);
    double prob = std::norm(b0) + std::norm(b1);
    if (prob < 1e-30) {
        // Degenerate branch; report a zero-probability projection with an
        // unusable bob state marker.
        std::vector<Amplitude> zero_post(8, Amplitude{0.0, 0.0});
        zero_post[0] = 1.0;
        return BellProjection{0.0, PureState::basis0(),
                              RegisterState({Qubit::Charlie, Qubit::Alice, Qubit::Bob},
                                            std::move(zero_post))};
    }
    double inv_norm = 1.0 / std::sqrt(prob);
    PureState bob(b0 * inv_norm, b1 * inv_norm);
    // Collapsed register: |bell_k>_{CA} tensor bob.
    std::vector<Amplitude> post(8, Amplitude{0.0, 0.0});
    post[(bc.ca_a << 1) | 0] = kInvSqrt2 * bob.a0;
    post[(bc.ca_a << 1) | 1] = kInvSqrt2 * bob.a1;
    post[(bc.ca_b << 1) | 0] = bc.sign_b * kInvSqrt2 * bob.a0;
    post[(bc.ca_b << 1) | 1] = bc.sign_b * kInvSqrt2 * bob.a1;
    return BellProjection{prob, bob,
                          RegisterState({Qubit::Charlie, Qubit::Alice, Qubit::Bob},
                                        std::move(post))};
}

std::array<double, 4> bell_outcome_probabilities(const RegisterState& s) {
    std::array<double, 4> probs{};
    for (std::size_t i = 0; i < 4; ++i) {
        probs[i] = bell_project(s, kAllBellOutcomes[i]).probability;
    }
    return probs;
}

BellMeasurement bell_measure(const RegisterState& s, SubstreamRng& rng) {
    std::array<double, 4> probs = bell_outcome_probabilities(s);
    double u = rng.next_double();
    double cumulative = 0.0;
    BellOutcome outcome = BellOutcome::PsiMinus;
    for (std::size_t i = 0; i < 4; ++i) {
        cumulative += probs[i];
        if (u < cumulative) {
            outcome = kAllBellOutcomes[i];
            break;
        }
    }
    BellProjection projection = bell_project(s, outcome);
    if (projection.probability < 1e-15) {
        throw std::logic_error("bell_measure: sampled a zero-probability branch");
    }
    return BellMeasurement{outcome, projection.bob_state, std::move(projection.post_register),
                           probs};
}

DensityMatrix reduced_density(const RegisterState& s, std::span<const Qubit> keep) {
    const std::size_t n = s.num_qubits();
    // Bit position (from LSB) of each label.
    auto bit_of = [&](Qubit q) -> std::size_t {
        for (std::size_t i = 0; i < n; ++i) {
            if (s.labels()[i] == q) return n - 1 - i;
        }
        throw std::invalid_argument("reduced_density: label not in register");
    };
    std::vector<std::size_t> keep_bits;
    keep_bits.reserve(keep.size());
    for (Qubit q : keep) keep_bits.push_back(bit_of(q));
    if (keep_bits.empty() || keep_bits.size() >= n + 1) {
        throw std::invalid_argument("reduced_density: bad keep set");
    }
    std::vector<std::size_t> traced_bits;
    for (std::size_t b = 0; b < n; ++b) {
        bool kept = false;
        for (std::size_t kb : keep_bits) kept |= (kb == b);
        if (!kept) traced_bits.push_back(b);
    }

    const std::size_t dim = std::size_t{1} << keep_bits.size();
    const std::size_t traced_dim = std::size_t{1} << traced_bits.size();
    auto full_index = [&](std::size_t kept_value, std::size_t traced_value) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i < keep_bits.size(); ++i) {
            // keep[0] is the most significant bit of the reduced index
            std::size_t bit = (kept_value >> (keep_bits.size() - 1 - i)) & 1;
            idx |= bit << keep_bits[i];
        }
        for (std::size_t i = 0; i < traced_bits.size(); ++i) {
            std::size_t bit = (traced_value >> i) & 1;
            idx |= bit << traced_bits[i];
        }
        return idx;
    };

    const auto& amps = s.amplitudes();
    DensityMatrix rho{dim, std::vector<Amplitude>(dim * dim, Amplitude{0.0, 0.0})};
    for (std::size_t r = 0; r < dim; ++r) {
        for (std::size_t c = 0; c < dim; ++c) {
            Amplitude sum{0.0, 0.0};
            for (std::size_t t = 0; t < traced_dim; ++t) {
                sum += amps[full_index(r, t)] * std::conj(amps[full_index(c, t)]);
            }
            rho.elems[r * dim + c] = sum;
        }
    }
    return rho;
}

DensityMatrix reduced_density(const RegisterState& s, Qubit keep) {
    std::array<Qubit, 1> keep_one{keep};
    return reduced_density(s, keep_one);
}

DensityMatrix maximally_mixed(std::size_t num_qubits) {
    const std::size_t dim = std::size_t{1} << num_qubits;
    DensityMatrix rho{dim, std::vector<Amplitude>(dim * dim, Amplitude{0.0, 0.0})};
    for (std::size_t i = 0; i < dim; ++i) {
        rho.elems[i * dim + i] = 1.0 / static_cast<double>(dim);
    }
    return rho;
}

DensityMatrix bell_projector(BellOutcome k) {
    const BellComponents bc = bell_components(k);
    std::array<Amplitude, 4> ket{};
    ket[bc.ca_a] = kInvSqrt2;
    ket[bc.ca_b] = bc.sign_b * kInvSqrt2;
    DensityMatrix rho{4, std::vector<Amplitude>(16, Amplitude{0.0, 0.0})};
    for (std::size_t r = 0; r < 4; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            rho.elems[r * 4 + c] = ket[r] * std::conj(ket[c]);
        }
    }
    return rho;
}

double max_entry_deviation(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.dim != b.dim) throw std::invalid_argument("max_entry_deviation: dimension mismatch");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.elems.size(); ++i) {
        worst = std::max(worst, std::abs(a.elems[i] - b.elems[i]));
    }
    return worst;
}

bool deterministic_observable_exists(const PureState&) {
    // The projector onto the state itself has outcome probability 1.
    return true;
}

bool deterministic_observable_exists(const ClassicalState& state) {
    // The only available measurement is opening the box.
    return state.x == 0.0 || state.x == 1.0;
}

QuantumTrialRecord run_quantum_trial(const QuantumTrialConfig& config, std::uint64_t trial_index,
                                     Link& alice_to_bob) {
    QuantumTrialRecord record;
    record.trial_index = trial_index;

    std::size_t tick = 0;
    auto log_event = [&](LogicalEvent e) { record.event_order[tick++] = e; };

    // (1) EPR pair distributed between Alice and Bob
    RegisterState epr = prepare_epr();
    log_event(LogicalEvent::Prepare);
    log_event(LogicalEvent::Distribute);

    // (2) Charlie prepares |psi> and gives it to Alice
    if (config.fixed_psi.has_value()) {
        record.psi = *config.fixed_psi;
    } else {
        SubstreamRng charlie_rng =
            SubstreamRng::for_trial(config.seed, trial_index, Party::Charlie);
        record.psi = random_pure_state(charlie_rng);
    }
    RegisterState joint = compose(record.psi, epr);

    // (3) Bell measurement on (charlie, alice)
    SubstreamRng device_rng = SubstreamRng::for_trial(config.seed, trial_index, Party::Device);
    BellMeasurement measured = bell_measure(joint, device_rng);
    record.outcome = measured.outcome;
    log_event(LogicalEvent::Measure);

    // (4) two classical bits Alice -> Bob
    alice_to_bob.send(Message::two_bits(encode_two_bits(measured.outcome), config.session_id,
                                        static_cast<std::uint32_t>(trial_index)));
    record.bits_sent = 2;
    log_event(LogicalEvent::Send);

    // (5) Bob applies the correction the bits select
    Message bits_message = alice_to_bob.recv();
    BellOutcome received = decode_two_bits(bits_message.two_bit_value());
    record.correction = correction_for(received);
    record.bob_final = apply_correction(measured.bob_state, received);
    log_event(LogicalEvent::Correct);

    // (6) Bob's state is an exact copy of |psi>
    record.fidelity_to_input = fidelity(record.psi, record.bob_final);
    log_event(LogicalEvent::Done);
    return record;
}

QuantumTrialRecord run_quantum_trial(const QuantumTrialConfig& config,
                                     std::uint64_t trial_index) {
    LocalLink link;
    return run_quantum_trial(config, trial_index, link);
}

}  // namespace ctel

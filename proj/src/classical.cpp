#include "ctel/classical.hpp"

#include <sstream>

namespace ctel {

const char* outcome_name(ClassicalOutcome o) {
    return o == ClassicalOutcome::Same ? "same" : "different";
}

const char* classical_correction_name(ClassicalCorrection c) {
    return c == ClassicalCorrection::Identity ? "identity" : "rotate";
}

MeasurementDevice::Result MeasurementDevice::measure_same_different(SealedBox first,
                                                                    SealedBox second) {
    if (!first.sealed() || !second.sealed()) {
        throw std::logic_error("measure: both boxes must still be sealed");
    }
    // Common random parity, then open. The common rotation preserves
    // same-vs-different while erasing each face's dependence on its history.
    if (rng_.next_bit()) {
        first.rotate();
        second.rotate();
    }
    Face a = first.open();
    Face b = second.open();
    return Result{a == b ? ClassicalOutcome::Same : ClassicalOutcome::Different, {a, b}};
}

std::pair<SealedBox, SealedBox> step1_distribute(SubstreamRng& source_rng) {
    CorrelatedPair pair = prepare_shared_half_by_rotation(source_rng);
    return {std::move(pair.first), std::move(pair.second)};
}

PreparedState step2_charlie_prepare(double x, PreparationMode mode, SubstreamRng& charlie_rng) {
    return prepare_state(x, mode, charlie_rng, "charlie");
}

MeasurementDevice::Result step3_alice_measure(SealedBox alice_pair_box, SealedBox charlie_box,
                                              MeasurementDevice& device) {
    return device.measure_same_different(std::move(alice_pair_box), std::move(charlie_box));
}

void step4_send_bit(ClassicalOutcome outcome, Link& alice_to_bob, std::uint64_t session_id,
                    std::uint32_t trial_index) {
    alice_to_bob.send(Message::classical_bit(outcome == ClassicalOutcome::Different, session_id,
                                             trial_index));
}

ClassicalCorrection step5_bob_correct(SealedBox& bob_box, ClassicalOutcome bit) {
    if (bit == ClassicalOutcome::Same) return ClassicalCorrection::Identity;
    bob_box.rotate();
    return ClassicalCorrection::Rotate;
}

namespace {

std::string describe(const TrialRecord& r) {
    std::ostringstream out;
    out << "trial " << r.trial_index << " x=" << r.x_charlie << " charlie="
        << face_name(r.truth_charlie_face) << " outcome=" << outcome_name(r.alice_outcome)
        << " correction=" << classical_correction_name(r.bob_correction)
        << " bob=" << face_name(r.truth_bob_final_face);
    return out.str();
}

}  // namespace

TrialRecord run_trial(const ClassicalTrialConfig& config, std::uint64_t trial_index,
                      Link& alice_to_bob) {
    TrialRecord record;
    record.trial_index = trial_index;
    record.x_charlie = config.x;

    SubstreamRng source_rng = SubstreamRng::for_trial(config.seed, trial_index, Party::Source);
    SubstreamRng charlie_rng = SubstreamRng::for_trial(config.seed, trial_index, Party::Charlie);
    MeasurementDevice device(SubstreamRng::for_trial(config.seed, trial_index, Party::Device));

    std::size_t tick = 0;
    auto log_event = [&](LogicalEvent e) { record.event_order[tick++] = e; };

    // (1) shared pair prepared and distributed
    auto [alice_box, bob_box] = step1_distribute(source_rng);
    log_event(LogicalEvent::Prepare);
    log_event(LogicalEvent::Distribute);

    // (2) Charlie prepares |x> and passes the box to Alice
    PreparedState prepared = step2_charlie_prepare(config.x, config.mode, charlie_rng);
    record.truth_charlie_face = GroundTruth::face(prepared.box);

    // (3) joint measurement; Alice learns same/different only
    MeasurementDevice::Result measured =
        step3_alice_measure(std::move(alice_box), std::move(prepared.box), device);
    record.alice_outcome = measured.outcome;
    record.truth_alice_faces = measured.opened;
    log_event(LogicalEvent::Measure);

    // (4) one bit Alice -> Bob
    step4_send_bit(measured.outcome, alice_to_bob,
                   config.session_id, static_cast<std::uint32_t>(trial_index));
    record.bits_sent = 1;
    log_event(LogicalEvent::Send);

    // (5) Bob corrects
    Message bit_message = alice_to_bob.recv();
    ClassicalOutcome received =
        bit_message.bit_value() ? ClassicalOutcome::Different : ClassicalOutcome::Same;
    record.bob_correction = step5_bob_correct(bob_box, received);
    log_event(LogicalEvent::Correct);

    // (6) Bob's box stays sealed; its state is |x> for Charlie. The hidden
    // face enters the record through the omniscient log only.
    record.truth_bob_final_face = GroundTruth::face(bob_box);
    log_event(LogicalEvent::Done);

    if (record.truth_bob_final_face != record.truth_charlie_face) {
        throw InvariantViolation("deterministic invariant violated: " + describe(record), record);
    }
    if (record.bob_correction !=
        (record.alice_outcome == ClassicalOutcome::Same ? ClassicalCorrection::Identity
                                                        : ClassicalCorrection::Rotate)) {
        throw InvariantViolation("correction does not match outcome: " + describe(record), record);
    }
    return record;
}

TrialRecord run_trial(const ClassicalTrialConfig& config, std::uint64_t trial_index) {
    LocalLink link;
    return run_trial(config, trial_index, link);
}

}  // namespace ctel

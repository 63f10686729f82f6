#include "ctel/run_log.hpp"

#include <json.hpp>

namespace ctel {

namespace {

nlohmann::ordered_json events_json(const EventOrder& events) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (LogicalEvent e : events) out.push_back(event_name(e));
    return out;
}

}  // namespace

std::string trial_record_line(const TrialRecord& r) {
    nlohmann::ordered_json line;
    line["trial_index"] = r.trial_index;
    line["x"] = r.x_charlie;
    line["outcome"] = outcome_name(r.alice_outcome);
    line["bits_sent"] = r.bits_sent;
    line["correction"] = classical_correction_name(r.bob_correction);
    line["truth_charlie_face"] = face_name(r.truth_charlie_face);
    line["truth_bob_face"] = face_name(r.truth_bob_final_face);
    line["truth_alice_faces"] = {face_name(r.truth_alice_faces[0]),
                                 face_name(r.truth_alice_faces[1])};
    line["event_order"] = events_json(r.event_order);
    return line.dump();
}

std::string quantum_record_line(const QuantumTrialRecord& r) {
    nlohmann::ordered_json line;
    line["trial_index"] = r.trial_index;
    line["psi"] = {r.psi.a0.real(), r.psi.a0.imag(), r.psi.a1.real(), r.psi.a1.imag()};
    line["outcome"] = bell_outcome_name(r.outcome);
    line["bits_sent"] = r.bits_sent;
    line["correction"] = correction_name(r.correction);
    line["fidelity"] = r.fidelity_to_input;
    line["event_order"] = events_json(r.event_order);
    return line.dump();
}

}  // namespace ctel

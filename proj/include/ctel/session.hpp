#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ctel/channel.hpp"
#include "ctel/classical.hpp"
#include "ctel/quantum.hpp"
#include "ctel/tcp.hpp"

namespace ctel {

enum class ProtocolKind : std::uint8_t { Classical = 0, Quantum = 1 };

const char* protocol_name(ProtocolKind k);

// Everything the three parties and the driver must agree on for one session.
// The driver distributes it in the kSession control message.
struct SessionConfig {
    ProtocolKind protocol = ProtocolKind::Classical;
    double x = 0.5;                                  // classical |x>
    PreparationMode mode = PreparationMode::Direct;
    bool random_psi = true;                          // quantum: Haar-random per trial
    PureState psi;                                   // quantum: fixed state when !random_psi
    std::uint64_t seed = 0;
    std::uint32_t trials = 1;
    std::uint64_t session_id = 0;
    std::string alice_endpoint = "127.0.0.1:7401";
    std::string bob_endpoint = "127.0.0.1:7402";
    std::string charlie_endpoint = "127.0.0.1:7403";
};

std::vector<std::uint8_t> encode_session_config(const SessionConfig& config);
SessionConfig decode_session_config(std::span<const std::uint8_t> payload);

// Control message builders.
Message make_hello(Party role, std::uint64_t session);
Message make_simple_control(std::uint8_t code, std::uint64_t session, std::uint32_t trial = 0);
Message make_measure_req(std::uint64_t first_box, std::uint64_t second_box, std::uint64_t session,
                         std::uint32_t trial);
Message make_correct_req(std::uint64_t box, std::uint8_t operation, std::uint64_t session,
                         std::uint32_t trial);
Message make_trial_done(std::uint8_t correction, std::uint8_t bits, std::uint64_t session,
                        std::uint32_t trial);
Message make_wire_error(std::uint8_t code, std::uint64_t session);

// Party protocol engines. Each runs its half of the state machine over the
// bus until the driver says goodbye. Parties hold box custody tokens and
// knowledge states only; all ground truth lives with the driver.
void alice_engine(PartyBus& bus, const SessionConfig& config);
void bob_engine(PartyBus& bus, const SessionConfig& config);
void charlie_engine(PartyBus& bus, const SessionConfig& config);

struct SessionRecords {
    std::vector<TrialRecord> classical;
    std::vector<QuantumTrialRecord> quantum;
};

// The driver side: plays the physical world (boxes, measurement device,
// register) and coordinates the parties, producing the same records the
// in-process runner yields for the same seed.
SessionRecords drive_session(PartyBus& bus, const SessionConfig& config);

// All four roles on threads over an in-process hub.
SessionRecords run_hub_session(const SessionConfig& config);

// Driver over TCP: dials the three parties at their configured endpoints.
SessionRecords run_tcp_session(const SessionConfig& config);

// Hosts one party over TCP until session teardown: accepts the expected
// peers, rejects bad handshakes (version mismatch, duplicate or unexpected
// roles), runs the engine. Returns a process exit code.
int serve_party(Party role, TcpListener& listener, std::ostream& diagnostics);

}  // namespace ctel

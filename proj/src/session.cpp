#include "ctel/session.hpp"

#include <bit>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <thread>

namespace ctel {

const char* protocol_name(ProtocolKind k) {
    return k == ProtocolKind::Classical ? "classical" : "quantum";
}

namespace {

void put_f64(std::vector<std::uint8_t>& out, double v) {
    put_u64_be(out, std::bit_cast<std::uint64_t>(v));
}

double get_f64(std::span<const std::uint8_t> in, std::size_t offset) {
    return std::bit_cast<double>(get_u64_be(in, offset));
}

void put_string(std::vector<std::uint8_t>& out, const std::string& s) {
    if (s.size() > 0xFFFF) throw std::invalid_argument("session string too long");
    put_u16_be(out, static_cast<std::uint16_t>(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

std::string get_string(std::span<const std::uint8_t> in, std::size_t& offset) {
    if (offset + 2 > in.size()) throw std::invalid_argument("session blob truncated");
    std::size_t len = get_u16_be(in, offset);
    offset += 2;
    if (offset + len > in.size()) throw std::invalid_argument("session blob truncated");
    std::string s(in.begin() + static_cast<std::ptrdiff_t>(offset),
                  in.begin() + static_cast<std::ptrdiff_t>(offset + len));
    offset += len;
    return s;
}

}  // namespace

std::vector<std::uint8_t> encode_session_config(const SessionConfig& c) {
    std::vector<std::uint8_t> out;
    out.push_back(control::kSession);
    out.push_back(static_cast<std::uint8_t>(c.protocol));
    out.push_back(static_cast<std::uint8_t>(c.mode));
    out.push_back(c.random_psi ? 0x01 : 0x00);
    put_f64(out, c.x);
    put_f64(out, c.psi.a0.real());
    put_f64(out, c.psi.a0.imag());
    put_f64(out, c.psi.a1.real());
    put_f64(out, c.psi.a1.imag());
    put_u64_be(out, c.seed);
    put_u32_be(out, c.trials);
    put_u64_be(out, c.session_id);
    put_string(out, c.alice_endpoint);
    put_string(out, c.bob_endpoint);
    put_string(out, c.charlie_endpoint);
    return out;
}

SessionConfig decode_session_config(std::span<const std::uint8_t> payload) {
    constexpr std::size_t fixed = 1 + 3 + 5 * 8 + 4 + 8;
    if (payload.size() < fixed || payload[0] != control::kSession) {
        throw std::invalid_argument("not a session config payload");
    }
    SessionConfig c;
    c.protocol = static_cast<ProtocolKind>(payload[1]);
    c.mode = static_cast<PreparationMode>(payload[2]);
    c.random_psi = payload[3] != 0;
    c.x = get_f64(payload, 4);
    double a0r = get_f64(payload, 12);
    double a0i = get_f64(payload, 20);
    double a1r = get_f64(payload, 28);
    double a1i = get_f64(payload, 36);
    c.psi = PureState(Amplitude{a0r, a0i}, Amplitude{a1r, a1i});
    c.seed = get_u64_be(payload, 44);
    c.trials = get_u32_be(payload, 52);
    c.session_id = get_u64_be(payload, 56);
    std::size_t offset = 64;
    c.alice_endpoint = get_string(payload, offset);
    c.bob_endpoint = get_string(payload, offset);
    c.charlie_endpoint = get_string(payload, offset);
    return c;
}

Message make_hello(Party role, std::uint64_t session) {
    return Message::control({control::kHello, static_cast<std::uint8_t>(role)}, session, 0);
}

Message make_simple_control(std::uint8_t code, std::uint64_t session, std::uint32_t trial) {
    return Message::control({code}, session, trial);
}

Message make_measure_req(std::uint64_t first_box, std::uint64_t second_box, std::uint64_t session,
                         std::uint32_t trial) {
    std::vector<std::uint8_t> body{control::kMeasureReq};
    put_u64_be(body, first_box);
    put_u64_be(body, second_box);
    return Message::control(std::move(body), session, trial);
}

Message make_correct_req(std::uint64_t box, std::uint8_t operation, std::uint64_t session,
                         std::uint32_t trial) {
    std::vector<std::uint8_t> body{control::kCorrectReq};
    put_u64_be(body, box);
    body.push_back(operation);
    return Message::control(std::move(body), session, trial);
}

Message make_trial_done(std::uint8_t correction, std::uint8_t bits, std::uint64_t session,
                        std::uint32_t trial) {
    return Message::control({control::kTrialDone, correction, bits}, session, trial);
}

Message make_wire_error(std::uint8_t code, std::uint64_t session) {
    return Message::control({control::kError, code}, session, 0);
}

namespace {

[[noreturn]] void protocol_violation(const char* who, const char* expected, const Message& got) {
    throw std::runtime_error(std::string(who) + ": expected " + expected + ", got type " +
                             std::to_string(static_cast<int>(got.type)));
}

bool is_control(const Message& m, std::uint8_t code) {
    return m.type == MessageType::Control && !m.payload.empty() && m.payload[0] == code;
}

}  // namespace

void charlie_engine(PartyBus& bus, const SessionConfig& config) {
    for (;;) {
        Message m = bus.recv_from(Party::Driver);
        if (is_control(m, control::kBye)) {
            bus.send(Party::Driver, make_simple_control(control::kByeAck, config.session_id));
            return;
        }
        if (!is_control(m, control::kTrialStart)) protocol_violation("charlie", "TrialStart", m);
        const std::uint32_t trial = m.trial_index;

        // Step 2: prepare |x> (the preparation is physical, so the draw
        // happens at the world; Charlie keeps the knowledge state).
        bus.send(Party::Driver,
                 make_simple_control(control::kPrepareReq, config.session_id, trial));
        Message box = bus.recv_from(Party::Driver);
        if (box.type != MessageType::BoxTransfer) protocol_violation("charlie", "BoxTransfer", box);

        if (config.protocol == ProtocolKind::Classical) {
            ClassicalState knowledge(config.x, "charlie");  // Charlie's description, his alone
            (void)knowledge;
        }
        // pass the sealed box to Alice
        bus.send(Party::Alice, Message::box_transfer(box.box_id(), box.box_sealed_token(),
                                                     config.session_id, trial));
    }
}

void alice_engine(PartyBus& bus, const SessionConfig& config) {
    for (;;) {
        Message pair_box = bus.recv_from(Party::Driver);
        if (is_control(pair_box, control::kBye)) {
            bus.send(Party::Driver, make_simple_control(control::kByeAck, config.session_id));
            return;
        }
        if (pair_box.type != MessageType::BoxTransfer) {
            protocol_violation("alice", "BoxTransfer", pair_box);
        }
        const std::uint32_t trial = pair_box.trial_index;

        Message charlie_box = bus.recv_from(Party::Charlie);
        if (charlie_box.type != MessageType::BoxTransfer) {
            protocol_violation("alice", "BoxTransfer", charlie_box);
        }

        // Step 3: ask the device for the joint measurement; learn only the outcome.
        bus.send(Party::Driver, make_measure_req(pair_box.box_id(), charlie_box.box_id(),
                                                 config.session_id, trial));
        Message result = bus.recv_from(Party::Driver);
        if (!is_control(result, control::kMeasureRes) || result.payload.size() != 2) {
            protocol_violation("alice", "MeasureRes", result);
        }
        const std::uint8_t outcome = result.payload[1];

        // Step 4: the teleportation channel proper.
        if (config.protocol == ProtocolKind::Classical) {
            bus.send(Party::Bob, Message::classical_bit(outcome != 0, config.session_id, trial));
        } else {
            bus.send(Party::Bob, Message::two_bits(outcome, config.session_id, trial));
        }
    }
}

void bob_engine(PartyBus& bus, const SessionConfig& config) {
    for (;;) {
        Message pair_box = bus.recv_from(Party::Driver);
        if (is_control(pair_box, control::kBye)) {
            bus.send(Party::Driver, make_simple_control(control::kByeAck, config.session_id));
            return;
        }
        if (pair_box.type != MessageType::BoxTransfer) {
            protocol_violation("bob", "BoxTransfer", pair_box);
        }
        const std::uint32_t trial = pair_box.trial_index;

        Message bits = bus.recv_from(Party::Alice);
        std::uint8_t correction = 0;
        std::uint8_t bit_count = 0;
        if (config.protocol == ProtocolKind::Classical) {
            if (bits.type != MessageType::ClassicalBit) protocol_violation("bob", "ClassicalBit", bits);
            bit_count = 1;
            // Step 5: "different" means rotate.
            if (bits.bit_value()) {
                correction = static_cast<std::uint8_t>(ClassicalCorrection::Rotate);
                bus.send(Party::Driver, make_correct_req(pair_box.box_id(), correction,
                                                         config.session_id, trial));
            }
        } else {
            if (bits.type != MessageType::TwoBits) protocol_violation("bob", "TwoBits", bits);
            bit_count = 2;
            Correction c = correction_for(decode_two_bits(bits.two_bit_value()));
            correction = static_cast<std::uint8_t>(c);
            if (c != Correction::Identity) {
                bus.send(Party::Driver, make_correct_req(pair_box.box_id(), correction,
                                                         config.session_id, trial));
            }
        }
        bus.send(Party::Driver,
                 make_trial_done(correction, bit_count, config.session_id, trial));
    }
}

namespace {

// The world as the driver sees it for one trial.
struct ClassicalWorld {
    std::map<std::uint64_t, SealedBox> boxes;

    std::uint64_t admit(SealedBox box) {
        std::uint64_t id = box.id();
        boxes.emplace(id, std::move(box));
        return id;
    }

    SealedBox take(std::uint64_t id) {
        auto it = boxes.find(id);
        if (it == boxes.end()) throw std::runtime_error("unknown box id");
        SealedBox box = std::move(it->second);
        boxes.erase(it);
        return box;
    }

    SealedBox& at(std::uint64_t id) {
        auto it = boxes.find(id);
        if (it == boxes.end()) throw std::runtime_error("unknown box id");
        return it->second;
    }
};

TrialRecord drive_classical_trial(PartyBus& bus, const SessionConfig& config,
                                  std::uint32_t trial) {
    TrialRecord record;
    record.trial_index = trial;
    record.x_charlie = config.x;
    std::size_t tick = 0;
    auto log_event = [&](LogicalEvent e) { record.event_order[tick++] = e; };

    ClassicalWorld world;
    SubstreamRng source_rng = SubstreamRng::for_trial(config.seed, trial, Party::Source);
    auto [alice_box, bob_box] = step1_distribute(source_rng);
    std::uint64_t alice_box_id = world.admit(std::move(alice_box));
    std::uint64_t bob_box_id = world.admit(std::move(bob_box));
    log_event(LogicalEvent::Prepare);
    bus.send(Party::Alice,
             Message::box_transfer(alice_box_id, true, config.session_id, trial));
    bus.send(Party::Bob, Message::box_transfer(bob_box_id, true, config.session_id, trial));
    log_event(LogicalEvent::Distribute);

    bus.send(Party::Charlie,
             make_simple_control(control::kTrialStart, config.session_id, trial));
    Message prep = bus.recv_from(Party::Charlie);
    if (!is_control(prep, control::kPrepareReq)) protocol_violation("driver", "PrepareReq", prep);
    SubstreamRng charlie_rng = SubstreamRng::for_trial(config.seed, trial, Party::Charlie);
    PreparedState prepared = step2_charlie_prepare(config.x, config.mode, charlie_rng);
    record.truth_charlie_face = GroundTruth::face(prepared.box);
    std::uint64_t charlie_box_id = world.admit(std::move(prepared.box));
    bus.send(Party::Charlie,
             Message::box_transfer(charlie_box_id, true, config.session_id, trial));

    Message req = bus.recv_from(Party::Alice);
    if (!is_control(req, control::kMeasureReq) || req.payload.size() != 17) {
        protocol_violation("driver", "MeasureReq", req);
    }
    std::uint64_t first_id = get_u64_be(req.payload, 1);
    std::uint64_t second_id = get_u64_be(req.payload, 9);
    MeasurementDevice device(SubstreamRng::for_trial(config.seed, trial, Party::Device));
    MeasurementDevice::Result measured =
        device.measure_same_different(world.take(first_id), world.take(second_id));
    record.alice_outcome = measured.outcome;
    record.truth_alice_faces = measured.opened;
    log_event(LogicalEvent::Measure);
    bus.send(Party::Alice,
             Message::control({control::kMeasureRes,
                               static_cast<std::uint8_t>(measured.outcome)},
                              config.session_id, trial));

    Message from_bob = bus.recv_from(Party::Bob);
    bool rotated = false;
    if (is_control(from_bob, control::kCorrectReq)) {
        if (from_bob.payload.size() != 10) protocol_violation("driver", "CorrectReq", from_bob);
        std::uint64_t box_id = get_u64_be(from_bob.payload, 1);
        world.at(box_id).rotate();
        rotated = true;
        from_bob = bus.recv_from(Party::Bob);
    }
    if (!is_control(from_bob, control::kTrialDone) || from_bob.payload.size() != 3) {
        protocol_violation("driver", "TrialDone", from_bob);
    }
    record.bob_correction = static_cast<ClassicalCorrection>(from_bob.payload[1]);
    record.bits_sent = from_bob.payload[2];
    if (rotated != (record.bob_correction == ClassicalCorrection::Rotate)) {
        throw std::runtime_error("driver: reported correction disagrees with applied one");
    }
    log_event(LogicalEvent::Send);
    log_event(LogicalEvent::Correct);
    record.truth_bob_final_face = GroundTruth::face(world.at(bob_box_id));
    log_event(LogicalEvent::Done);

    if (record.truth_bob_final_face != record.truth_charlie_face) {
        throw InvariantViolation("networked trial broke the deterministic invariant", record);
    }
    return record;
}

QuantumTrialRecord drive_quantum_trial(PartyBus& bus, const SessionConfig& config,
                                       std::uint32_t trial) {
    QuantumTrialRecord record;
    record.trial_index = trial;
    std::size_t tick = 0;
    auto log_event = [&](LogicalEvent e) { record.event_order[tick++] = e; };

    // Custody tokens for the qubits; amplitudes never leave the world.
    static constexpr std::uint64_t kAliceQubit = 0xA11CE;
    static constexpr std::uint64_t kBobQubit = 0xB0B;
    static constexpr std::uint64_t kCharlieQubit = 0xC4A12;

    RegisterState epr = prepare_epr();
    log_event(LogicalEvent::Prepare);
    bus.send(Party::Alice, Message::box_transfer(kAliceQubit, true, config.session_id, trial));
    bus.send(Party::Bob, Message::box_transfer(kBobQubit, true, config.session_id, trial));
    log_event(LogicalEvent::Distribute);

    bus.send(Party::Charlie,
             make_simple_control(control::kTrialStart, config.session_id, trial));
    Message prep = bus.recv_from(Party::Charlie);
    if (!is_control(prep, control::kPrepareReq)) protocol_violation("driver", "PrepareReq", prep);
    if (config.random_psi) {
        SubstreamRng charlie_rng = SubstreamRng::for_trial(config.seed, trial, Party::Charlie);
        record.psi = random_pure_state(charlie_rng);
    } else {
        record.psi = config.psi;
    }
    bus.send(Party::Charlie,
             Message::box_transfer(kCharlieQubit, true, config.session_id, trial));

    Message req = bus.recv_from(Party::Alice);
    if (!is_control(req, control::kMeasureReq) || req.payload.size() != 17) {
        protocol_violation("driver", "MeasureReq", req);
    }
    RegisterState joint = compose(record.psi, epr);
    SubstreamRng device_rng = SubstreamRng::for_trial(config.seed, trial, Party::Device);
    BellMeasurement measured = bell_measure(joint, device_rng);
    record.outcome = measured.outcome;
    log_event(LogicalEvent::Measure);
    bus.send(Party::Alice,
             Message::control({control::kMeasureRes, encode_two_bits(measured.outcome)},
                              config.session_id, trial));

    PureState bob_state = measured.bob_state;
    Message from_bob = bus.recv_from(Party::Bob);
    bool corrected = false;
    if (is_control(from_bob, control::kCorrectReq)) {
        if (from_bob.payload.size() != 10) protocol_violation("driver", "CorrectReq", from_bob);
        auto op = static_cast<Correction>(from_bob.payload[9]);
        bob_state = apply_unitary(correction_matrix(op), bob_state);
        corrected = true;
        from_bob = bus.recv_from(Party::Bob);
    }
    if (!is_control(from_bob, control::kTrialDone) || from_bob.payload.size() != 3) {
        protocol_violation("driver", "TrialDone", from_bob);
    }
    record.correction = static_cast<Correction>(from_bob.payload[1]);
    record.bits_sent = from_bob.payload[2];
    if (corrected != (record.correction != Correction::Identity)) {
        throw std::runtime_error("driver: reported correction disagrees with applied one");
    }
    log_event(LogicalEvent::Send);
    log_event(LogicalEvent::Correct);
    record.bob_final = bob_state;
    record.fidelity_to_input = fidelity(record.psi, record.bob_final);
    log_event(LogicalEvent::Done);
    return record;
}

}  // namespace

SessionRecords drive_session(PartyBus& bus, const SessionConfig& config) {
    SessionRecords records;
    for (std::uint32_t trial = 0; trial < config.trials; ++trial) {
        try {
            if (config.protocol == ProtocolKind::Classical) {
                records.classical.push_back(drive_classical_trial(bus, config, trial));
            } else {
                records.quantum.push_back(drive_quantum_trial(bus, config, trial));
            }
        } catch (const InvariantViolation&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error("trial " + std::to_string(trial) +
                                     " aborted: " + e.what());
        }
    }
    for (Party p : {Party::Alice, Party::Bob, Party::Charlie}) {
        bus.send(p, make_simple_control(control::kBye, config.session_id));
        Message ack = bus.recv_from(p);
        if (!is_control(ack, control::kByeAck)) protocol_violation("driver", "ByeAck", ack);
    }
    return records;
}

SessionRecords run_hub_session(const SessionConfig& config) {
    InProcessHub hub;
    HubBus alice_bus(hub, Party::Alice);
    HubBus bob_bus(hub, Party::Bob);
    HubBus charlie_bus(hub, Party::Charlie);
    HubBus driver_bus(hub, Party::Driver);

    std::exception_ptr party_error;
    std::mutex error_mutex;
    auto guard = [&](auto&& fn) {
        return [&, fn] {
            try {
                fn();
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!party_error) party_error = std::current_exception();
                hub.close();
            }
        };
    };

    std::thread alice(guard([&] { alice_engine(alice_bus, config); }));
    std::thread bob(guard([&] { bob_engine(bob_bus, config); }));
    std::thread charlie(guard([&] { charlie_engine(charlie_bus, config); }));

    SessionRecords records;
    std::exception_ptr driver_error;
    try {
        records = drive_session(driver_bus, config);
    } catch (...) {
        driver_error = std::current_exception();
        hub.close();
    }
    alice.join();
    bob.join();
    charlie.join();
    if (driver_error) std::rethrow_exception(driver_error);
    if (party_error) std::rethrow_exception(party_error);
    return records;
}

namespace {

std::unique_ptr<TcpLink> dial_party(const std::string& endpoint, std::uint64_t session,
                                    Party self_role) {
    auto [host, port] = parse_endpoint(endpoint);
    auto link = std::make_unique<TcpLink>(TcpSocket::connect_with_retry(host, port, 10000));
    link->send(make_hello(self_role, session));
    Message reply = link->recv();
    if (is_control(reply, control::kError)) {
        throw std::runtime_error("handshake rejected with error code " +
                                 std::to_string(reply.payload.size() > 1 ? reply.payload[1] : 0));
    }
    if (!is_control(reply, control::kWelcome)) {
        throw std::runtime_error("unexpected handshake reply");
    }
    return link;
}

}  // namespace

SessionRecords run_tcp_session(const SessionConfig& config) {
    SocketBus bus;
    bus.attach(Party::Alice, dial_party(config.alice_endpoint, config.session_id, Party::Driver));
    bus.attach(Party::Bob, dial_party(config.bob_endpoint, config.session_id, Party::Driver));
    bus.attach(Party::Charlie,
               dial_party(config.charlie_endpoint, config.session_id, Party::Driver));
    Message session_msg =
        Message::control(encode_session_config(config), config.session_id, 0);
    bus.send(Party::Alice, session_msg);
    bus.send(Party::Bob, session_msg);
    bus.send(Party::Charlie, session_msg);
    SessionRecords records = drive_session(bus, config);
    bus.close_all();
    return records;
}

int serve_party(Party role, TcpListener& listener, std::ostream& diagnostics) {
    if (role != Party::Alice && role != Party::Bob && role != Party::Charlie) {
        diagnostics << "serve: role must be alice, bob, or charlie\n";
        return 2;
    }
    // Inbound peers by role: the driver dials everyone; Charlie hands Alice
    // the prepared box; Alice sends Bob the classical bits.
    std::optional<Party> second_inbound;
    if (role == Party::Alice) second_inbound = Party::Charlie;
    if (role == Party::Bob) second_inbound = Party::Alice;

    SocketBus bus;
    std::optional<SessionConfig> config;
    try {
        while (!config.has_value() ||
               (second_inbound.has_value() && !bus.attached(*second_inbound))) {
            auto link = std::make_unique<TcpLink>(listener.accept_one());
            Message hello;
            try {
                hello = link->recv();
            } catch (const FrameDecodeError& e) {
                std::uint8_t code = e.offset() == kOffsetVersion
                                        ? wire_error::kVersionMismatch
                                        : wire_error::kProtocolViolation;
                link->send(make_wire_error(code, 0));
                diagnostics << "rejected connection: " << e.what() << "\n";
                continue;
            } catch (const ChannelClosed&) {
                continue;  // probe connection, nothing sent
            }
            if (!is_control(hello, control::kHello) || hello.payload.size() != 2) {
                link->send(make_wire_error(wire_error::kProtocolViolation, hello.session_id));
                diagnostics << "rejected connection: bad hello\n";
                continue;
            }
            auto peer = static_cast<Party>(hello.payload[1]);
            bool expected = peer == Party::Driver ||
                            (second_inbound.has_value() && peer == *second_inbound);
            if (!expected || bus.attached(peer)) {
                link->send(make_wire_error(wire_error::kRoleConflict, hello.session_id));
                diagnostics << "rejected connection: role " << party_name(peer)
                            << (bus.attached(peer) ? " already registered" : " not expected")
                            << "\n";
                continue;
            }
            link->send(make_simple_control(control::kWelcome, hello.session_id));
            bus.attach(peer, std::move(link));

            if (peer == Party::Driver) {
                Message session_msg = bus.recv_from(Party::Driver);
                if (!is_control(session_msg, control::kSession)) {
                    diagnostics << "expected session config from driver\n";
                    return 1;
                }
                config = decode_session_config(session_msg.payload);
                // Outbound links dialed as soon as the endpoints are known.
                if (role == Party::Charlie) {
                    bus.attach(Party::Alice, dial_party(config->alice_endpoint,
                                                        config->session_id, Party::Charlie));
                } else if (role == Party::Alice) {
                    bus.attach(Party::Bob, dial_party(config->bob_endpoint, config->session_id,
                                                      Party::Alice));
                }
            }
        }

        switch (role) {
            case Party::Alice: alice_engine(bus, *config); break;
            case Party::Bob: bob_engine(bus, *config); break;
            case Party::Charlie: charlie_engine(bus, *config); break;
            default: return 2;
        }
        bus.close_all();
        return 0;
    } catch (const std::exception& e) {
        diagnostics << "serve error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace ctel

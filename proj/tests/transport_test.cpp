#include <doctest.h>

#include <stdexcept>

#include <sstream>
#include <thread>
#include <vector>

#include "ctel/run_log.hpp"
#include "ctel/session.hpp"
#include "ctel/tcp.hpp"

using namespace ctel;

TEST_CASE("golden bytes: ClassicalBit(same) frame") {
    // magic CTEL | version 01 | type 01 | session | trial | len 0001 | payload 00
    Message message = Message::classical_bit(false, 0x1122334455667788ULL, 7);
    const std::vector<std::uint8_t> expected{
        'C',  'T',  'E',  'L',  0x01, 0x01, 0x11, 0x22, 0x33, 0x44, 0x55,
        0x66, 0x77, 0x88, 0x00, 0x00, 0x00, 0x07, 0x00, 0x01, 0x00};
    CHECK(encode_frame(message) == expected);
    CHECK(decode_frame(expected) == message);
}

TEST_CASE("golden bytes: TwoBits and BoxTransfer frames") {
    Message bits = Message::two_bits(0x02, 0xAA, 3);
    const std::vector<std::uint8_t> bits_expected{
        'C',  'T',  'E',  'L',  0x01, 0x02, 0x00, 0x00, 0x00, 0x00, 0x00,
        0x00, 0x00, 0xAA, 0x00, 0x00, 0x00, 0x03, 0x00, 0x01, 0x02};
    CHECK(encode_frame(bits) == bits_expected);
    CHECK(decode_frame(bits_expected) == bits);

    Message box = Message::box_transfer(0x0102030405060708ULL, true, 1, 2);
    const std::vector<std::uint8_t> box_expected{
        'C',  'T',  'E',  'L',  0x01, 0x03, 0x00, 0x00, 0x00, 0x00,
        0x00, 0x00, 0x00, 0x01, 0x00, 0x00, 0x00, 0x02, 0x00, 0x09,
        0x01, 0x02, 0x03, 0x04, 0x05, 0x06, 0x07, 0x08, 0x01};
    CHECK(encode_frame(box) == box_expected);
    CHECK(decode_frame(box_expected) == box);
    CHECK(decode_frame(box_expected).box_id() == 0x0102030405060708ULL);
    CHECK(decode_frame(box_expected).box_sealed_token());
}

TEST_CASE("corrupt frames name the offending offset") {
    std::vector<std::uint8_t> good = encode_frame(Message::classical_bit(true, 9, 9));

    auto offset_of_failure = [](std::vector<std::uint8_t> frame) -> std::ptrdiff_t {
        try {
            decode_frame(frame);
            return -1;
        } catch (const FrameDecodeError& e) {
            return static_cast<std::ptrdiff_t>(e.offset());
        }
    };

    std::vector<std::uint8_t> bad_magic = good;
    bad_magic[2] = 'X';
    CHECK(offset_of_failure(bad_magic) == 2);

    std::vector<std::uint8_t> bad_version = good;
    bad_version[kOffsetVersion] = 0x09;
    CHECK(offset_of_failure(bad_version) == static_cast<std::ptrdiff_t>(kOffsetVersion));

    std::vector<std::uint8_t> bad_type = good;
    bad_type[kOffsetType] = 0x77;
    CHECK(offset_of_failure(bad_type) == static_cast<std::ptrdiff_t>(kOffsetType));

    std::vector<std::uint8_t> truncated(good.begin(), good.begin() + 12);
    CHECK(offset_of_failure(truncated) == 12);

    std::vector<std::uint8_t> dirty_bit = good;
    dirty_bit[kOffsetPayload] = 0xFF;  // unused bits must be zero
    CHECK(offset_of_failure(dirty_bit) == static_cast<std::ptrdiff_t>(kOffsetPayload));

    CHECK_THROWS_AS(Message::two_bits(0x04, 0, 0), std::invalid_argument);
}

TEST_CASE("frame round-trip property over generated messages") {
    SubstreamRng rng(404);
    for (int i = 0; i < 10000; ++i) {
        Message m;
        switch (rng.next_below(4)) {
            case 0: m = Message::classical_bit(rng.next_bit(), rng.next_u64(), 1); break;
            case 1:
                m = Message::two_bits(static_cast<std::uint8_t>(rng.next_below(4)),
                                      rng.next_u64(), 2);
                break;
            case 2: m = Message::box_transfer(rng.next_u64(), rng.next_bit(), 3, 4); break;
            default: {
                std::vector<std::uint8_t> body(1 + rng.next_below(48));
                for (auto& byte : body) byte = static_cast<std::uint8_t>(rng.next_below(256));
                m = Message::control(std::move(body), rng.next_u64(), 5);
            }
        }
        CHECK(decode_frame(encode_frame(m)) == m);
    }
}

TEST_CASE("local link is FIFO and counts bits") {
    LocalLink link;
    link.send(Message::classical_bit(false, 1, 0));
    link.send(Message::classical_bit(true, 1, 1));
    link.send(Message::two_bits(3, 1, 2));
    CHECK(link.recv().trial_index == 0);
    CHECK(link.recv().trial_index == 1);
    CHECK(link.recv().trial_index == 2);
    CHECK(link.stats().messages == 3);
    CHECK(link.stats().semantic_bits == 4);  // 1 + 1 + 2
    CHECK(link.stats().frame_bytes == 3 * (kFrameHeaderSize + 1));

    link.close();
    CHECK_THROWS_AS(link.recv(), ChannelClosed);
    CHECK_THROWS_AS(link.send(Message::classical_bit(false, 1, 3)), ChannelClosed);
}

TEST_CASE("hub delivers per ordered pair") {
    InProcessHub hub;
    hub.send(Party::Alice, Party::Bob, Message::classical_bit(true, 2, 0));
    hub.send(Party::Driver, Party::Bob, Message::box_transfer(5, true, 2, 0));
    // Bob reads each sender's queue independently.
    CHECK(hub.recv(Party::Bob, Party::Driver).type == MessageType::BoxTransfer);
    CHECK(hub.recv(Party::Bob, Party::Alice).type == MessageType::ClassicalBit);
    CHECK(hub.stats(Party::Alice, Party::Bob).semantic_bits == 1);
}

TEST_CASE("tcp link carries identical message values") {
    TcpListener listener(0);
    std::vector<Message> sent{
        Message::classical_bit(true, 11, 0),
        Message::two_bits(2, 11, 1),
        Message::box_transfer(99, true, 11, 2),
        Message::control({control::kHello, 0x01}, 11, 3),
    };

    std::thread server([&] {
        TcpLink link(listener.accept_one());
        for (std::size_t i = 0; i < sent.size(); ++i) {
            link.send(link.recv());  // echo
        }
    });

    TcpLink client(TcpSocket::connect_to("127.0.0.1", listener.port()));
    std::vector<Message> local_delivery;
    LocalLink local;
    for (const Message& m : sent) {
        client.send(m);
        local.send(m);
        Message echoed = client.recv();
        Message local_copy = local.recv();
        CHECK(echoed == m);
        CHECK(local_copy == echoed);  // both transports deliver equal values
    }
    server.join();
    CHECK(client.stats().semantic_bits == local.stats().semantic_bits);
}

TEST_CASE("hub session matches the in-process runner") {
    SessionConfig session;
    session.protocol = ProtocolKind::Classical;
    session.x = 0.3;
    session.seed = 42;
    session.trials = 300;
    session.session_id = 42;
    SessionRecords records = run_hub_session(session);
    REQUIRE(records.classical.size() == 300);
    ClassicalTrialConfig config{session.x, session.mode, session.seed, session.session_id};
    for (std::uint32_t t = 0; t < session.trials; ++t) {
        TrialRecord reference = run_trial(config, t);
        CHECK(records.classical[t] == reference);
        CHECK(trial_record_line(records.classical[t]) == trial_record_line(reference));
    }
}

TEST_CASE("hub session quantum records match the in-process runner") {
    SessionConfig session;
    session.protocol = ProtocolKind::Quantum;
    session.seed = 7;
    session.trials = 100;
    session.session_id = 7;
    SessionRecords records = run_hub_session(session);
    REQUIRE(records.quantum.size() == 100);
    QuantumTrialConfig config{std::nullopt, session.seed, session.session_id};
    for (std::uint32_t t = 0; t < session.trials; ++t) {
        CHECK(quantum_record_line(records.quantum[t]) ==
              quantum_record_line(run_quantum_trial(config, t)));
    }
}

TEST_CASE("served parties over real sockets, with handshake rejections") {
    TcpListener alice_listener(0), bob_listener(0), charlie_listener(0);
    std::ostringstream alice_diag, bob_diag, charlie_diag;
    int alice_rc = -1, bob_rc = -1, charlie_rc = -1;
    std::thread alice([&] { alice_rc = serve_party(Party::Alice, alice_listener, alice_diag); });
    std::thread bob([&] { bob_rc = serve_party(Party::Bob, bob_listener, bob_diag); });
    std::thread charlie(
        [&] { charlie_rc = serve_party(Party::Charlie, charlie_listener, charlie_diag); });

    // A peer speaking the wrong frame version is rejected with code 0x01.
    {
        std::vector<std::uint8_t> frame = encode_frame(make_hello(Party::Driver, 1));
        frame[kOffsetVersion] = 0x02;
        TcpSocket scratch = TcpSocket::connect_to("127.0.0.1", alice_listener.port());
        scratch.send_all(frame);
        std::vector<std::uint8_t> reply(kFrameHeaderSize);
        REQUIRE(scratch.recv_exact(reply));
        std::size_t payload_len = payload_length_from_header(reply);
        reply.resize(kFrameHeaderSize + payload_len);
        REQUIRE(scratch.recv_exact(std::span(reply).subspan(kFrameHeaderSize)));
        Message rejection = decode_frame(reply);
        CHECK(rejection.control_code() == control::kError);
        CHECK(rejection.payload[1] == wire_error::kVersionMismatch);
    }

    // An unexpected role is rejected with a role conflict.
    {
        TcpLink probe(TcpSocket::connect_to("127.0.0.1", alice_listener.port()));
        probe.send(make_hello(Party::Bob, 1));  // bob never dials alice
        Message rejection = probe.recv();
        CHECK(rejection.control_code() == control::kError);
        CHECK(rejection.payload[1] == wire_error::kRoleConflict);
    }

    SessionConfig session;
    session.protocol = ProtocolKind::Classical;
    session.x = 0.25;
    session.seed = 5;
    session.trials = 50;
    session.session_id = 5;
    session.alice_endpoint = "127.0.0.1:" + std::to_string(alice_listener.port());
    session.bob_endpoint = "127.0.0.1:" + std::to_string(bob_listener.port());
    session.charlie_endpoint = "127.0.0.1:" + std::to_string(charlie_listener.port());

    SessionRecords records = run_tcp_session(session);
    alice.join();
    bob.join();
    charlie.join();
    CHECK(alice_rc == 0);
    CHECK(bob_rc == 0);
    CHECK(charlie_rc == 0);

    REQUIRE(records.classical.size() == 50);
    ClassicalTrialConfig config{session.x, session.mode, session.seed, session.session_id};
    for (std::uint32_t t = 0; t < session.trials; ++t) {
        CHECK(records.classical[t] == run_trial(config, t));
    }
}

TEST_CASE("connection loss mid-frame is distinguished from clean EOF") {
    TcpListener listener(0);
    std::thread server([&] {
        TcpSocket conn = listener.accept_one();
        std::vector<std::uint8_t> frame = encode_frame(Message::classical_bit(false, 1, 0));
        // half a frame, then drop the connection
        conn.send_all(std::span(frame).first(7));
    });
    TcpLink client(TcpSocket::connect_to("127.0.0.1", listener.port()));
    CHECK_THROWS_AS(client.recv(), std::runtime_error);
    server.join();

    TcpListener listener2(0);
    std::thread quiet_server([&] { TcpSocket conn = listener2.accept_one(); });
    TcpLink client2(TcpSocket::connect_to("127.0.0.1", listener2.port()));
    CHECK_THROWS_AS(client2.recv(), ChannelClosed);  // EOF at a frame boundary
    quiet_server.join();
}

TEST_CASE("a misbehaving party aborts the trial with a diagnosable cause") {
    InProcessHub hub;
    SessionConfig config;
    config.trials = 1;
    config.session_id = 6;

    HubBus bob_bus(hub, Party::Bob);
    HubBus charlie_bus(hub, Party::Charlie);
    HubBus alice_bus(hub, Party::Alice);
    HubBus driver_bus(hub, Party::Driver);

    auto swallow = [&](auto&& fn) {
        return [&hub, fn] {
            try {
                fn();
            } catch (const std::exception&) {
                hub.close();
            }
        };
    };
    std::thread bob(swallow([&] { bob_engine(bob_bus, config); }));
    std::thread charlie(swallow([&] { charlie_engine(charlie_bus, config); }));
    std::thread rogue_alice(swallow([&] {
        alice_bus.recv_from(Party::Driver);    // pair box
        alice_bus.recv_from(Party::Charlie);   // charlie's box
        // sends TrialDone where a MeasureReq belongs
        alice_bus.send(Party::Driver, make_trial_done(0, 1, config.session_id, 0));
        alice_bus.recv_from(Party::Driver);    // blocks until the hub closes
    }));

    std::string error;
    try {
        drive_session(driver_bus, config);
    } catch (const std::runtime_error& e) {
        error = e.what();
    }
    hub.close();
    bob.join();
    charlie.join();
    rogue_alice.join();
    CHECK(error.find("trial 0 aborted") != std::string::npos);
    CHECK(error.find("MeasureReq") != std::string::npos);
}

TEST_CASE("duplicate role registration is rejected") {
    TcpListener listener(0);
    std::ostringstream diag;
    int rc = -1;
    std::thread bob([&] { rc = serve_party(Party::Bob, listener, diag); });

    // First alice is welcomed; a second alice conflicts.
    TcpLink first(TcpSocket::connect_to("127.0.0.1", listener.port()));
    first.send(make_hello(Party::Alice, 1));
    CHECK(first.recv().control_code() == control::kWelcome);

    TcpLink second(TcpSocket::connect_to("127.0.0.1", listener.port()));
    second.send(make_hello(Party::Alice, 1));
    Message rejection = second.recv();
    CHECK(rejection.control_code() == control::kError);
    CHECK(rejection.payload[1] == wire_error::kRoleConflict);

    // Wind the session down: a driver with zero trials says goodbye at once.
    TcpLink driver(TcpSocket::connect_to("127.0.0.1", listener.port()));
    driver.send(make_hello(Party::Driver, 1));
    CHECK(driver.recv().control_code() == control::kWelcome);
    SessionConfig config;
    config.trials = 0;
    config.session_id = 1;
    driver.send(Message::control(encode_session_config(config), 1, 0));
    driver.send(make_simple_control(control::kBye, 1));
    CHECK(driver.recv().control_code() == control::kByeAck);

    bob.join();
    CHECK(rc == 0);
}

TEST_CASE("session config survives its wire encoding") {
    SessionConfig config;
    config.protocol = ProtocolKind::Quantum;
    config.x = 0.125;
    config.mode = PreparationMode::Ensemble;
    config.random_psi = false;
    config.psi = PureState::normalized(Amplitude{0.6, 0.1}, Amplitude{0.79, -0.1});
    config.seed = 0xDEADBEEF;
    config.trials = 12345;
    config.session_id = 77;
    config.alice_endpoint = "10.0.0.1:7401";
    config.bob_endpoint = "10.0.0.2:7402";
    config.charlie_endpoint = "10.0.0.3:7403";

    SessionConfig decoded = decode_session_config(encode_session_config(config));
    CHECK(decoded.protocol == config.protocol);
    CHECK(decoded.x == config.x);
    CHECK(decoded.mode == config.mode);
    CHECK(decoded.random_psi == config.random_psi);
    CHECK(decoded.psi.a0 == config.psi.a0);
    CHECK(decoded.psi.a1 == config.psi.a1);
    CHECK(decoded.seed == config.seed);
    CHECK(decoded.trials == config.trials);
    CHECK(decoded.session_id == config.session_id);
    CHECK(decoded.alice_endpoint == config.alice_endpoint);
    CHECK(decoded.bob_endpoint == config.bob_endpoint);
    CHECK(decoded.charlie_endpoint == config.charlie_endpoint);
}

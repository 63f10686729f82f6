#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctel {

enum class MessageType : std::uint8_t {
    ClassicalBit = 0x01,  // 1-byte payload, value 0x00 (same) or 0x01 (different)
    TwoBits = 0x02,       // 1-byte payload, value 0..3 (bit0: X needed, bit1: Z needed)
    BoxTransfer = 0x03,   // 8-byte box id + 1-byte sealed token; never the hidden face
    Control = 0x04,       // handshake / session / teardown, code-prefixed payload
};

struct Message {
    MessageType type = MessageType::Control;
    std::uint64_t session_id = 0;
    std::uint32_t trial_index = 0;
    std::vector<std::uint8_t> payload;

    bool operator==(const Message&) const = default;

    static Message classical_bit(bool bit, std::uint64_t session, std::uint32_t trial);
    static Message two_bits(std::uint8_t bits, std::uint64_t session, std::uint32_t trial);
    static Message box_transfer(std::uint64_t box_id, bool sealed_token, std::uint64_t session,
                                std::uint32_t trial);
    static Message control(std::vector<std::uint8_t> body, std::uint64_t session,
                           std::uint32_t trial);

    // Semantic information content: 1 for ClassicalBit, 2 for TwoBits, 0 otherwise.
    std::uint32_t semantic_bits() const;

    bool bit_value() const;           // ClassicalBit payload
    std::uint8_t two_bit_value() const;  // TwoBits payload
    std::uint64_t box_id() const;     // BoxTransfer payload
    bool box_sealed_token() const;    // BoxTransfer payload
    std::uint8_t control_code() const;  // first Control payload byte
};

// Wire frame: magic "CTEL", version, msg_type, session_id (u64 BE),
// trial_index (u32 BE), payload_len (u16 BE), payload.
inline constexpr std::array<std::uint8_t, 4> kWireMagic{'C', 'T', 'E', 'L'};
inline constexpr std::uint8_t kWireVersion = 0x01;
inline constexpr std::size_t kFrameHeaderSize = 4 + 1 + 1 + 8 + 4 + 2;

// Byte offsets within a frame, used by decode errors and tests.
inline constexpr std::size_t kOffsetMagic = 0;
inline constexpr std::size_t kOffsetVersion = 4;
inline constexpr std::size_t kOffsetType = 5;
inline constexpr std::size_t kOffsetSession = 6;
inline constexpr std::size_t kOffsetTrial = 14;
inline constexpr std::size_t kOffsetPayloadLen = 18;
inline constexpr std::size_t kOffsetPayload = 20;

class FrameDecodeError : public std::runtime_error {
public:
    FrameDecodeError(std::size_t offset, const std::string& what);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

std::vector<std::uint8_t> encode_frame(const Message& m);

// Decodes one complete frame; throws FrameDecodeError naming the byte offset
// of the first problem (bad magic, bad version, short read, bad payload).
Message decode_frame(std::span<const std::uint8_t> bytes);

// Payload length declared in a complete header.
std::size_t payload_length_from_header(std::span<const std::uint8_t> header);

// Control payload codes.
namespace control {
inline constexpr std::uint8_t kHello = 0x01;       // + role byte
inline constexpr std::uint8_t kWelcome = 0x02;
inline constexpr std::uint8_t kSession = 0x03;     // + session config blob
inline constexpr std::uint8_t kTrialStart = 0x04;
inline constexpr std::uint8_t kPrepareReq = 0x05;
inline constexpr std::uint8_t kMeasureReq = 0x06;  // + two box ids (u64 BE each)
inline constexpr std::uint8_t kMeasureRes = 0x07;  // + outcome byte
inline constexpr std::uint8_t kCorrectReq = 0x08;  // + box id (u64 BE) + operation byte
inline constexpr std::uint8_t kTrialDone = 0x09;   // + correction byte + bits byte
inline constexpr std::uint8_t kBye = 0x0A;
inline constexpr std::uint8_t kByeAck = 0x0B;
inline constexpr std::uint8_t kError = 0xFF;       // + error code byte
}  // namespace control

namespace wire_error {
inline constexpr std::uint8_t kVersionMismatch = 0x01;
inline constexpr std::uint8_t kRoleConflict = 0x02;
inline constexpr std::uint8_t kProtocolViolation = 0x03;
}  // namespace wire_error

void put_u16_be(std::vector<std::uint8_t>& out, std::uint16_t v);
void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint16_t get_u16_be(std::span<const std::uint8_t> in, std::size_t offset);
std::uint32_t get_u32_be(std::span<const std::uint8_t> in, std::size_t offset);
std::uint64_t get_u64_be(std::span<const std::uint8_t> in, std::size_t offset);

}  // namespace ctel

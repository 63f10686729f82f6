#include "ctel/message.hpp"

#include <utility>

namespace ctel {

void put_u16_be(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

void put_u64_be(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

std::uint16_t get_u16_be(std::span<const std::uint8_t> in, std::size_t offset) {
    return static_cast<std::uint16_t>((in[offset] << 8) | in[offset + 1]);
}

std::uint32_t get_u32_be(std::span<const std::uint8_t> in, std::size_t offset) {
    std::uint32_t v = 0;
    for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | in[offset + i];
    return v;
}

std::uint64_t get_u64_be(std::span<const std::uint8_t> in, std::size_t offset) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 8; ++i) v = (v << 8) | in[offset + i];
    return v;
}

Message Message::classical_bit(bool bit, std::uint64_t session, std::uint32_t trial) {
    return Message{MessageType::ClassicalBit, session, trial,
                   {static_cast<std::uint8_t>(bit ? 0x01 : 0x00)}};
}

Message Message::two_bits(std::uint8_t bits, std::uint64_t session, std::uint32_t trial) {
    if (bits > 0x03) throw std::invalid_argument("two_bits: value exceeds two bits");
    return Message{MessageType::TwoBits, session, trial, {bits}};
}

Message Message::box_transfer(std::uint64_t box_id, bool sealed_token, std::uint64_t session,
                              std::uint32_t trial) {
    std::vector<std::uint8_t> payload;
    payload.reserve(9);
    put_u64_be(payload, box_id);
    payload.push_back(sealed_token ? 0x01 : 0x00);
    return Message{MessageType::BoxTransfer, session, trial, std::move(payload)};
}

Message Message::control(std::vector<std::uint8_t> body, std::uint64_t session,
                         std::uint32_t trial) {
    if (body.empty()) throw std::invalid_argument("control: empty payload");
    return Message{MessageType::Control, session, trial, std::move(body)};
}

std::uint32_t Message::semantic_bits() const {
    switch (type) {
        case MessageType::ClassicalBit: return 1;
        case MessageType::TwoBits: return 2;
        default: return 0;
    }
}

bool Message::bit_value() const {
    if (type != MessageType::ClassicalBit || payload.size() != 1) {
        throw std::logic_error("bit_value: not a ClassicalBit message");
    }
    return payload[0] != 0;
}

std::uint8_t Message::two_bit_value() const {
    if (type != MessageType::TwoBits || payload.size() != 1) {
        throw std::logic_error("two_bit_value: not a TwoBits message");
    }
    return payload[0];
}

std::uint64_t Message::box_id() const {
    if (type != MessageType::BoxTransfer || payload.size() != 9) {
        throw std::logic_error("box_id: not a BoxTransfer message");
    }
    return get_u64_be(payload, 0);
}

bool Message::box_sealed_token() const {
    if (type != MessageType::BoxTransfer || payload.size() != 9) {
        throw std::logic_error("box_sealed_token: not a BoxTransfer message");
    }
    return payload[8] != 0;
}

std::uint8_t Message::control_code() const {
    if (type != MessageType::Control || payload.empty()) {
        throw std::logic_error("control_code: not a Control message");
    }
    return payload[0];
}

FrameDecodeError::FrameDecodeError(std::size_t offset, const std::string& what)
    : std::runtime_error("frame decode error at byte " + std::to_string(offset) + ": " + what),
      offset_(offset) {}

std::vector<std::uint8_t> encode_frame(const Message& m) {
    if (m.payload.size() > 0xFFFF) throw std::invalid_argument("encode_frame: payload too large");
    std::vector<std::uint8_t> out;
    out.reserve(kFrameHeaderSize + m.payload.size());
    for (std::uint8_t byte : kWireMagic) out.push_back(byte);
    out.push_back(kWireVersion);
    out.push_back(static_cast<std::uint8_t>(m.type));
    put_u64_be(out, m.session_id);
    put_u32_be(out, m.trial_index);
    put_u16_be(out, static_cast<std::uint16_t>(m.payload.size()));
    for (std::uint8_t byte : m.payload) out.push_back(byte);
    return out;
}

std::size_t payload_length_from_header(std::span<const std::uint8_t> header) {
    if (header.size() < kFrameHeaderSize) {
        throw FrameDecodeError(header.size(), "short header");
    }
    return get_u16_be(header, kOffsetPayloadLen);
}

namespace {

void validate_payload(const Message& m, std::size_t base_offset) {
    switch (m.type) {
        case MessageType::ClassicalBit:
            if (m.payload.size() != 1) {
                throw FrameDecodeError(base_offset, "ClassicalBit payload must be one byte");
            }
            if (m.payload[0] > 0x01) {
                throw FrameDecodeError(base_offset, "ClassicalBit unused bits must be zero");
            }
            break;
        case MessageType::TwoBits:
            if (m.payload.size() != 1) {
                throw FrameDecodeError(base_offset, "TwoBits payload must be one byte");
            }
            if (m.payload[0] > 0x03) {
                throw FrameDecodeError(base_offset, "TwoBits unused bits must be zero");
            }
            break;
        case MessageType::BoxTransfer:
            if (m.payload.size() != 9) {
                throw FrameDecodeError(base_offset, "BoxTransfer payload must be nine bytes");
            }
            break;
        case MessageType::Control:
            if (m.payload.empty()) {
                throw FrameDecodeError(base_offset, "Control payload must carry a code byte");
            }
            break;
    }
}

}  // namespace

Message decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameHeaderSize) {
        throw FrameDecodeError(bytes.size(), "short read: incomplete header");
    }
    for (std::size_t i = 0; i < kWireMagic.size(); ++i) {
        if (bytes[kOffsetMagic + i] != kWireMagic[i]) {
            throw FrameDecodeError(kOffsetMagic + i, "bad magic");
        }
    }
    if (bytes[kOffsetVersion] != kWireVersion) {
        throw FrameDecodeError(kOffsetVersion, "unsupported version");
    }
    const std::uint8_t raw_type = bytes[kOffsetType];
    if (raw_type < 0x01 || raw_type > 0x04) {
        throw FrameDecodeError(kOffsetType, "unknown message type");
    }
    Message m;
    m.type = static_cast<MessageType>(raw_type);
    m.session_id = get_u64_be(bytes, kOffsetSession);
    m.trial_index = get_u32_be(bytes, kOffsetTrial);
    const std::size_t payload_len = get_u16_be(bytes, kOffsetPayloadLen);
    if (bytes.size() < kFrameHeaderSize + payload_len) {
        throw FrameDecodeError(bytes.size(), "short read: truncated payload");
    }
    m.payload.assign(bytes.begin() + kOffsetPayload,
                     bytes.begin() + static_cast<std::ptrdiff_t>(kOffsetPayload + payload_len));
    validate_payload(m, kOffsetPayload);
    return m;
}

}  // namespace ctel

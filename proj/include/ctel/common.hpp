#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace ctel {

// Party labels double as random-substream identifiers, so every draw made
// during a trial is attributable to whoever physically makes it. The numeric
// values appear on the wire (handshake role bytes) and in substream
// derivation; do not reorder.
enum class Party : std::uint8_t {
    Driver = 0,
    Alice = 1,
    Bob = 2,
    Charlie = 3,
    Device = 4,  // trusted machine that rotates and opens boxes
    Source = 5,  // preparer of the shared pair / EPR pair
};

const char* party_name(Party p);

// Logical protocol events, in the order a trial produces them. Ticks are
// logical, not wall clock; the same canonical sequence is recorded whether a
// trial ran in one process or across three.
enum class LogicalEvent : std::uint8_t {
    Prepare = 0,
    Distribute = 1,
    Measure = 2,
    Send = 3,
    Correct = 4,
    Done = 5,
};

inline constexpr std::size_t kTrialEventCount = 6;

using EventOrder = std::array<LogicalEvent, kTrialEventCount>;

const char* event_name(LogicalEvent e);

constexpr EventOrder canonical_event_order() {
    return {LogicalEvent::Prepare, LogicalEvent::Distribute, LogicalEvent::Measure,
            LogicalEvent::Send,    LogicalEvent::Correct,    LogicalEvent::Done};
}

}  // namespace ctel

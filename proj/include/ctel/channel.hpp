#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include "ctel/message.hpp"
#include "ctel/rng.hpp"

namespace ctel {

class ChannelClosed : public std::runtime_error {
public:
    explicit ChannelClosed(const std::string& what) : std::runtime_error(what) {}
};

struct LinkStats {
    std::uint64_t messages = 0;
    std::uint64_t semantic_bits = 0;  // payload information bits (1 or 2 per message)
    std::uint64_t frame_bytes = 0;    // what the wire encoding would cost, framing included
};

// A directed, reliable, FIFO message link.
class Link {
public:
    virtual ~Link() = default;
    virtual void send(const Message& m) = 0;
    virtual Message recv() = 0;  // blocks; throws ChannelClosed when drained and closed
    virtual void close() = 0;

    const LinkStats& stats() const { return stats_; }

protected:
    void note_sent(const Message& m) {
        stats_.messages += 1;
        stats_.semantic_bits += m.semantic_bits();
        stats_.frame_bytes += kFrameHeaderSize + m.payload.size();
    }

    LinkStats stats_;
};

// In-memory link; thread-safe, single FIFO.
class LocalLink : public Link {
public:
    void send(const Message& m) override;
    Message recv() override;
    void close() override;

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<Message> queue_;
    bool closed_ = false;
};

// In-process message hub: one FIFO per (sender, receiver) pair. Lets the
// three parties plus the driver run on threads with the same addressing the
// TCP transport provides.
class InProcessHub {
public:
    void send(Party from, Party to, const Message& m);
    Message recv(Party to, Party from);  // blocks
    void close();

    LinkStats stats(Party from, Party to) const;

private:
    using Key = std::pair<std::uint8_t, std::uint8_t>;
    struct Pipe {
        std::deque<Message> queue;
        LinkStats stats;
    };

    Pipe& pipe_locked(Party from, Party to);

    mutable std::mutex mutex_;
    std::condition_variable cv_;
    std::map<Key, Pipe> pipes_;
    bool closed_ = false;
};

// A party's view of its peers: addressed send, per-peer blocking receive.
// Implemented over the in-process hub and over TCP sockets; protocol engines
// are written against this interface only.
class PartyBus {
public:
    virtual ~PartyBus() = default;
    virtual void send(Party to, const Message& m) = 0;
    virtual Message recv_from(Party from) = 0;
    virtual LinkStats stats_to(Party to) const = 0;
};

class HubBus : public PartyBus {
public:
    HubBus(InProcessHub& hub, Party self) : hub_(hub), self_(self) {}

    void send(Party to, const Message& m) override { hub_.send(self_, to, m); }
    Message recv_from(Party from) override { return hub_.recv(self_, from); }
    LinkStats stats_to(Party to) const override { return hub_.stats(self_, to); }

private:
    InProcessHub& hub_;
    Party self_;
};

}  // namespace ctel

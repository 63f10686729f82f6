#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "ctel/channel.hpp"

namespace ctel {

// Thin RAII wrapper over a connected stream socket.
class TcpSocket {
public:
    TcpSocket() = default;
    explicit TcpSocket(int fd) : fd_(fd) {}
    ~TcpSocket();

    TcpSocket(TcpSocket&& other) noexcept;
    TcpSocket& operator=(TcpSocket&& other) noexcept;
    TcpSocket(const TcpSocket&) = delete;
    TcpSocket& operator=(const TcpSocket&) = delete;

    static TcpSocket connect_to(const std::string& host, std::uint16_t port);

    // Retries the dial for up to timeout_ms; for processes racing to start.
    static TcpSocket connect_with_retry(const std::string& host, std::uint16_t port,
                                        int timeout_ms);

    bool valid() const { return fd_ >= 0; }
    void send_all(std::span<const std::uint8_t> bytes);
    // Fills the span completely; returns false on clean EOF at a frame
    // boundary (nothing read), throws on mid-buffer EOF or socket error.
    bool recv_exact(std::span<std::uint8_t> bytes);
    void close();

private:
    int fd_ = -1;
};

class TcpListener {
public:
    // Binds 127.0.0.1 by default; port 0 picks an ephemeral port.
    explicit TcpListener(std::uint16_t port, const std::string& bind_addr = "127.0.0.1");
    ~TcpListener();

    TcpListener(const TcpListener&) = delete;
    TcpListener& operator=(const TcpListener&) = delete;

    std::uint16_t port() const { return port_; }
    TcpSocket accept_one();
    void close();

private:
    int fd_ = -1;
    std::uint16_t port_ = 0;
};

// A duplex frame link over one socket. send() encodes a wire frame; recv()
// reads and decodes one, throwing ChannelClosed on clean EOF and
// FrameDecodeError on malformed input.
class TcpLink : public Link {
public:
    explicit TcpLink(TcpSocket socket) : socket_(std::move(socket)) {}

    void send(const Message& m) override;
    Message recv() override;
    void close() override { socket_.close(); }

private:
    TcpSocket socket_;
};

// "host:port" -> (host, port)
std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint);

// PartyBus over per-peer sockets. Engines only ever do directed blocking
// reads, so one socket per peer needs no reader threads; the kernel buffers
// whatever arrives on the links not currently being read.
class SocketBus : public PartyBus {
public:
    void attach(Party peer, std::unique_ptr<TcpLink> link);
    bool attached(Party peer) const { return links_.contains(peer); }

    void send(Party to, const Message& m) override;
    Message recv_from(Party from) override;
    LinkStats stats_to(Party to) const override;

    void close_all();

private:
    TcpLink& link_for(Party peer);
    std::map<Party, std::unique_ptr<TcpLink>> links_;
};

}  // namespace ctel

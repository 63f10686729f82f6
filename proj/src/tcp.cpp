#include "ctel/tcp.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>
#include <thread>

namespace ctel {

namespace {

[[noreturn]] void throw_errno(const std::string& what) {
    throw std::runtime_error(what + ": " + std::strerror(errno));
}

sockaddr_in make_addr(const std::string& host, std::uint16_t port) {
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        throw std::invalid_argument("bad IPv4 address: " + host);
    }
    return addr;
}

}  // namespace

TcpSocket::~TcpSocket() { close(); }

TcpSocket::TcpSocket(TcpSocket&& other) noexcept : fd_(other.fd_) { other.fd_ = -1; }

TcpSocket& TcpSocket::operator=(TcpSocket&& other) noexcept {
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

TcpSocket TcpSocket::connect_to(const std::string& host, std::uint16_t port) {
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw_errno("socket");
    sockaddr_in addr = make_addr(host, port);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int saved = errno;
        ::close(fd);
        errno = saved;
        throw_errno("connect to " + host + ":" + std::to_string(port));
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return TcpSocket(fd);
}

TcpSocket TcpSocket::connect_with_retry(const std::string& host, std::uint16_t port,
                                        int timeout_ms) {
    auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        try {
            return connect_to(host, port);
        } catch (const std::runtime_error&) {
            if (std::chrono::steady_clock::now() >= deadline) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(25));
        }
    }
}

void TcpSocket::send_all(std::span<const std::uint8_t> bytes) {
    std::size_t sent = 0;
    while (sent < bytes.size()) {
        ssize_t n = ::send(fd_, bytes.data() + sent, bytes.size() - sent, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("send");
        }
        sent += static_cast<std::size_t>(n);
    }
}

bool TcpSocket::recv_exact(std::span<std::uint8_t> bytes) {
    std::size_t got = 0;
    while (got < bytes.size()) {
        ssize_t n = ::recv(fd_, bytes.data() + got, bytes.size() - got, 0);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("recv");
        }
        if (n == 0) {
            if (got == 0) return false;  // clean EOF between frames
            throw std::runtime_error("connection lost mid-frame after " + std::to_string(got) +
                                     " bytes");
        }
        got += static_cast<std::size_t>(n);
    }
    return true;
}

void TcpSocket::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

TcpListener::TcpListener(std::uint16_t port, const std::string& bind_addr) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw_errno("socket");
    int one = 1;
    ::setsockopt(fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr = make_addr(bind_addr, port);
    if (::bind(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        int saved = errno;
        ::close(fd_);
        fd_ = -1;
        errno = saved;
        throw_errno("bind " + bind_addr + ":" + std::to_string(port));
    }
    if (::listen(fd_, 8) != 0) throw_errno("listen");
    socklen_t len = sizeof(addr);
    if (::getsockname(fd_, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw_errno("getsockname");
    }
    port_ = ntohs(addr.sin_port);
}

TcpListener::~TcpListener() { close(); }

TcpSocket TcpListener::accept_one() {
    for (;;) {
        int fd = ::accept(fd_, nullptr, nullptr);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
            return TcpSocket(fd);
        }
        if (errno != EINTR) throw_errno("accept");
    }
}

void TcpListener::close() {
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
}

void TcpLink::send(const Message& m) {
    std::vector<std::uint8_t> frame = encode_frame(m);
    socket_.send_all(frame);
    note_sent(m);
}

Message TcpLink::recv() {
    std::vector<std::uint8_t> frame(kFrameHeaderSize);
    if (!socket_.recv_exact(frame)) throw ChannelClosed("peer closed the connection");
    std::size_t payload_len = payload_length_from_header(frame);
    frame.resize(kFrameHeaderSize + payload_len);
    if (payload_len > 0) {
        if (!socket_.recv_exact(std::span(frame).subspan(kFrameHeaderSize))) {
            throw std::runtime_error("connection lost mid-frame");
        }
    }
    return decode_frame(frame);
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& endpoint) {
    auto colon = endpoint.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= endpoint.size()) {
        throw std::invalid_argument("endpoint must be host:port, got '" + endpoint + "'");
    }
    int port = std::stoi(endpoint.substr(colon + 1));
    if (port < 1 || port > 65535) throw std::invalid_argument("port out of range: " + endpoint);
    return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

void SocketBus::attach(Party peer, std::unique_ptr<TcpLink> link) {
    if (links_.contains(peer)) {
        throw std::logic_error(std::string("peer already attached: ") + party_name(peer));
    }
    links_[peer] = std::move(link);
}

TcpLink& SocketBus::link_for(Party peer) {
    auto it = links_.find(peer);
    if (it == links_.end()) {
        throw std::logic_error(std::string("no link to peer: ") + party_name(peer));
    }
    return *it->second;
}

void SocketBus::send(Party to, const Message& m) { link_for(to).send(m); }

Message SocketBus::recv_from(Party from) { return link_for(from).recv(); }

LinkStats SocketBus::stats_to(Party to) const {
    auto it = links_.find(to);
    return it == links_.end() ? LinkStats{} : it->second->stats();
}

void SocketBus::close_all() {
    for (auto& [party, link] : links_) link->close();
}

}  // namespace ctel

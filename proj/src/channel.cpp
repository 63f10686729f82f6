#include "ctel/channel.hpp"

namespace ctel {

void LocalLink::send(const Message& m) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw ChannelClosed("send on closed channel");
        queue_.push_back(m);
        note_sent(m);
    }
    cv_.notify_one();
}

Message LocalLink::recv() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty()) throw ChannelClosed("recv on closed, drained channel");
    Message m = std::move(queue_.front());
    queue_.pop_front();
    return m;
}

void LocalLink::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

InProcessHub::Pipe& InProcessHub::pipe_locked(Party from, Party to) {
    return pipes_[Key{static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to)}];
}

void InProcessHub::send(Party from, Party to, const Message& m) {
    {
        std::lock_guard lock(mutex_);
        if (closed_) throw ChannelClosed("send on closed hub");
        Pipe& pipe = pipe_locked(from, to);
        pipe.queue.push_back(m);
        pipe.stats.messages += 1;
        pipe.stats.semantic_bits += m.semantic_bits();
        pipe.stats.frame_bytes += kFrameHeaderSize + m.payload.size();
    }
    cv_.notify_all();
}

Message InProcessHub::recv(Party to, Party from) {
    std::unique_lock lock(mutex_);
    Pipe& pipe = pipe_locked(from, to);
    cv_.wait(lock, [&] { return !pipe.queue.empty() || closed_; });
    if (pipe.queue.empty()) throw ChannelClosed("recv on closed hub");
    Message m = std::move(pipe.queue.front());
    pipe.queue.pop_front();
    return m;
}

void InProcessHub::close() {
    {
        std::lock_guard lock(mutex_);
        closed_ = true;
    }
    cv_.notify_all();
}

LinkStats InProcessHub::stats(Party from, Party to) const {
    std::lock_guard lock(mutex_);
    auto it = pipes_.find(Key{static_cast<std::uint8_t>(from), static_cast<std::uint8_t>(to)});
    return it == pipes_.end() ? LinkStats{} : it->second.stats;
}

}  // namespace ctel

#include "btprox/streaming.hpp"

#include <algorithm>
#include <string>

#include "btprox/errors.hpp"

namespace btprox {

BitrateLadder::BitrateLadder(std::vector<std::uint32_t> rungs_bps, double overhead)
    : rungs_(std::move(rungs_bps)), overhead_(overhead) {
    if (rungs_.empty()) {
        throw ConfigError("bitrate ladder must have at least one rung");
    }
    if (!(overhead_ >= 1.0)) {
        throw ConfigError("framing overhead must be >= 1");
    }
    for (std::size_t i = 0; i < rungs_.size(); ++i) {
        if (rungs_[i] == 0) {
            throw ConfigError("bitrate ladder rungs must be positive");
        }
        if (i > 0 && rungs_[i] <= rungs_[i - 1]) {
            throw ConfigError("bitrate ladder rungs must be strictly increasing");
        }
    }
    if (static_cast<double>(rungs_.back()) * overhead_ > kMaxAclBitsPerSecond) {
        throw ConfigError("top rung " + std::to_string(rungs_.back()) +
                          " bps with framing overhead exceeds the 721 kbps ACL ceiling");
    }
}

BitrateLadder BitrateLadder::standard() {
    return BitrateLadder({64'000, 96'000, 128'000, 192'000, 256'000, 320'000});
}

std::optional<std::size_t> BitrateLadder::index_of(std::uint32_t bps) const {
    const auto it = std::lower_bound(rungs_.begin(), rungs_.end(), bps);
    if (it == rungs_.end() || *it != bps) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(it - rungs_.begin());
}

std::string_view to_string(StreamState s) {
    switch (s) {
        case StreamState::Idle: return "IDLE";
        case StreamState::Configured: return "CONFIGURED";
        case StreamState::Open: return "OPEN";
        case StreamState::Streaming: return "STREAMING";
        case StreamState::Closed: return "CLOSED";
    }
    return "?";
}

bool is_legal_transition(StreamState from, StreamState to) {
    using S = StreamState;
    switch (from) {
        case S::Idle: return to == S::Configured;
        case S::Configured: return to == S::Open;
        case S::Open: return to == S::Streaming;
        case S::Streaming: return to == S::Open || to == S::Closed;
        case S::Closed: return false;
    }
    return false;
}

std::size_t frame_payload_bytes(std::uint32_t bitrate_bps, SimTime duration) {
    const auto bits = static_cast<std::uint64_t>(bitrate_bps) * static_cast<std::uint64_t>(duration.count()) /
                      1'000'000'000ULL;
    return static_cast<std::size_t>(bits / 8);
}

StreamSession::StreamSession(BitrateLadder ladder, Role role) : ladder_(std::move(ladder)), role_(role) {}

void StreamSession::transition(StreamState to) {
    if (!is_legal_transition(state_, to)) {
        throw InvalidStateError("illegal stream transition " + std::string(to_string(state_)) + " -> " +
                                std::string(to_string(to)));
    }
    state_ = to;
}

void StreamSession::require_on_ladder(std::uint32_t bitrate_bps) const {
    if (!ladder_.contains(bitrate_bps)) {
        throw InvalidBitrateError("bitrate " + std::to_string(bitrate_bps) + " bps is not on the ladder");
    }
}

void StreamSession::configure(std::uint32_t bitrate_bps) {
    if (state_ != StreamState::Idle) {
        throw InvalidStateError("configure requires IDLE, stream is " + std::string(to_string(state_)));
    }
    require_on_ladder(bitrate_bps);
    transition(StreamState::Configured);
    bitrate_ = bitrate_bps;
}

void StreamSession::open() {
    if (state_ != StreamState::Configured) {
        throw InvalidStateError("open requires CONFIGURED, stream is " + std::string(to_string(state_)));
    }
    transition(StreamState::Open);
}
void StreamSession::start() { transition(StreamState::Streaming); }
void StreamSession::suspend() {
    if (state_ != StreamState::Streaming) {
        throw InvalidStateError("suspend requires STREAMING, stream is " + std::string(to_string(state_)));
    }
    transition(StreamState::Open);
}
void StreamSession::close() { transition(StreamState::Closed); }

bool StreamSession::set_bitrate(std::uint32_t bitrate_bps) {
    if (state_ != StreamState::Streaming) {
        throw InvalidStateError("bitrate changes require STREAMING, stream is " + std::string(to_string(state_)));
    }
    require_on_ladder(bitrate_bps);
    if (bitrate_bps == bitrate_) {
        return false;
    }
    bitrate_ = bitrate_bps;
    return true;
}

std::size_t StreamSession::rung() const {
    return ladder_.index_of(bitrate_).value_or(0);
}

void StreamConfig::validate() const {
    if (frame_duration <= SimTime{0}) {
        throw ConfigError("stream frame duration must be > 0");
    }
    if (signalling_latency < SimTime{0}) {
        throw ConfigError("stream signalling latency must be >= 0");
    }
}

A2dpStream::A2dpStream(BitrateLadder ladder, StreamConfig cfg)
    : cfg_(cfg), src_(ladder, Role::Source), snk_(std::move(ladder), Role::Sink) {
    cfg_.validate();
}

void A2dpStream::require(StreamState s, std::string_view op) const {
    if (src_.state() != s) {
        throw InvalidStateError(std::string(op) + " requires " + std::string(to_string(s)) + ", stream is " +
                                std::string(to_string(src_.state())));
    }
}

SimTime A2dpStream::configure(SimTime now, std::uint32_t bitrate_bps) {
    src_.configure(bitrate_bps);
    snk_.configure(bitrate_bps);
    return now + cfg_.signalling_latency;
}

void A2dpStream::complete_signalling() {
    src_.open();
    snk_.open();
}

void A2dpStream::start(SimTime now) {
    src_.start();
    snk_.start();
    next_frame_time_ = now;
}

void A2dpStream::suspend() {
    src_.suspend();
    snk_.suspend();
}

void A2dpStream::close() {
    src_.close();
    snk_.close();
}

bool A2dpStream::reconfigure_bitrate(SimTime now, std::uint32_t bitrate_bps) {
    const std::uint32_t before = src_.negotiated_bitrate();
    if (!src_.set_bitrate(bitrate_bps)) {
        return false;
    }
    snk_.set_bitrate(bitrate_bps);
    reconfigs_.push_back({now, before, bitrate_bps});
    return true;
}

AudioFrame A2dpStream::next_frame() {
    require(StreamState::Streaming, "sending audio");
    AudioFrame f;
    f.seq = next_seq_++;
    f.timestamp = next_frame_time_;
    f.duration = cfg_.frame_duration;
    f.bitrate_bps = src_.negotiated_bitrate();
    f.payload_bytes = frame_payload_bytes(f.bitrate_bps, f.duration);
    next_frame_time_ += cfg_.frame_duration;
    return f;
}

void A2dpStream::record_outcome(const AudioFrame& frame, bool delivered, SimTime completed) {
    if (snk_.state() != StreamState::Streaming && delivered) {
        throw InvalidStateError("sink can only receive audio in STREAMING");
    }
    outcomes_.push_back({frame, delivered, completed});
    if (delivered) {
        received_.push_back(frame.seq);
    }
}

DeliveryReport A2dpStream::delivery_report(SimTime now, SimTime window) const {
    DeliveryReport r;
    const SimTime from = now - window;
    std::uint64_t bits = 0;
    for (auto it = outcomes_.rbegin(); it != outcomes_.rend(); ++it) {
        const SimTime ts = it->frame.timestamp;
        if (ts >= now) {
            continue;
        }
        if (ts < from) {
            break;
        }
        if (it->delivered) {
            ++r.delivered_frames;
            bits += static_cast<std::uint64_t>(it->frame.payload_bytes) * 8;
        } else {
            ++r.lost_frames;
        }
    }
    if (window > SimTime{0}) {
        r.goodput_bps = static_cast<double>(bits) / to_seconds(window);
    }
    return r;
}

A2dpStream A2dpStream::restore(BitrateLadder ladder, StreamConfig cfg, StreamState state,
                               std::uint32_t bitrate_bps, std::uint64_t next_seq) {
    A2dpStream s(std::move(ladder), cfg);
    if (state != StreamState::Idle) {
        s.src_.require_on_ladder(bitrate_bps);
        s.src_.bitrate_ = bitrate_bps;
        s.snk_.bitrate_ = bitrate_bps;
    }
    s.src_.state_ = state;
    s.snk_.state_ = state;
    s.next_seq_ = next_seq;
    return s;
}

}  // namespace btprox

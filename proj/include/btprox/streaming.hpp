#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "btprox/units.hpp"

namespace btprox {

/// Selectable audio encoding rates, bits/s, strictly increasing.
class BitrateLadder {
public:
    /// Throws ConfigError unless non-empty, strictly increasing and
    /// top * overhead <= 721 kbps.
    explicit BitrateLadder(std::vector<std::uint32_t> rungs_bps, double overhead = 1.10);

    /// 64, 96, 128, 192, 256, 320 kbps.
    static BitrateLadder standard();

    std::size_t size() const { return rungs_.size(); }
    std::uint32_t at(std::size_t i) const { return rungs_.at(i); }
    std::uint32_t top() const { return rungs_.back(); }
    std::uint32_t bottom() const { return rungs_.front(); }
    std::size_t top_index() const { return rungs_.size() - 1; }
    double overhead() const { return overhead_; }
    const std::vector<std::uint32_t>& rungs() const { return rungs_; }

    std::optional<std::size_t> index_of(std::uint32_t bps) const;
    bool contains(std::uint32_t bps) const { return index_of(bps).has_value(); }

private:
    std::vector<std::uint32_t> rungs_;
    double overhead_;
};

enum class StreamState { Idle, Configured, Open, Streaming, Closed };
enum class Role { Source, Sink };

std::string_view to_string(StreamState s);

/// IDLE->CONFIGURED->OPEN->STREAMING->{OPEN, CLOSED}; nothing else.
bool is_legal_transition(StreamState from, StreamState to);

struct AudioFrame {
    std::uint64_t seq = 0;
    SimTime timestamp{0};
    SimTime duration{0};
    std::uint32_t bitrate_bps = 0;
    std::size_t payload_bytes = 0;
};

/// bitrate * duration / 8, exact for whole-bit frames.
std::size_t frame_payload_bytes(std::uint32_t bitrate_bps, SimTime duration);

/// One endpoint's GAVDP-style stream state.
class StreamSession {
public:
    StreamSession(BitrateLadder ladder, Role role);

    void configure(std::uint32_t bitrate_bps);
    void open();
    void start();
    void suspend();
    void close();
    /// Returns false when `bitrate_bps` is already negotiated.
    bool set_bitrate(std::uint32_t bitrate_bps);

    StreamState state() const { return state_; }
    Role role() const { return role_; }
    std::uint32_t negotiated_bitrate() const { return bitrate_; }
    std::size_t rung() const;
    const BitrateLadder& ladder() const { return ladder_; }

private:
    friend class A2dpStream;
    void transition(StreamState to);
    void require_on_ladder(std::uint32_t bitrate_bps) const;

    BitrateLadder ladder_;
    Role role_;
    StreamState state_ = StreamState::Idle;
    std::uint32_t bitrate_ = 0;
};

struct StreamConfig {
    SimTime frame_duration{20'000'000};
    SimTime signalling_latency{40'000'000};

    void validate() const;
};

struct FrameOutcome {
    AudioFrame frame;
    bool delivered = false;
    SimTime completed{0};
};

struct DeliveryReport {
    std::uint64_t delivered_frames = 0;
    std::uint64_t lost_frames = 0;
    double goodput_bps = 0.0;
};

struct ReconfigEvent {
    SimTime time{0};
    std::uint32_t from_bps = 0;
    std::uint32_t to_bps = 0;
};

/// Source and sink of one A2DP stream plus the frame scheduler between them.
class A2dpStream {
public:
    explicit A2dpStream(BitrateLadder ladder, StreamConfig cfg = {});

    /// Both ends go to CONFIGURED. Returns the time signalling completes.
    SimTime configure(SimTime now, std::uint32_t bitrate_bps);
    /// Both ends go to OPEN.
    void complete_signalling();
    /// Both ends go to STREAMING; the first frame is due at `now`.
    void start(SimTime now);
    void suspend();
    void close();

    /// In-band rate change. A no-op (and no event) when unchanged.
    bool reconfigure_bitrate(SimTime now, std::uint32_t bitrate_bps);

    /// Source side: emits the frame due at next_frame_time().
    AudioFrame next_frame();
    SimTime next_frame_time() const { return next_frame_time_; }

    /// Sink side: outcome of a frame handed to the transport.
    void record_outcome(const AudioFrame& frame, bool delivered, SimTime completed);

    /// Frames stamped in [now - window, now).
    DeliveryReport delivery_report(SimTime now, SimTime window) const;

    const StreamSession& source() const { return src_; }
    const StreamSession& sink() const { return snk_; }
    StreamState state() const { return src_.state(); }
    std::uint32_t bitrate() const { return src_.negotiated_bitrate(); }
    std::size_t rung() const { return src_.rung(); }
    const BitrateLadder& ladder() const { return src_.ladder(); }
    const StreamConfig& config() const { return cfg_; }

    std::uint64_t next_seq() const { return next_seq_; }
    /// Content position handed to the transport so far.
    SimTime track_position() const { return static_cast<std::int64_t>(next_seq_) * cfg_.frame_duration; }

    const std::vector<FrameOutcome>& outcomes() const { return outcomes_; }
    const std::vector<std::uint64_t>& received_seqs() const { return received_; }
    const std::vector<ReconfigEvent>& reconfigurations() const { return reconfigs_; }

    /// Rebuilds a stream at a saved position without replaying signalling.
    static A2dpStream restore(BitrateLadder ladder, StreamConfig cfg, StreamState state,
                              std::uint32_t bitrate_bps, std::uint64_t next_seq);

private:
    void require(StreamState s, std::string_view op) const;

    StreamConfig cfg_;
    StreamSession src_;
    StreamSession snk_;
    std::uint64_t next_seq_ = 0;
    SimTime next_frame_time_{0};
    std::vector<FrameOutcome> outcomes_;
    std::vector<std::uint64_t> received_;
    std::vector<ReconfigEvent> reconfigs_;
};

}  // namespace btprox

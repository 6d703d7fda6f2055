#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "btprox/link_manager.hpp"
#include "btprox/streaming.hpp"
#include "btprox/units.hpp"

namespace btprox {

enum class Trend { Approaching, Receding, Stationary };
std::string_view to_string(Trend t);

struct ProximityEstimate {
    double smoothed_lq = 0.0;
    Trend trend = Trend::Stationary;
    std::size_t confidence = 0;  // samples in the smoothing window
};

/// Controller tuning. Threshold vectors are indexed by rung; entry 0 of each
/// is never consulted (there is no rung below 0 to fall from or climb out of).
struct ControllerConfig {
    std::size_t window = 25;
    double deadband = 4.0;
    std::size_t trend_lag = 5;  // samples between the two smoothed values compared
    std::vector<double> up_thresholds;
    std::vector<double> down_thresholds;
    double warn_lq = 150.0;
    std::size_t warn_windows = 4;
    SimTime decision_interval{500'000'000};

    /// Thresholds spread evenly over [150, 245] with a 15-unit hysteresis gap.
    static ControllerConfig for_ladder(std::size_t rungs);

    void validate(std::size_t rungs) const;
};

/// Smoothed LQ is the mean of the last `window` LQ values; the trend compares
/// it with the same mean `trend_lag` samples earlier. RSSI is ignored.
ProximityEstimate estimate_proximity(std::span<const LinkMetricSample> samples, const ControllerConfig& cfg);

/// At most one rung per call: up iff smoothed >= up[current+1], down iff
/// smoothed <= down[current], otherwise hold.
std::size_t select_bitrate(const ProximityEstimate& estimate, std::size_t current_rung,
                           const ControllerConfig& cfg);

enum class Warning { None, Warning };

/// WARNING iff each of the last `warn_windows` samples had smoothed LQ below
/// warn_lq or a zero delivery ratio.
Warning check_disconnection_warning(std::span<const LinkMetricSample> samples, const ControllerConfig& cfg);

struct Decision {
    SimTime time{0};
    ProximityEstimate estimate;
    std::size_t rung = 0;
    bool changed = false;
    Warning warning = Warning::None;
};

/// Stateful wrapper fed one metric sample at a time and polled at decision
/// intervals. Keeps only the history the pure functions above need.
class AdaptationController {
public:
    AdaptationController(ControllerConfig cfg, std::size_t rungs, std::size_t initial_rung);

    /// Updates the warning state; returns it.
    Warning observe(const LinkMetricSample& sample);

    Decision decide(SimTime now);

    std::size_t rung() const { return rung_; }
    Warning warning() const { return warning_; }
    const ControllerConfig& config() const { return cfg_; }

private:
    double smoothed_at_back() const;

    ControllerConfig cfg_;
    std::size_t rungs_;
    std::size_t rung_;
    std::deque<LinkMetricSample> history_;
    std::size_t history_cap_;
    std::size_t low_streak_ = 0;
    Warning warning_ = Warning::None;
};

/// Enough to resume playback where it stopped.
struct SavedSession {
    StreamState state = StreamState::Idle;
    std::uint32_t bitrate_bps = 0;
    std::size_t rung = 0;
    std::uint64_t next_seq = 0;
    std::int64_t track_position_ns = 0;

    /// Canonical JSON; equal sessions serialize to identical bytes.
    std::string serialize() const;
    static SavedSession parse(std::string_view text);

    bool operator==(const SavedSession&) const = default;
};

/// Requires STREAMING or a raised warning; throws InvalidStateError otherwise.
SavedSession session_checkpoint(const A2dpStream& stream, Warning warning = Warning::None);

A2dpStream resume_session(const SavedSession& saved, BitrateLadder ladder, StreamConfig cfg = {});

}  // namespace btprox

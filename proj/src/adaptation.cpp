#include "btprox/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <json.hpp>

#include "btprox/errors.hpp"

namespace btprox {

namespace {

double mean_lq(std::span<const LinkMetricSample> samples, std::size_t end, std::size_t window) {
    const std::size_t begin = end > window ? end - window : 0;
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
        sum += samples[i].lq.value;
    }
    return end > begin ? sum / static_cast<double>(end - begin) : 0.0;
}

Trend classify(double delta, double deadband) {
    if (std::abs(delta) <= deadband) {
        return Trend::Stationary;
    }
    return delta > 0.0 ? Trend::Approaching : Trend::Receding;
}

}  // namespace

std::string_view to_string(Trend t) {
    switch (t) {
        case Trend::Approaching: return "APPROACHING";
        case Trend::Receding: return "RECEDING";
        case Trend::Stationary: return "STATIONARY";
    }
    return "?";
}

ControllerConfig ControllerConfig::for_ladder(std::size_t rungs) {
    ControllerConfig cfg;
    constexpr double lowest_up = 150.0;
    constexpr double highest_up = 245.0;
    constexpr double gap = 15.0;
    cfg.up_thresholds.assign(rungs, 0.0);
    cfg.down_thresholds.assign(rungs, 0.0);
    for (std::size_t r = 1; r < rungs; ++r) {
        const double frac = rungs > 2 ? static_cast<double>(r - 1) / static_cast<double>(rungs - 2) : 0.0;
        cfg.up_thresholds[r] = std::round(lowest_up + frac * (highest_up - lowest_up));
        cfg.down_thresholds[r] = cfg.up_thresholds[r] - gap;
    }
    return cfg;
}

void ControllerConfig::validate(std::size_t rungs) const {
    if (window == 0) {
        throw ConfigError("adaptation.window must be >= 1");
    }
    if (!(deadband >= 0.0)) {
        throw ConfigError("adaptation.deadband must be >= 0");
    }
    if (trend_lag == 0) {
        throw ConfigError("adaptation.trend_lag must be >= 1");
    }
    if (warn_windows == 0) {
        throw ConfigError("adaptation.warn_windows must be >= 1");
    }
    if (decision_interval <= SimTime{0}) {
        throw ConfigError("adaptation.decision interval must be > 0");
    }
    if (up_thresholds.size() != rungs || down_thresholds.size() != rungs) {
        throw ConfigError("adaptation thresholds need one entry per ladder rung (" + std::to_string(rungs) + ")");
    }
    for (std::size_t r = 1; r < rungs; ++r) {
        if (!(down_thresholds[r] < up_thresholds[r])) {
            throw ConfigError("rung " + std::to_string(r) + ": down threshold must be below up threshold");
        }
        if (r > 1 && !(up_thresholds[r] > up_thresholds[r - 1] && down_thresholds[r] > down_thresholds[r - 1])) {
            throw ConfigError("adaptation thresholds must increase with rung");
        }
    }
}

ProximityEstimate estimate_proximity(std::span<const LinkMetricSample> samples, const ControllerConfig& cfg) {
    ProximityEstimate e;
    if (samples.empty()) {
        return e;
    }
    const std::size_t n = samples.size();
    e.smoothed_lq = mean_lq(samples, n, cfg.window);
    e.confidence = std::min(n, cfg.window);
    if (n > cfg.trend_lag) {
        const double previous = mean_lq(samples, n - cfg.trend_lag, cfg.window);
        e.trend = classify(e.smoothed_lq - previous, cfg.deadband);
    }
    return e;
}

std::size_t select_bitrate(const ProximityEstimate& estimate, std::size_t current_rung, const ControllerConfig& cfg) {
    const std::size_t rungs = cfg.up_thresholds.size();
    if (rungs == 0) {
        return 0;
    }
    current_rung = std::min(current_rung, rungs - 1);
    if (current_rung + 1 < rungs && estimate.smoothed_lq >= cfg.up_thresholds[current_rung + 1]) {
        return current_rung + 1;
    }
    if (current_rung > 0 && estimate.smoothed_lq <= cfg.down_thresholds[current_rung]) {
        return current_rung - 1;
    }
    return current_rung;
}

Warning check_disconnection_warning(std::span<const LinkMetricSample> samples, const ControllerConfig& cfg) {
    if (samples.size() < cfg.warn_windows) {
        return Warning::None;
    }
    for (std::size_t k = 0; k < cfg.warn_windows; ++k) {
        const std::size_t end = samples.size() - k;
        const bool low = mean_lq(samples, end, cfg.window) < cfg.warn_lq;
        const bool silent = samples[end - 1].delivery_ratio() == 0.0;
        if (!low && !silent) {
            return Warning::None;
        }
    }
    return Warning::Warning;
}

AdaptationController::AdaptationController(ControllerConfig cfg, std::size_t rungs, std::size_t initial_rung)
    : cfg_(std::move(cfg)), rungs_(rungs), rung_(initial_rung),
      history_cap_(cfg_.window + std::max(cfg_.trend_lag, cfg_.warn_windows)) {
    cfg_.validate(rungs_);
    if (rung_ >= rungs_) {
        throw ConfigError("initial rung outside the ladder");
    }
}

double AdaptationController::smoothed_at_back() const {
    const std::size_t n = history_.size();
    const std::size_t begin = n > cfg_.window ? n - cfg_.window : 0;
    double sum = 0.0;
    for (std::size_t i = begin; i < n; ++i) {
        sum += history_[i].lq.value;
    }
    return n > begin ? sum / static_cast<double>(n - begin) : 0.0;
}

Warning AdaptationController::observe(const LinkMetricSample& sample) {
    history_.push_back(sample);
    if (history_.size() > history_cap_) {
        history_.pop_front();
    }
    const bool low = smoothed_at_back() < cfg_.warn_lq;
    const bool silent = sample.delivery_ratio() == 0.0;
    low_streak_ = (low || silent) ? low_streak_ + 1 : 0;
    warning_ = low_streak_ >= cfg_.warn_windows ? Warning::Warning : Warning::None;
    return warning_;
}

Decision AdaptationController::decide(SimTime now) {
    Decision d;
    d.time = now;
    const std::vector<LinkMetricSample> recent(history_.begin(), history_.end());
    d.estimate = estimate_proximity(recent, cfg_);
    d.warning = warning_;
    if (!history_.empty()) {
        const std::size_t next = select_bitrate(d.estimate, rung_, cfg_);
        d.changed = next != rung_;
        rung_ = next;
    }
    d.rung = rung_;
    return d;
}

std::string SavedSession::serialize() const {
    nlohmann::json j;
    j["state"] = std::string(to_string(state));
    j["bitrate_bps"] = bitrate_bps;
    j["rung"] = rung;
    j["next_seq"] = next_seq;
    j["track_position_ns"] = track_position_ns;
    j["version"] = 1;
    return j.dump();
}

SavedSession SavedSession::parse(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("saved session is not valid JSON: ") + e.what());
    }
    SavedSession s;
    const std::string state = j.at("state").get<std::string>();
    bool known = false;
    for (StreamState candidate : {StreamState::Idle, StreamState::Configured, StreamState::Open,
                                  StreamState::Streaming, StreamState::Closed}) {
        if (to_string(candidate) == state) {
            s.state = candidate;
            known = true;
        }
    }
    if (!known) {
        throw ConfigError("saved session has unknown state '" + state + "'");
    }
    s.bitrate_bps = j.at("bitrate_bps").get<std::uint32_t>();
    s.rung = j.at("rung").get<std::size_t>();
    s.next_seq = j.at("next_seq").get<std::uint64_t>();
    s.track_position_ns = j.at("track_position_ns").get<std::int64_t>();
    return s;
}

SavedSession session_checkpoint(const A2dpStream& stream, Warning warning) {
    if (stream.state() != StreamState::Streaming && warning != Warning::Warning) {
        throw InvalidStateError("checkpoint requires STREAMING or a raised warning, stream is " +
                                std::string(to_string(stream.state())));
    }
    SavedSession s;
    s.state = stream.state();
    s.bitrate_bps = stream.bitrate();
    s.rung = stream.rung();
    s.next_seq = stream.next_seq();
    s.track_position_ns = stream.track_position().count();
    return s;
}

A2dpStream resume_session(const SavedSession& saved, BitrateLadder ladder, StreamConfig cfg) {
    const auto expected = static_cast<std::int64_t>(saved.next_seq) * cfg.frame_duration.count();
    if (expected != saved.track_position_ns) {
        throw ConfigError("saved track position does not match sequence number and frame duration");
    }
    return A2dpStream::restore(std::move(ladder), cfg, saved.state, saved.bitrate_bps, saved.next_seq);
}

}  // namespace btprox

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "btprox/adaptation.hpp"
#include "btprox/channel.hpp"
#include "btprox/inquiry.hpp"
#include "btprox/link_manager.hpp"
#include "btprox/power.hpp"
#include "btprox/streaming.hpp"
#include "btprox/transport.hpp"
#include "btprox/units.hpp"

namespace btprox {

enum class ScenarioMode {
    Stream,   // A2DP stream over a connected link
    Rtt,      // connected link carrying only MTU echo probes
    Inquiry,  // back-to-back inquiry procedures, no connection
};

enum class Interpolation { Linear, Step };

struct Waypoint {
    double time_s = 0.0;
    double distance_m = 1.0;
};

struct Trajectory {
    std::vector<Waypoint> waypoints;
    Interpolation interpolation = Interpolation::Linear;

    /// Holds the first/last distance outside the waypoint span.
    double distance_at(double t_s) const;
    /// Index of the waypoint segment containing `t_s`.
    std::size_t segment_at(double t_s) const;
    void validate(double ref_distance_m) const;
};

struct Toggles {
    bool power_control = true;
    bool adaptation = false;
    bool fec = false;
    double piconet_load = 0.0;
};

struct LinkSettings {
    Grpr grpr;
    PowerControlState power;
    SimTime power_control_interval{100'000'000};
    std::size_t ber_window = 100;
    LqMapping lq;
    std::size_t retry_limit = 8;
    std::size_t mtu_bytes = 672;
    bool paired = true;
    SimTime auth_delay{50'000'000};
};

struct StreamSettings {
    std::vector<std::uint32_t> ladder_bps{64'000, 96'000, 128'000, 192'000, 256'000, 320'000};
    double overhead = 1.10;
    StreamConfig stream;
    std::uint32_t initial_bps = 0;  // 0 selects the top rung
    SimTime max_queue_delay{100'000'000};
    /// Forced in-band rate changes: (time_s, bitrate_bps).
    std::vector<std::pair<double, std::uint32_t>> bitrate_schedule;
};

struct RttSettings {
    SimTime interval{50'000'000};
};

struct InquirySettings {
    InquiryConfig config;
    InquiryScanParams params;
};

struct Scenario {
    std::string name = "scenario";
    ScenarioMode mode = ScenarioMode::Stream;
    std::uint64_t seed = 1;
    double duration_s = 0.0;
    double sample_rate_hz = 10.0;
    Trajectory trajectory;
    ChannelConfig channel;
    Toggles toggles;
    LinkSettings link;
    StreamSettings stream;
    ControllerConfig controller = ControllerConfig::for_ladder(6);
    PowerModel power;
    RttSettings rtt;
    InquirySettings inquiry;

    /// Throws ConfigError naming the first offending field.
    void validate() const;

    BitrateLadder ladder() const { return BitrateLadder(stream.ladder_bps, stream.overhead); }
};

std::string_view to_string(ScenarioMode m);

/// Parses a YAML scenario. Each override is `dotted.key=value` with a YAML
/// value, applied before parsing (so they win over the file).
Scenario parse_scenario(std::string_view yaml_text, const std::vector<std::string>& overrides = {});
Scenario load_scenario_file(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// YAML for a scenario; parse_scenario(scenario_to_yaml(s)) reproduces `s`.
std::string scenario_to_yaml(const Scenario& s);

/// Re-parses `s` with the overrides applied.
Scenario with_overrides(const Scenario& s, const std::vector<std::string>& overrides);

}  // namespace btprox

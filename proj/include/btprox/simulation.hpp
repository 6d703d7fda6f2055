#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "btprox/adaptation.hpp"
#include "btprox/inquiry.hpp"
#include "btprox/scenario.hpp"
#include "btprox/trace.hpp"
#include "btprox/transport.hpp"

namespace btprox {

/// One controller poll, as logged to the decisions CSV.
struct DecisionRecord {
    SimTime time{0};
    double smoothed_lq = 0.0;
    Trend trend = Trend::Stationary;
    std::size_t rung = 0;
    bool warning = false;
};

/// time_s,smoothed_lq,trend,rung,warning
std::string decisions_to_csv(std::span<const DecisionRecord> decisions);

enum class EventKind { StreamConfigured, StreamStarted, BitrateChanged, Warning, LinkLoss };
std::string_view to_string(EventKind k);

struct SimEvent {
    SimTime time{0};
    EventKind kind = EventKind::StreamStarted;
    std::uint32_t bitrate_bps = 0;  // BitrateChanged only
};

struct ProbeRecord {
    SimTime issue{0};
    double distance_m = 0.0;
    RttResult result;
};

struct ScenarioResult {
    ScenarioTrace trace;
    std::vector<DecisionRecord> decisions;
    std::vector<SimEvent> events;
    std::vector<ProbeRecord> probes;              // rtt mode
    std::vector<InquiryResponse> responses;       // inquiry mode, absolute times
    std::optional<SimTime> link_loss_time;
    std::optional<SimTime> first_warning_time;
    double energy_j = 0.0;

    /// Bitrate rung of every stream sample taken while the link was up.
    std::vector<std::size_t> rung_sequence;
};

/// Validates, then runs the scenario to completion. Same scenario, same bytes.
ScenarioResult run_scenario(const Scenario& s);

}  // namespace btprox

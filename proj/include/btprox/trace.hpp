#pragma once

#include <optional>
#include <string>
#include <vector>

#include "btprox/power.hpp"
#include "btprox/units.hpp"

namespace btprox {

/// One CSV row. Columns that do not apply to a scenario mode stay empty.
struct TraceRow {
    SimTime time{0};
    double distance_m = 0.0;
    std::optional<int> rssi;
    std::optional<int> lq;
    std::optional<double> rtt_ms;
    std::optional<double> bitrate_kbps;
    std::optional<double> goodput_kbps;
    std::optional<double> power_mw;
    bool warning = false;
};

/// Time-ordered metric log.
///
/// CSV schema (header always present, LF line endings, '.' decimals):
///   time_s,distance_ft,rssi,lq,rtt_ms,bitrate_kbps,goodput_kbps,power_mw,warning
class ScenarioTrace {
public:
    static const char* header();

    /// Throws Error unless `row.time` is strictly later than the last row.
    void append(TraceRow row);

    const std::vector<TraceRow>& rows() const { return rows_; }
    bool empty() const { return rows_.empty(); }
    std::size_t size() const { return rows_.size(); }

    std::string to_csv() const;

private:
    std::vector<TraceRow> rows_;
};

/// Fixed-point decimal rendering used by every CSV writer here.
std::string format_fixed(double value, int decimals);

/// Energy over rows carrying a bitrate, piecewise constant between rows.
double scenario_energy_j(const ScenarioTrace& trace, const PowerModel& model);

}  // namespace btprox

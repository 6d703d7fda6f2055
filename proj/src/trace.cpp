#include "btprox/trace.hpp"

#include <charconv>
#include <cmath>
#include <system_error>

#include "btprox/errors.hpp"

namespace btprox {

const char* ScenarioTrace::header() {
    return "time_s,distance_ft,rssi,lq,rtt_ms,bitrate_kbps,goodput_kbps,power_mw,warning";
}

void ScenarioTrace::append(TraceRow row) {
    if (!rows_.empty() && row.time <= rows_.back().time) {
        throw Error("trace rows must have strictly increasing time");
    }
    rows_.push_back(row);
}

std::string format_fixed(double value, int decimals) {
    if (value == 0.0) {
        value = 0.0;  // drop the sign of -0.0
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, decimals);
    if (res.ec != std::errc{}) {
        throw Error("number does not fit the CSV field");
    }
    std::string out(buf, res.ptr);
    // A value that rounds to zero should not print as "-0.000".
    if (out.front() == '-' && out.find_first_not_of("-0.") == std::string::npos) {
        out.erase(0, 1);
    }
    return out;
}

std::string ScenarioTrace::to_csv() const {
    std::string out = header();
    out += '\n';
    for (const auto& r : rows_) {
        out += format_fixed(to_seconds(r.time), 7);
        out += ',';
        out += format_fixed(meters_to_feet(r.distance_m), 3);
        out += ',';
        if (r.rssi) out += std::to_string(*r.rssi);
        out += ',';
        if (r.lq) out += std::to_string(*r.lq);
        out += ',';
        if (r.rtt_ms) out += format_fixed(*r.rtt_ms, 6);
        out += ',';
        if (r.bitrate_kbps) out += format_fixed(*r.bitrate_kbps, 3);
        out += ',';
        if (r.goodput_kbps) out += format_fixed(*r.goodput_kbps, 3);
        out += ',';
        if (r.power_mw) out += format_fixed(*r.power_mw, 3);
        out += ',';
        out += r.warning ? '1' : '0';
        out += '\n';
    }
    return out;
}

double scenario_energy_j(const ScenarioTrace& trace, const PowerModel& model) {
    std::vector<BitratePoint> points;
    points.reserve(trace.size());
    for (const auto& r : trace.rows()) {
        if (r.bitrate_kbps) {
            points.push_back({to_seconds(r.time), *r.bitrate_kbps * 1000.0});
        }
    }
    return energy_j(points, model);
}

}  // namespace btprox

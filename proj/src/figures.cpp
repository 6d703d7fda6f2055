#include "btprox/figures.hpp"

#include <cmath>

#include "btprox/errors.hpp"

namespace btprox {

namespace {

double sweep_duration(const Trajectory& t, double dwell_s) {
    return t.waypoints.back().time_s + dwell_s;
}

Scenario inquiry_sweep(std::string name, double sigma_db) {
    Scenario s;
    s.name = std::move(name);
    s.mode = ScenarioMode::Inquiry;
    s.channel.shadowing_sigma_db = sigma_db;
    const double dwell = to_seconds(s.inquiry.config.total_duration());
    s.trajectory = dwell_sweep_ft(4, 46, 2, dwell);
    s.duration_s = sweep_duration(s.trajectory, dwell);
    s.toggles.power_control = false;
    return s;
}

Scenario stream_sweep(std::string name, double to_ft, bool fec) {
    Scenario s;
    s.name = std::move(name);
    s.mode = ScenarioMode::Stream;
    s.trajectory = dwell_sweep_ft(4, to_ft, 2, 2.0);
    s.duration_s = sweep_duration(s.trajectory, 2.0);
    s.toggles.fec = fec;
    s.stream.initial_bps = 128'000;
    return s;
}

}  // namespace

Trajectory dwell_sweep_ft(double from_ft, double to_ft, double step_ft, double dwell_s) {
    if (!(step_ft > 0.0) || !(dwell_s > 0.0) || to_ft < from_ft) {
        throw ConfigError("bad sweep: need step > 0, dwell > 0 and to >= from");
    }
    Trajectory t;
    t.interpolation = Interpolation::Step;
    const auto n = static_cast<std::size_t>(std::floor((to_ft - from_ft) / step_ft + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double ft = from_ft + step_ft * static_cast<double>(i);
        t.waypoints.push_back({dwell_s * static_cast<double>(i), feet_to_meters(ft)});
    }
    return t;
}

std::vector<std::string> builtin_figure_names() {
    return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "adaptive-walk"};
}

Scenario builtin_figure(std::string_view name) {
    if (name == "fig3") {
        return inquiry_sweep("fig3", 0.0);
    }
    if (name == "fig6") {
        return inquiry_sweep("fig6", 4.0);
    }
    if (name == "fig4") {
        return stream_sweep("fig4", 46, false);
    }
    if (name == "fig7") {
        return stream_sweep("fig7", 50, true);
    }
    if (name == "fig5") {
        Scenario s;
        s.name = "fig5";
        s.mode = ScenarioMode::Rtt;
        s.toggles.power_control = false;
        s.trajectory = dwell_sweep_ft(4, 32, 2, 10.0);
        s.duration_s = sweep_duration(s.trajectory, 10.0);
        return s;
    }
    if (name == "fig8") {
        Scenario s;
        s.name = "fig8";
        s.mode = ScenarioMode::Stream;
        s.trajectory.waypoints = {{0.0, 1.0}};
        double t = 0.0;
        for (std::uint32_t bps : s.stream.ladder_bps) {
            s.stream.bitrate_schedule.emplace_back(t, bps);
            t += 10.0;
        }
        s.duration_s = t;
        return s;
    }
    if (name == "adaptive-walk") {
        Scenario s;
        s.name = "adaptive-walk";
        s.mode = ScenarioMode::Stream;
        s.trajectory.waypoints = {{0.0, 1.0}, {10.0, 1.0}, {24.0, 15.0}};
        s.duration_s = 40.0;
        s.toggles.adaptation = true;
        s.toggles.fec = true;
        return s;
    }
    throw ConfigError("unknown figure '" + std::string(name) + "'");
}

}  // namespace btprox

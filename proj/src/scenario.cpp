#include "btprox/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "btprox/errors.hpp"

namespace btprox {

namespace {

const std::set<std::string> kSections = {"name", "mode", "seed", "duration_s", "sample_rate_hz", "trajectory",
                                         "toggles", "channel", "link", "stream", "adaptation", "power",
                                         "rtt", "inquiry"};

const std::map<std::string, std::set<std::string>> kSectionKeys = {
    {"trajectory", {"interpolation", "waypoints"}},
    {"toggles", {"power_control", "adaptation", "fec", "piconet_load"}},
    {"channel", {"ref_distance_m", "ref_loss_db", "path_loss_exponent", "shadowing_sigma_db", "noise_floor_dbm"}},
    {"link",
     {"grpr_dbm", "tx_power_dbm", "min_tx_dbm", "max_tx_dbm", "step_db", "power_control_interval_ms", "ber_window",
      "lq_ber_lo", "lq_ber_hi", "retry_limit", "mtu_bytes", "paired", "auth_delay_ms"}},
    {"stream",
     {"ladder_kbps", "overhead", "frame_ms", "signalling_ms", "initial_kbps", "max_queue_ms", "bitrate_schedule"}},
    {"adaptation",
     {"window", "deadband", "trend_lag", "decision_ms", "up_thresholds", "down_thresholds", "warn_lq",
      "warn_windows"}},
    {"power",
     {"p_receive_base_mw", "alpha_receive_mw_per_kbps", "p_decode_base_mw", "alpha_decode_mw_per_kbps",
      "p_output_mw"}},
    {"rtt", {"interval_ms"}},
    {"inquiry", {"num_frequencies", "train_size", "train_repetitions", "train_switches", "tx_power_dbm",
                 "response_bits"}},
};

double to_ms(SimTime t) { return std::chrono::duration<double, std::milli>(t).count(); }

std::uint32_t kbps_to_bps(double kbps) {
    if (!(kbps >= 0.0) || kbps > 4.0e6) {
        throw ConfigError("bitrate of " + std::to_string(kbps) + " kbps is out of range");
    }
    return static_cast<std::uint32_t>(std::llround(kbps * 1000.0));
}

template <typename T>
void read(const YAML::Node& section, const char* key, T& out, const std::string& where) {
    const YAML::Node n = section[key];
    if (!n) {
        return;
    }
    try {
        out = n.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where + "." + key + " has the wrong type");
    }
}

void read_ms(const YAML::Node& section, const char* key, SimTime& out, const std::string& where) {
    double ms = to_ms(out);
    read(section, key, ms, where);
    if (!std::isfinite(ms)) {
        throw ConfigError(where + "." + key + " must be finite");
    }
    out = from_millis(ms);
}

void check_keys(const YAML::Node& root) {
    if (!root.IsMap()) {
        throw ConfigError("scenario must be a YAML mapping");
    }
    for (const auto& kv : root) {
        const auto key = kv.first.as<std::string>();
        if (!kSections.contains(key)) {
            throw ConfigError("unknown scenario key '" + key + "'");
        }
        const auto it = kSectionKeys.find(key);
        if (it == kSectionKeys.end()) {
            continue;
        }
        if (!kv.second.IsMap()) {
            throw ConfigError("section '" + key + "' must be a mapping");
        }
        for (const auto& inner : kv.second) {
            const auto sub = inner.first.as<std::string>();
            if (!it->second.contains(sub)) {
                throw ConfigError("unknown key '" + key + "." + sub + "'");
            }
        }
    }
}

void apply_override(YAML::Node& root, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + kv + "' must look like key=value");
    }
    const std::string path = kv.substr(0, eq);
    YAML::Node value;
    try {
        value = YAML::Load(kv.substr(eq + 1));
    } catch (const YAML::Exception& e) {
        throw ConfigError("override '" + kv + "': " + e.what());
    }

    std::vector<std::string> parts;
    std::stringstream ss(path);
    for (std::string part; std::getline(ss, part, '.');) {
        parts.push_back(part);
    }
    // yaml-cpp nodes are handles; walk by reassigning a copy per level.
    std::vector<YAML::Node> chain{root};
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        YAML::Node next = chain.back()[parts[i]];
        if (!next.IsDefined() || next.IsNull()) {
            chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
            next = chain.back()[parts[i]];
        }
        chain.push_back(next);
    }
    chain.back()[parts.back()] = value;
}

Scenario from_yaml(const YAML::Node& root) {
    check_keys(root);
    Scenario s;
    read(root, "name", s.name, "scenario");
    std::string mode = "stream";
    read(root, "mode", mode, "scenario");
    if (mode == "stream") {
        s.mode = ScenarioMode::Stream;
    } else if (mode == "rtt") {
        s.mode = ScenarioMode::Rtt;
    } else if (mode == "inquiry") {
        s.mode = ScenarioMode::Inquiry;
    } else {
        throw ConfigError("scenario.mode must be stream, rtt or inquiry");
    }
    read(root, "seed", s.seed, "scenario");
    read(root, "duration_s", s.duration_s, "scenario");
    read(root, "sample_rate_hz", s.sample_rate_hz, "scenario");

    if (const auto t = root["trajectory"]) {
        std::string interp = "linear";
        read(t, "interpolation", interp, "trajectory");
        if (interp == "linear") {
            s.trajectory.interpolation = Interpolation::Linear;
        } else if (interp == "step") {
            s.trajectory.interpolation = Interpolation::Step;
        } else {
            throw ConfigError("trajectory.interpolation must be linear or step");
        }
        if (const auto w = t["waypoints"]) {
            if (!w.IsSequence()) {
                throw ConfigError("trajectory.waypoints must be a list of [time_s, distance_m]");
            }
            for (const auto& p : w) {
                if (!p.IsSequence() || p.size() != 2) {
                    throw ConfigError("trajectory.waypoints entries must be [time_s, distance_m]");
                }
                s.trajectory.waypoints.push_back({p[0].as<double>(), p[1].as<double>()});
            }
        }
    }

    if (const auto t = root["toggles"]) {
        read(t, "power_control", s.toggles.power_control, "toggles");
        read(t, "adaptation", s.toggles.adaptation, "toggles");
        read(t, "fec", s.toggles.fec, "toggles");
        read(t, "piconet_load", s.toggles.piconet_load, "toggles");
    }

    if (const auto c = root["channel"]) {
        read(c, "ref_distance_m", s.channel.ref_distance_m, "channel");
        read(c, "ref_loss_db", s.channel.ref_loss_db, "channel");
        read(c, "path_loss_exponent", s.channel.path_loss_exponent, "channel");
        read(c, "shadowing_sigma_db", s.channel.shadowing_sigma_db, "channel");
        read(c, "noise_floor_dbm", s.channel.noise_floor_dbm, "channel");
    }

    if (const auto l = root["link"]) {
        if (const auto g = l["grpr_dbm"]) {
            if (!g.IsSequence() || g.size() != 2) {
                throw ConfigError("link.grpr_dbm must be [lower, upper]");
            }
            s.link.grpr = {g[0].as<double>(), g[1].as<double>()};
        }
        bool tx_given = static_cast<bool>(l["tx_power_dbm"]);
        read(l, "tx_power_dbm", s.link.power.tx_power_dbm, "link");
        read(l, "min_tx_dbm", s.link.power.min_tx_dbm, "link");
        read(l, "max_tx_dbm", s.link.power.max_tx_dbm, "link");
        if (!tx_given) {
            s.link.power.tx_power_dbm = s.link.power.max_tx_dbm;
        }
        read(l, "step_db", s.link.power.step_db, "link");
        read_ms(l, "power_control_interval_ms", s.link.power_control_interval, "link");
        read(l, "ber_window", s.link.ber_window, "link");
        read(l, "lq_ber_lo", s.link.lq.ber_lo, "link");
        read(l, "lq_ber_hi", s.link.lq.ber_hi, "link");
        read(l, "retry_limit", s.link.retry_limit, "link");
        read(l, "mtu_bytes", s.link.mtu_bytes, "link");
        read(l, "paired", s.link.paired, "link");
        read_ms(l, "auth_delay_ms", s.link.auth_delay, "link");
    }

    if (const auto st = root["stream"]) {
        if (const auto ladder = st["ladder_kbps"]) {
            s.stream.ladder_bps.clear();
            for (const auto& r : ladder) {
                s.stream.ladder_bps.push_back(kbps_to_bps(r.as<double>()));
            }
        }
        read(st, "overhead", s.stream.overhead, "stream");
        read_ms(st, "frame_ms", s.stream.stream.frame_duration, "stream");
        read_ms(st, "signalling_ms", s.stream.stream.signalling_latency, "stream");
        double initial = s.stream.initial_bps / 1000.0;
        read(st, "initial_kbps", initial, "stream");
        s.stream.initial_bps = kbps_to_bps(initial);
        read_ms(st, "max_queue_ms", s.stream.max_queue_delay, "stream");
        if (const auto sched = st["bitrate_schedule"]) {
            for (const auto& p : sched) {
                if (!p.IsSequence() || p.size() != 2) {
                    throw ConfigError("stream.bitrate_schedule entries must be [time_s, kbps]");
                }
                s.stream.bitrate_schedule.emplace_back(p[0].as<double>(), kbps_to_bps(p[1].as<double>()));
            }
        }
    }

    s.controller = ControllerConfig::for_ladder(s.stream.ladder_bps.size());
    if (const auto a = root["adaptation"]) {
        read(a, "window", s.controller.window, "adaptation");
        read(a, "deadband", s.controller.deadband, "adaptation");
        read(a, "trend_lag", s.controller.trend_lag, "adaptation");
        read_ms(a, "decision_ms", s.controller.decision_interval, "adaptation");
        read(a, "up_thresholds", s.controller.up_thresholds, "adaptation");
        read(a, "down_thresholds", s.controller.down_thresholds, "adaptation");
        read(a, "warn_lq", s.controller.warn_lq, "adaptation");
        read(a, "warn_windows", s.controller.warn_windows, "adaptation");
    }

    if (const auto p = root["power"]) {
        read(p, "p_receive_base_mw", s.power.p_receive_base_mw, "power");
        read(p, "alpha_receive_mw_per_kbps", s.power.alpha_receive_mw_per_kbps, "power");
        read(p, "p_decode_base_mw", s.power.p_decode_base_mw, "power");
        read(p, "alpha_decode_mw_per_kbps", s.power.alpha_decode_mw_per_kbps, "power");
        read(p, "p_output_mw", s.power.p_output_mw, "power");
    }

    if (const auto r = root["rtt"]) {
        read_ms(r, "interval_ms", s.rtt.interval, "rtt");
    }

    s.inquiry.params.tx_power_dbm = s.link.power.max_tx_dbm;
    if (const auto q = root["inquiry"]) {
        read(q, "num_frequencies", s.inquiry.config.num_frequencies, "inquiry");
        read(q, "train_size", s.inquiry.config.train_size, "inquiry");
        read(q, "train_repetitions", s.inquiry.config.train_repetitions, "inquiry");
        read(q, "train_switches", s.inquiry.config.train_switches, "inquiry");
        read(q, "tx_power_dbm", s.inquiry.params.tx_power_dbm, "inquiry");
        read(q, "response_bits", s.inquiry.params.response_bits, "inquiry");
    }
    s.inquiry.params.grpr = s.link.grpr;

    s.validate();
    return s;
}

}  // namespace

std::string_view to_string(ScenarioMode m) {
    switch (m) {
        case ScenarioMode::Stream: return "stream";
        case ScenarioMode::Rtt: return "rtt";
        case ScenarioMode::Inquiry: return "inquiry";
    }
    return "?";
}

double Trajectory::distance_at(double t_s) const {
    if (waypoints.empty()) {
        return 1.0;
    }
    if (t_s <= waypoints.front().time_s) {
        return waypoints.front().distance_m;
    }
    if (t_s >= waypoints.back().time_s) {
        return waypoints.back().distance_m;
    }
    const std::size_t i = segment_at(t_s);
    const Waypoint& a = waypoints[i];
    const Waypoint& b = waypoints[i + 1];
    if (interpolation == Interpolation::Step) {
        return a.distance_m;
    }
    const double f = (t_s - a.time_s) / (b.time_s - a.time_s);
    return a.distance_m + f * (b.distance_m - a.distance_m);
}

std::size_t Trajectory::segment_at(double t_s) const {
    if (waypoints.size() < 2 || t_s < waypoints.front().time_s) {
        return 0;
    }
    const auto it = std::upper_bound(waypoints.begin(), waypoints.end(), t_s,
                                     [](double t, const Waypoint& w) { return t < w.time_s; });
    return static_cast<std::size_t>(it - waypoints.begin()) - 1;
}

void Trajectory::validate(double ref_distance_m) const {
    for (std::size_t i = 0; i < waypoints.size(); ++i) {
        if (!std::isfinite(waypoints[i].time_s) || !std::isfinite(waypoints[i].distance_m)) {
            throw ConfigError("trajectory waypoints must be finite");
        }
        if (i > 0 && !(waypoints[i].time_s > waypoints[i - 1].time_s)) {
            throw ConfigError("trajectory waypoints must be strictly time-sorted");
        }
        if (waypoints[i].distance_m < ref_distance_m) {
            throw ConfigError("trajectory distance " + std::to_string(waypoints[i].distance_m) +
                              " m is below the channel reference distance");
        }
    }
}

void Scenario::validate() const {
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) {
        throw ConfigError("scenario.duration_s must be >= 0");
    }
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw ConfigError("scenario.sample_rate_hz must be > 0");
    }
    channel.validate();
    trajectory.validate(channel.ref_distance_m);
    link.grpr.validate();
    link.power.validate();
    link.lq.validate();
    if (link.power_control_interval <= SimTime{0}) {
        throw ConfigError("link.power_control_interval_ms must be > 0");
    }
    if (link.ber_window == 0) {
        throw ConfigError("link.ber_window must be >= 1");
    }
    LinkConfig{link.retry_limit, toggles.piconet_load, toggles.fec, link.mtu_bytes, {link.paired, link.auth_delay}}
        .validate();
    const BitrateLadder l = ladder();
    stream.stream.validate();
    if (stream.initial_bps != 0 && !l.contains(stream.initial_bps)) {
        throw ConfigError("stream.initial_kbps is not on the ladder");
    }
    if (stream.max_queue_delay < SimTime{0}) {
        throw ConfigError("stream.max_queue_ms must be >= 0");
    }
    double last = -1.0;
    for (const auto& [t, bps] : stream.bitrate_schedule) {
        if (!(t > last)) {
            throw ConfigError("stream.bitrate_schedule must be strictly time-sorted");
        }
        if (!l.contains(bps)) {
            throw ConfigError("stream.bitrate_schedule entry is not on the ladder");
        }
        last = t;
    }
    if (toggles.adaptation && !stream.bitrate_schedule.empty()) {
        throw ConfigError("adaptation and a fixed bitrate schedule are mutually exclusive");
    }
    controller.validate(l.size());
    power.validate();
    if (rtt.interval <= SimTime{0}) {
        throw ConfigError("rtt.interval_ms must be > 0");
    }
    inquiry.config.validate();
    if (inquiry.params.response_bits == 0) {
        throw ConfigError("inquiry.response_bits must be >= 1");
    }
}

Scenario parse_scenario(std::string_view yaml_text, const std::vector<std::string>& overrides) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml_text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scenario is not valid YAML: ") + e.what());
    }
    if (root.IsNull()) {
        root = YAML::Node(YAML::NodeType::Map);
    }
    for (const auto& o : overrides) {
        apply_override(root, o);
    }
    try {
        return from_yaml(root);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("scenario has a malformed value: ") + e.what());
    }
}

Scenario load_scenario_file(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open scenario file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), overrides);
}

std::string scenario_to_yaml(const Scenario& s) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "mode" << YAML::Value << std::string(to_string(s.mode));
    out << YAML::Key << "seed" << YAML::Value << s.seed;
    out << YAML::Key << "duration_s" << YAML::Value << s.duration_s;
    out << YAML::Key << "sample_rate_hz" << YAML::Value << s.sample_rate_hz;

    out << YAML::Key << "trajectory" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "interpolation" << YAML::Value
        << (s.trajectory.interpolation == Interpolation::Step ? "step" : "linear");
    out << YAML::Key << "waypoints" << YAML::Value << YAML::BeginSeq;
    for (const auto& w : s.trajectory.waypoints) {
        out << YAML::Flow << YAML::BeginSeq << w.time_s << w.distance_m << YAML::EndSeq;
    }
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "toggles" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "power_control" << YAML::Value << s.toggles.power_control;
    out << YAML::Key << "adaptation" << YAML::Value << s.toggles.adaptation;
    out << YAML::Key << "fec" << YAML::Value << s.toggles.fec;
    out << YAML::Key << "piconet_load" << YAML::Value << s.toggles.piconet_load;
    out << YAML::EndMap;

    out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "ref_distance_m" << YAML::Value << s.channel.ref_distance_m;
    out << YAML::Key << "ref_loss_db" << YAML::Value << s.channel.ref_loss_db;
    out << YAML::Key << "path_loss_exponent" << YAML::Value << s.channel.path_loss_exponent;
    out << YAML::Key << "shadowing_sigma_db" << YAML::Value << s.channel.shadowing_sigma_db;
    out << YAML::Key << "noise_floor_dbm" << YAML::Value << s.channel.noise_floor_dbm;
    out << YAML::EndMap;

    out << YAML::Key << "link" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "grpr_dbm" << YAML::Value << YAML::Flow << YAML::BeginSeq << s.link.grpr.lower_dbm
        << s.link.grpr.upper_dbm << YAML::EndSeq;
    out << YAML::Key << "tx_power_dbm" << YAML::Value << s.link.power.tx_power_dbm;
    out << YAML::Key << "min_tx_dbm" << YAML::Value << s.link.power.min_tx_dbm;
    out << YAML::Key << "max_tx_dbm" << YAML::Value << s.link.power.max_tx_dbm;
    out << YAML::Key << "step_db" << YAML::Value << s.link.power.step_db;
    out << YAML::Key << "power_control_interval_ms" << YAML::Value << to_ms(s.link.power_control_interval);
    out << YAML::Key << "ber_window" << YAML::Value << s.link.ber_window;
    out << YAML::Key << "lq_ber_lo" << YAML::Value << s.link.lq.ber_lo;
    out << YAML::Key << "lq_ber_hi" << YAML::Value << s.link.lq.ber_hi;
    out << YAML::Key << "retry_limit" << YAML::Value << s.link.retry_limit;
    out << YAML::Key << "mtu_bytes" << YAML::Value << s.link.mtu_bytes;
    out << YAML::Key << "paired" << YAML::Value << s.link.paired;
    out << YAML::Key << "auth_delay_ms" << YAML::Value << to_ms(s.link.auth_delay);
    out << YAML::EndMap;

    out << YAML::Key << "stream" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "ladder_kbps" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto bps : s.stream.ladder_bps) {
        out << bps / 1000.0;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "overhead" << YAML::Value << s.stream.overhead;
    out << YAML::Key << "frame_ms" << YAML::Value << to_ms(s.stream.stream.frame_duration);
    out << YAML::Key << "signalling_ms" << YAML::Value << to_ms(s.stream.stream.signalling_latency);
    out << YAML::Key << "initial_kbps" << YAML::Value << s.stream.initial_bps / 1000.0;
    out << YAML::Key << "max_queue_ms" << YAML::Value << to_ms(s.stream.max_queue_delay);
    out << YAML::Key << "bitrate_schedule" << YAML::Value << YAML::BeginSeq;
    for (const auto& [t, bps] : s.stream.bitrate_schedule) {
        out << YAML::Flow << YAML::BeginSeq << t << bps / 1000.0 << YAML::EndSeq;
    }
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "adaptation" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "window" << YAML::Value << s.controller.window;
    out << YAML::Key << "deadband" << YAML::Value << s.controller.deadband;
    out << YAML::Key << "trend_lag" << YAML::Value << s.controller.trend_lag;
    out << YAML::Key << "decision_ms" << YAML::Value << to_ms(s.controller.decision_interval);
    out << YAML::Key << "up_thresholds" << YAML::Value << YAML::Flow << s.controller.up_thresholds;
    out << YAML::Key << "down_thresholds" << YAML::Value << YAML::Flow << s.controller.down_thresholds;
    out << YAML::Key << "warn_lq" << YAML::Value << s.controller.warn_lq;
    out << YAML::Key << "warn_windows" << YAML::Value << s.controller.warn_windows;
    out << YAML::EndMap;

    out << YAML::Key << "power" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "p_receive_base_mw" << YAML::Value << s.power.p_receive_base_mw;
    out << YAML::Key << "alpha_receive_mw_per_kbps" << YAML::Value << s.power.alpha_receive_mw_per_kbps;
    out << YAML::Key << "p_decode_base_mw" << YAML::Value << s.power.p_decode_base_mw;
    out << YAML::Key << "alpha_decode_mw_per_kbps" << YAML::Value << s.power.alpha_decode_mw_per_kbps;
    out << YAML::Key << "p_output_mw" << YAML::Value << s.power.p_output_mw;
    out << YAML::EndMap;

    out << YAML::Key << "rtt" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "interval_ms" << YAML::Value << to_ms(s.rtt.interval);
    out << YAML::EndMap;

    out << YAML::Key << "inquiry" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "num_frequencies" << YAML::Value << s.inquiry.config.num_frequencies;
    out << YAML::Key << "train_size" << YAML::Value << s.inquiry.config.train_size;
    out << YAML::Key << "train_repetitions" << YAML::Value << s.inquiry.config.train_repetitions;
    out << YAML::Key << "train_switches" << YAML::Value << s.inquiry.config.train_switches;
    out << YAML::Key << "tx_power_dbm" << YAML::Value << s.inquiry.params.tx_power_dbm;
    out << YAML::Key << "response_bits" << YAML::Value << s.inquiry.params.response_bits;
    out << YAML::EndMap;

    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

Scenario with_overrides(const Scenario& s, const std::vector<std::string>& overrides) {
    if (overrides.empty()) {
        return s;
    }
    return parse_scenario(scenario_to_yaml(s), overrides);
}

}  // namespace btprox

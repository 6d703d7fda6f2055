#include "btprox/simulation.hpp"

#include <cmath>
#include <functional>
#include <string>

#include "btprox/channel.hpp"
#include "btprox/event_loop.hpp"
#include "btprox/link_manager.hpp"
#include "btprox/power.hpp"
#include "btprox/rng.hpp"
#include "btprox/streaming.hpp"

namespace btprox {

namespace {

// RNG stream ids under the scenario seed.
constexpr std::uint64_t kChannelStream = 0;
constexpr std::uint64_t kLinkStream = 1;
constexpr std::uint64_t kInquiryStream = 2;
constexpr std::uint64_t kProbeStream = 3;

enum Priority { kPowerControl = 0, kTraffic = 1, kSample = 2, kDecision = 3 };

const SimTime kGoodputWindow{1'000'000'000};

SimTime sample_time(std::uint64_t k, double rate_hz) {
    return from_seconds(static_cast<double>(k) / rate_hz);
}

/// State shared by the connected modes.
struct LinkSide {
    LinkSide(const Scenario& s)
        : channel([&] {
              ChannelConfig c = s.channel;
              c.rng_seed = derive_seed(s.seed, kChannelStream);
              return c;
          }()),
          link(LinkConfig{s.link.retry_limit,
                          s.toggles.piconet_load,
                          s.toggles.fec,
                          s.link.mtu_bytes,
                          {s.link.paired, s.link.auth_delay}},
               derive_seed(s.seed, kLinkStream)),
          pc(s.link.power),
          window(s.link.ber_window) {
        pc.enabled = s.toggles.power_control;
    }

    void power_control_tick(const Scenario& s, double d) {
        const RxSample rx = channel.sample(pc.tx_power_dbm, d);
        pc = power_control_step(compute_rssi(rx.rx_power_dbm, s.link.grpr), pc);
    }

    Rssi rssi_now(const Scenario& s, double d) {
        return compute_rssi(channel.sample(pc.tx_power_dbm, d).rx_power_dbm, s.link.grpr);
    }

    LinkQuality lq_now(const Scenario& s) const {
        return window.empty() ? LinkQuality{255} : compute_lq(window.mean(), s.link.lq);
    }

    void record_attempts(double ber, std::size_t attempts, bool delivered) {
        for (std::size_t i = 0; i < attempts; ++i) {
            window.push(ber);
        }
        attempted += attempts;
        delivered_count += delivered ? 1 : 0;
    }

    Channel channel;
    AclLink link;
    PowerControlState pc;
    BerWindow window;
    std::uint64_t attempted = 0;
    std::uint64_t delivered_count = 0;
    std::function<void(SimTime)> pc_tick;
};

void schedule_power_control(EventLoop& loop, const Scenario& s, LinkSide& side, SimTime end,
                            const bool& link_up) {
    if (!side.pc.enabled) {
        return;
    }
    const SimTime step = s.link.power_control_interval;
    side.pc_tick = [&loop, &s, &side, &link_up, step, end](SimTime now) {
        if (!link_up) {
            return;
        }
        side.power_control_tick(s, s.trajectory.distance_at(to_seconds(now)));
        if (now + step <= end) {
            loop.schedule(now + step, kPowerControl, side.pc_tick);
        }
    };
    if (step <= end) {
        loop.schedule(step, kPowerControl, side.pc_tick);
    }
}

void run_stream(const Scenario& s, ScenarioResult& out) {
    const SimTime end = from_seconds(s.duration_s);
    const BitrateLadder ladder = s.ladder();
    const ControllerConfig& ccfg = s.controller;

    std::uint32_t initial = s.stream.initial_bps == 0 ? ladder.top() : s.stream.initial_bps;
    std::size_t schedule_from = 0;
    if (!s.stream.bitrate_schedule.empty() && s.stream.bitrate_schedule.front().first <= 0.0) {
        initial = s.stream.bitrate_schedule.front().second;
        schedule_from = 1;
    }

    LinkSide side(s);
    A2dpStream stream(ladder, s.stream.stream);
    AdaptationController ctrl(ccfg, ladder.size(), *ladder.index_of(initial));
    EventLoop loop;
    bool link_up = true;

    const auto lose_link = [&](SimTime at) {
        link_up = false;
        out.link_loss_time = at;
        out.events.push_back({at, EventKind::LinkLoss, 0});
        if (stream.state() == StreamState::Streaming) {
            stream.close();
        }
    };

    const auto change_bitrate = [&](SimTime now, std::uint32_t bps) {
        if (stream.reconfigure_bitrate(now, bps)) {
            out.events.push_back({now, EventKind::BitrateChanged, bps});
        }
    };

    const SimTime ready = stream.configure(SimTime{0}, initial);
    out.events.push_back({SimTime{0}, EventKind::StreamConfigured, initial});
    std::function<void(SimTime)> frame_tick = [&](SimTime now) {
        if (!link_up || stream.state() != StreamState::Streaming) {
            return;
        }
        const AudioFrame frame = stream.next_frame();
        if (side.link.next_free() - now > s.stream.max_queue_delay) {
            stream.record_outcome(frame, false, now);
        } else {
            const double d = s.trajectory.distance_at(to_seconds(now));
            const auto air_bytes = static_cast<std::size_t>(
                std::ceil(static_cast<double>(frame.payload_bytes) * ladder.overhead() - 1e-9));
            SimTime done = now;
            bool ok = true;
            for (const AclPacket& pkt : segment_payload(air_bytes, s.toggles.fec)) {
                const double ber = side.channel.sample(side.pc.tx_power_dbm, d).ber;
                const SendResult r = side.link.send(pkt, Direction::MasterToSlave, now, ber);
                side.record_attempts(ber, r.attempts, r.delivered);
                done = r.end;
                if (!r.delivered) {
                    ok = false;
                    break;
                }
            }
            stream.record_outcome(frame, ok, done);
            if (!ok) {
                // Declared at hand-off time: conservative for warning lead time.
                lose_link(now);
                return;
            }
        }
        const SimTime next = stream.next_frame_time();
        if (next <= end) {
            loop.schedule(next, kTraffic, frame_tick);
        }
    };
    if (ready <= end) {
        loop.schedule(ready, kTraffic, [&](SimTime now) {
            stream.complete_signalling();
            stream.start(now);
            out.events.push_back({now, EventKind::StreamStarted, stream.bitrate()});
            frame_tick(now);
        });
    }

    for (std::size_t i = schedule_from; i < s.stream.bitrate_schedule.size(); ++i) {
        const auto [t_s, bps] = s.stream.bitrate_schedule[i];
        const SimTime at = from_seconds(t_s);
        if (at <= end) {
            loop.schedule(at, kTraffic, [&, bps = bps](SimTime now) {
                if (link_up && stream.state() == StreamState::Streaming) {
                    change_bitrate(now, bps);
                }
            });
        }
    }

    schedule_power_control(loop, s, side, end, link_up);

    std::function<void(SimTime)> sample_tick;
    std::uint64_t sample_k = 1;
    sample_tick = [&](SimTime now) {
        const double d = s.trajectory.distance_at(to_seconds(now));
        TraceRow row;
        row.time = now;
        row.distance_m = d;
        LinkMetricSample m;
        m.time = now;
        if (link_up) {
            m.rssi = side.rssi_now(s, d);
            m.lq = side.lq_now(s);
            m.attempted = side.attempted;
            m.delivered = side.delivered_count;
            row.rssi = m.rssi.value;
            out.rung_sequence.push_back(stream.rung());
        } else {
            m.lq = LinkQuality{0};
        }
        side.attempted = 0;
        side.delivered_count = 0;
        row.lq = m.lq.value;

        const bool was_warning = ctrl.warning() == Warning::Warning;
        const bool warning = ctrl.observe(m) == Warning::Warning;
        if (warning && !was_warning) {
            out.events.push_back({now, EventKind::Warning, 0});
            if (!out.first_warning_time) {
                out.first_warning_time = now;
            }
        }
        row.warning = warning;

        const double bps = link_up ? static_cast<double>(stream.bitrate()) : 0.0;
        row.bitrate_kbps = bps / 1000.0;
        row.goodput_kbps = link_up || !stream.outcomes().empty()
                               ? stream.delivery_report(now, kGoodputWindow).goodput_bps / 1000.0
                               : 0.0;
        row.power_mw = power_mw(bps, s.power);
        out.trace.append(row);

        ++sample_k;
        const SimTime next = sample_time(sample_k, s.sample_rate_hz);
        if (next <= end) {
            loop.schedule(next, kSample, sample_tick);
        }
    };
    if (const SimTime first = sample_time(1, s.sample_rate_hz); first <= end) {
        loop.schedule(first, kSample, sample_tick);
    }

    std::function<void(SimTime)> decide_tick = [&](SimTime now) {
        const Decision dec = ctrl.decide(now);
        out.decisions.push_back({now, dec.estimate.smoothed_lq, dec.estimate.trend, dec.rung,
                                 dec.warning == Warning::Warning});
        if (s.toggles.adaptation && link_up && stream.state() == StreamState::Streaming) {
            change_bitrate(now, ladder.at(dec.rung));
        }
        if (now + ccfg.decision_interval <= end) {
            loop.schedule(now + ccfg.decision_interval, kDecision, decide_tick);
        }
    };
    if (ccfg.decision_interval <= end) {
        loop.schedule(ccfg.decision_interval, kDecision, decide_tick);
    }

    loop.run_until(end);
    out.energy_j = scenario_energy_j(out.trace, s.power);
}

void run_rtt(const Scenario& s, ScenarioResult& out) {
    const SimTime end = from_seconds(s.duration_s);
    LinkSide side(s);
    EventLoop loop;
    bool link_up = true;
    const std::size_t packets_per_leg = segment_payload(s.link.mtu_bytes, s.toggles.fec).size();
    const std::uint64_t probe_base = derive_seed(s.seed, kProbeStream);

    schedule_power_control(loop, s, side, end, link_up);

    // Probes restart their numbering in every trajectory segment so that each
    // dwell point of a sweep sees the same loss draws.
    std::size_t segment = 0;
    std::uint64_t probe_k = 0;
    std::vector<double> pending_rtt_ms;

    std::function<void(SimTime)> probe_tick = [&](SimTime now) {
        if (!link_up) {
            return;
        }
        const double t_s = to_seconds(now);
        const std::size_t seg = s.trajectory.segment_at(t_s);
        if (seg != segment) {
            segment = seg;
            probe_k = 0;
        }
        const double d = s.trajectory.distance_at(t_s);
        const double ber = side.channel.sample(side.pc.tx_power_dbm, d).ber;
        Rng rng(derive_seed(probe_base, probe_k++));
        const RttResult r = rtt_probe(side.link, now, ber, d, rng);
        side.record_attempts(ber, 2 * packets_per_leg + r.retransmissions, r.ok());
        out.probes.push_back({now, d, r});
        if (!r.ok()) {
            link_up = false;
            out.link_loss_time = now;
            out.events.push_back({now, EventKind::LinkLoss, 0});
            return;
        }
        pending_rtt_ms.push_back(std::chrono::duration<double, std::milli>(r.rtt).count());
        if (now + s.rtt.interval <= end) {
            loop.schedule(now + s.rtt.interval, kTraffic, probe_tick);
        }
    };
    loop.schedule(SimTime{0}, kTraffic, probe_tick);

    std::uint64_t sample_k = 1;
    std::function<void(SimTime)> sample_tick = [&](SimTime now) {
        const double d = s.trajectory.distance_at(to_seconds(now));
        TraceRow row;
        row.time = now;
        row.distance_m = d;
        if (link_up) {
            row.rssi = side.rssi_now(s, d).value;
            row.lq = side.lq_now(s).value;
        } else {
            row.lq = 0;
        }
        if (!pending_rtt_ms.empty()) {
            double sum = 0.0;
            for (double v : pending_rtt_ms) {
                sum += v;
            }
            row.rtt_ms = sum / static_cast<double>(pending_rtt_ms.size());
            pending_rtt_ms.clear();
        }
        out.trace.append(row);
        ++sample_k;
        const SimTime next = sample_time(sample_k, s.sample_rate_hz);
        if (next <= end) {
            loop.schedule(next, kSample, sample_tick);
        }
    };
    if (const SimTime first = sample_time(1, s.sample_rate_hz); first <= end) {
        loop.schedule(first, kSample, sample_tick);
    }

    loop.run_until(end);
}

void run_inquiry(const Scenario& s, ScenarioResult& out) {
    const SimTime end = from_seconds(s.duration_s);
    ChannelConfig ccfg = s.channel;
    ccfg.rng_seed = derive_seed(s.seed, kChannelStream);
    Channel channel(ccfg);
    Rng rng(derive_seed(s.seed, kInquiryStream));
    const InquiryTimeline timeline = build_timeline(s.inquiry.config);

    // Procedures run back to back; only ones that finish inside the run count.
    for (SimTime start{0}; start + timeline.duration <= end; start += timeline.duration) {
        const auto at = [&](SimTime rel) { return s.trajectory.distance_at(to_seconds(start + rel)); };
        for (InquiryResponse r : inquiry_rssi_scan(at, timeline, s.inquiry.config, channel, s.inquiry.params, rng)) {
            r.time += start;
            TraceRow row;
            row.time = r.time;
            row.distance_m = r.distance_m;
            row.rssi = r.rssi.value;
            out.trace.append(row);
            out.responses.push_back(r);
        }
    }
}

}  // namespace

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::StreamConfigured: return "stream_configured";
        case EventKind::StreamStarted: return "stream_started";
        case EventKind::BitrateChanged: return "bitrate_changed";
        case EventKind::Warning: return "warning";
        case EventKind::LinkLoss: return "link_loss";
    }
    return "?";
}

std::string decisions_to_csv(std::span<const DecisionRecord> decisions) {
    std::string out = "time_s,smoothed_lq,trend,rung,warning\n";
    for (const auto& d : decisions) {
        out += format_fixed(to_seconds(d.time), 7);
        out += ',';
        out += format_fixed(d.smoothed_lq, 3);
        out += ',';
        out += to_string(d.trend);
        out += ',';
        out += std::to_string(d.rung);
        out += ',';
        out += d.warning ? '1' : '0';
        out += '\n';
    }
    return out;
}

ScenarioResult run_scenario(const Scenario& s) {
    s.validate();
    ScenarioResult out;
    switch (s.mode) {
        case ScenarioMode::Stream: run_stream(s, out); break;
        case ScenarioMode::Rtt: run_rtt(s, out); break;
        case ScenarioMode::Inquiry: run_inquiry(s, out); break;
    }
    return out;
}

}  // namespace btprox

// Acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <future>
#include <map>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "btprox/adaptation.hpp"
#include "btprox/figures.hpp"
#include "btprox/inquiry.hpp"
#include "btprox/link_manager.hpp"
#include "btprox/power.hpp"
#include "btprox/scenario.hpp"
#include "btprox/simulation.hpp"
#include "btprox/transport.hpp"

using namespace btprox;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct Stats {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    s.n = v.size();
    if (v.empty()) {
        return s;
    }
    s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) {
            ss += (x - s.mean) * (x - s.mean);
        }
        s.se = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    }
    return s;
}

// Last sample of each dwell point while the link is up.
std::map<double, TraceRow> steady_rows(const ScenarioTrace& trace) {
    std::map<double, TraceRow> out;
    for (const auto& row : trace.rows()) {
        out[row.distance_m] = row;
    }
    return out;
}

Scenario walk(double from_m, double to_m, double seconds, std::uint32_t initial_bps, std::uint64_t seed) {
    Scenario s = builtin_figure("adaptive-walk");
    s.name = "walk";
    s.seed = seed;
    s.trajectory.waypoints = {{0.0, from_m}, {seconds, to_m}};
    s.duration_s = seconds + 5.0;
    s.stream.initial_bps = initial_bps;
    return s;
}

Outcome inquiry_timing() {
    const InquiryConfig cfg;
    const InquiryTimeline tl = build_timeline(cfg);
    bool spacing = true;
    for (std::size_t i = 1; i < tl.events.size(); ++i) {
        spacing = spacing && tl.events[i].time - tl.events[i - 1].time == SimTime{312'500};
    }
    const bool span = tl.duration == SimTime{10'240'000'000} &&
                      tl.events.back().time + SimTime{312'500} == tl.duration && tl.events.front().time == SimTime{0};
    const bool pass = tl.hop_count() == 32768 && spacing && span;
    return {pass, fmt("%zu hops (%zu transmit, %zu listen), spacing %s, span %.6f s", tl.hop_count(),
                      tl.transmit_count(), tl.listen_count(), spacing ? "312.5 us" : "IRREGULAR",
                      to_seconds(tl.duration))};
}

Outcome throughput_cap() {
    const AclPacket dh5{5, 339, false, false};
    const SimTime ten_s{10'000'000'000};
    AclLink clean(LinkConfig{}, 7);
    const ThroughputReport r = run_saturating_schedule(clean, dh5, 0.0, ten_s);
    const double quantum = static_cast<double>(dh5.payload_bits()) / to_seconds(ten_s);
    const bool at_cap = std::abs(r.bits_per_second - kMaxAclBitsPerSecond) <= quantum;

    double worst_excess = -1e18;
    for (double ber : {0.0, 1e-6, 1e-5, 1e-4, 3e-4, 1e-3}) {
        for (bool fec : {false, true}) {
            for (int slots : {1, 3, 5}) {
                const AclPacket pkt{slots, packet_capacity(slots, fec), fec, false};
                LinkConfig lc;
                lc.fec = fec;
                AclLink link(lc, 11);
                const ThroughputReport tr = run_saturating_schedule(link, pkt, ber, ten_s);
                for (double w : {0.1, 1.0, 2.5, 10.0}) {
                    const SimTime win = from_seconds(w);
                    const double bps = effective_throughput(tr.schedule, win);
                    const double q = static_cast<double>(pkt.payload_bits()) / w;
                    worst_excess = std::max(worst_excess, bps - (kMaxAclBitsPerSecond + q));
                }
            }
        }
    }
    return {at_cap && worst_excess <= 0.0,
            fmt("error-free DH5 %.1f bps (cap 721000 +/- %.1f); worst margin over cap+quantum %.1f bps",
                r.bits_per_second, quantum, worst_excess)};
}

Outcome fig4_feedback() {
    const Scenario on = builtin_figure("fig4");
    const ScenarioResult ron = run_scenario(on);
    std::size_t in_range = 0;
    std::size_t zero = 0;
    for (const auto& [d, row] : steady_rows(ron.trace)) {
        bool reachable = false;
        for (double tx = on.link.power.min_tx_dbm; tx <= on.link.power.max_tx_dbm + 1e-9; tx += on.link.power.step_db) {
            reachable = reachable || on.link.grpr.contains(rx_sample(tx, d, on.channel).rx_power_dbm);
        }
        if (reachable && row.rssi) {
            ++in_range;
            zero += *row.rssi == 0 ? 1 : 0;
        }
    }

    const Scenario off = with_overrides(on, {"toggles.power_control=false"});
    const ScenarioResult roff = run_scenario(off);
    bool monotone = true;
    std::optional<int> prev;
    std::size_t points = 0;
    for (const auto& [d, row] : steady_rows(roff.trace)) {
        if (!row.rssi) {
            continue;
        }
        monotone = monotone && (!prev || *row.rssi <= *prev);
        prev = row.rssi;
        ++points;
    }
    // Connectionless inquiry RSSI, every response, ordered by distance.
    const ScenarioResult r3 = run_scenario(builtin_figure("fig3"));
    std::map<double, std::pair<int, int>> range;  // distance -> (min, max)
    for (const auto& resp : r3.responses) {
        auto [it, fresh] = range.try_emplace(resp.distance_m, resp.rssi.value, resp.rssi.value);
        it->second.first = std::min<int>(it->second.first, resp.rssi.value);
        it->second.second = std::max<int>(it->second.second, resp.rssi.value);
    }
    bool inquiry_monotone = true;
    std::optional<int> prev_min;
    for (const auto& [d, mm] : range) {
        inquiry_monotone = inquiry_monotone && (!prev_min || mm.second <= *prev_min);
        prev_min = mm.first;
    }
    const bool pass = in_range > 0 && zero == in_range && monotone && points > 1 && inquiry_monotone;
    return {pass, fmt("power control on: RSSI 0 at %zu/%zu reachable distances; off: non-increasing over %zu "
                      "connected points %s, inquiry %s over %zu points",
                      zero, in_range, points, monotone ? "yes" : "NO", inquiry_monotone ? "yes" : "NO",
                      range.size())};
}

Outcome fig7_lq() {
    const Scenario s = builtin_figure("fig7");
    const ScenarioResult r = run_scenario(s);
    bool monotone = true;
    int first = -1;
    int last = -1;
    int prev = 256;
    for (const auto& row : r.trace.rows()) {
        monotone = monotone && *row.lq <= prev;
        prev = *row.lq;
        if (first < 0) {
            first = *row.lq;
        }
        last = *row.lq;
    }
    const auto& rows = r.trace.rows();
    const bool dead_at_edge = r.link_loss_time.has_value() && rows.back().goodput_kbps.value_or(1.0) == 0.0;
    const double loss_ft = r.link_loss_time ? meters_to_feet(s.trajectory.distance_at(to_seconds(*r.link_loss_time))) : 0.0;
    return {monotone && first > last && dead_at_edge,
            fmt("LQ non-increasing %s, %d -> %d; delivery 0 from %.0f ft", monotone ? "yes" : "NO", first, last,
                loss_ft)};
}

std::vector<double> rtt_at(const Scenario& base, const std::vector<std::string>& sets) {
    const ScenarioResult r = run_scenario(with_overrides(base, sets));
    std::vector<double> v;
    for (const auto& p : r.probes) {
        if (p.result.ok()) {
            v.push_back(std::chrono::duration<double, std::micro>(p.result.rtt).count());
        }
    }
    return v;
}

Outcome rtt_confounds() {
    const Scenario s = builtin_figure("fig5");
    const ScenarioResult r = run_scenario(s);
    std::map<double, std::vector<double>> by_d;
    std::size_t timeouts = 0;
    for (const auto& p : r.probes) {
        if (p.result.ok()) {
            by_d[p.distance_m].push_back(std::chrono::duration<double, std::micro>(p.result.rtt).count());
        } else {
            ++timeouts;
        }
    }
    bool increasing = true;
    double prev = -1.0;
    std::size_t min_n = SIZE_MAX;
    for (const auto& [d, v] : by_d) {
        const double m = stats(v).mean;
        increasing = increasing && m > prev;
        prev = m;
        min_n = std::min(min_n, v.size());
    }

    // Fixed 26 ft, 200 probes per configuration.
    Scenario fixed = s;
    fixed.trajectory.waypoints = {{0.0, feet_to_meters(26.0)}};
    fixed.trajectory.interpolation = Interpolation::Step;
    fixed.duration_s = 10.0;
    const Stats base = stats(rtt_at(fixed, {}));
    const Stats fec = stats(rtt_at(fixed, {"toggles.fec=true"}));
    const Stats load = stats(rtt_at(fixed, {"toggles.piconet_load=0.3"}));
    const auto significant = [&](const Stats& x) {
        const double se = std::sqrt(base.se * base.se + x.se * x.se);
        return x.mean - base.mean > 3.0 * se && x.mean > base.mean;
    };
    const bool pass = increasing && min_n >= 200 && timeouts == 0 && significant(fec) && significant(load);
    return {pass, fmt("mean RTT strictly increasing over %zu distances (>= %zu probes each) %s; at 26 ft base "
                      "%.1f us, FEC %.1f us (+%.1f, 3SE %.1f), load 0.3 %.1f us (+%.1f, 3SE %.1f)",
                      by_d.size(), min_n, increasing ? "yes" : "NO", base.mean, fec.mean, fec.mean - base.mean,
                      3 * std::hypot(base.se, fec.se), load.mean, load.mean - base.mean,
                      3 * std::hypot(base.se, load.se))};
}

bool one_step_per_interval(const ScenarioResult& r, const BitrateLadder& ladder, SimTime interval) {
    std::optional<SimTime> last;
    std::optional<std::size_t> rung;
    for (const auto& ev : r.events) {
        if (ev.kind == EventKind::StreamConfigured) {
            rung = ladder.index_of(ev.bitrate_bps);
        }
        if (ev.kind != EventKind::BitrateChanged) {
            continue;
        }
        const std::size_t next = *ladder.index_of(ev.bitrate_bps);
        if (!rung || (next + 1 != *rung && next != *rung + 1)) {
            return false;
        }
        if (last && ev.time - *last < interval) {
            return false;
        }
        last = ev.time;
        rung = next;
    }
    return true;
}

Outcome monotone_response() {
    const Scenario away = walk(1.0, 16.0, 15.0, 320'000, 1);
    const Scenario toward = walk(11.0, 1.0, 10.0, 64'000, 1);
    const ScenarioResult ra = run_scenario(away);
    const ScenarioResult rt = run_scenario(toward);
    const auto& a = ra.rung_sequence;
    const auto& t = rt.rung_sequence;
    const bool down = std::is_sorted(a.rbegin(), a.rend());
    const bool up = std::is_sorted(t.begin(), t.end());
    const bool step_a = one_step_per_interval(ra, away.ladder(), away.controller.decision_interval);
    const bool step_t = one_step_per_interval(rt, toward.ladder(), toward.controller.decision_interval);
    const bool moved = !a.empty() && a.front() > a.back() && !t.empty() && t.back() > t.front();
    return {down && up && step_a && step_t && moved && !rt.link_loss_time,
            fmt("walk-away rungs %zu -> %zu non-increasing %s; walk-toward %zu -> %zu non-decreasing %s; "
                "one step per interval %s",
                a.empty() ? 0 : a.front(), a.empty() ? 0 : a.back(), down ? "yes" : "NO",
                t.empty() ? 0 : t.front(), t.empty() ? 0 : t.back(), up ? "yes" : "NO",
                step_a && step_t ? "yes" : "NO")};
}

Outcome hysteresis() {
    // Parked near rung boundaries with per-packet shadowing small enough that
    // smoothed LQ wanders less than the hysteresis gap.
    const double settle_s = 30.0;
    bool pass = true;
    std::string detail;
    for (double d : {8.5, 8.9, 9.3}) {
        Scenario s = builtin_figure("adaptive-walk");
        s.name = "parked";
        s.trajectory.waypoints = {{0.0, d}};
        s.duration_s = 600.0;
        s.channel.shadowing_sigma_db = 0.5;
        const ScenarioResult r = run_scenario(s);
        std::size_t changes = 0;
        for (const auto& ev : r.events) {
            changes += ev.kind == EventKind::BitrateChanged && to_seconds(ev.time) > settle_s ? 1 : 0;
        }
        double lo = 1e9;
        double hi = -1e9;
        for (const auto& dec : r.decisions) {
            if (to_seconds(dec.time) > settle_s) {
                lo = std::min(lo, dec.smoothed_lq);
                hi = std::max(hi, dec.smoothed_lq);
            }
        }
        const std::size_t rung = r.rung_sequence.empty() ? 0 : r.rung_sequence.back();
        const double gap = s.controller.up_thresholds[rung == 0 ? 1 : rung] -
                           s.controller.down_thresholds[rung == 0 ? 1 : rung];
        pass = pass && changes <= 2 && hi - lo < gap && !r.link_loss_time;
        detail += fmt("%s%.1f m: LQ %.1f..%.1f, %zu changes", detail.empty() ? "" : "; ", d, lo, hi, changes);
    }
    return {pass, detail + " (gap 15, 10 min each)"};
}

Outcome energy_saving() {
    std::size_t wins = 0;
    double min_saving = 1e18;
    std::vector<std::future<std::pair<double, double>>> jobs;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        jobs.push_back(std::async(std::launch::async, [seed] {
            Scenario a = builtin_figure("adaptive-walk");
            a.seed = seed;
            Scenario f = with_overrides(a, {"toggles.adaptation=false", "stream.initial_kbps=320"});
            return std::make_pair(run_scenario(a).energy_j, run_scenario(f).energy_j);
        }));
    }
    for (auto& j : jobs) {
        const auto [ea, ef] = j.get();
        wins += ea < ef ? 1 : 0;
        min_saving = std::min(min_saving, ef - ea);
    }
    const BitrateLadder ladder = BitrateLadder::standard();
    const PowerModel pm;
    bool ladder_increasing = true;
    for (std::size_t i = 1; i < ladder.size(); ++i) {
        ladder_increasing = ladder_increasing && power_mw(ladder.at(i), pm) > power_mw(ladder.at(i - 1), pm);
    }
    // The fig8 table itself: power per held bitrate.
    const ScenarioResult f8 = run_scenario(builtin_figure("fig8"));
    std::map<double, double> table;
    for (const auto& row : f8.trace.rows()) {
        table[*row.bitrate_kbps] = *row.power_mw;
    }
    bool table_increasing = table.size() == ladder.size();
    double prev = -1.0;
    for (const auto& [kbps, mw] : table) {
        table_increasing = table_increasing && mw > prev;
        prev = mw;
    }
    return {wins == 20 && ladder_increasing && table_increasing,
            fmt("adaptive < fixed-320 in %zu/20 seeds (smallest saving %.3f J); power strictly increasing over "
                "ladder %s, fig8 table %s",
                wins, min_saving, ladder_increasing ? "yes" : "NO", table_increasing ? "yes" : "NO")};
}

Outcome warning_precedes_loss() {
    std::vector<std::future<ScenarioResult>> jobs;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        jobs.push_back(std::async(std::launch::async, [seed] { return run_scenario(walk(1.0, 16.0, 15.0, 320'000, seed)); }));
    }
    std::size_t ahead = 0;
    std::size_t lost = 0;
    double min_lead = 1e18;
    std::vector<double> leads;
    for (auto& j : jobs) {
        const ScenarioResult r = j.get();
        if (!r.link_loss_time) {
            continue;
        }
        ++lost;
        if (r.first_warning_time && *r.first_warning_time < *r.link_loss_time) {
            ++ahead;
            const double lead = to_seconds(*r.link_loss_time - *r.first_warning_time);
            min_lead = std::min(min_lead, lead);
            leads.push_back(lead);
        }
    }
    std::sort(leads.begin(), leads.end());
    const double median = leads.empty() ? 0.0 : leads[leads.size() / 2];
    return {ahead >= 95 && lost == 100,
            fmt("warning before loss in %zu/100 seeds (%zu lost the link); lead min %.2f s, median %.2f s", ahead,
                lost, leads.empty() ? 0.0 : min_lead, median)};
}

Outcome determinism() {
    std::size_t same = 0;
    std::size_t total = 0;
    std::vector<Scenario> all;
    for (const auto& n : builtin_figure_names()) {
        all.push_back(builtin_figure(n));
    }
    Scenario noisy = builtin_figure("adaptive-walk");
    noisy.channel.shadowing_sigma_db = 3.0;
    noisy.name = "adaptive-walk-noisy";
    all.push_back(noisy);
    std::vector<std::future<bool>> jobs;
    for (const auto& s : all) {
        jobs.push_back(std::async(std::launch::async, [&s] {
            return run_scenario(s).trace.to_csv() == run_scenario(s).trace.to_csv();
        }));
    }
    for (auto& j : jobs) {
        same += j.get() ? 1 : 0;
        ++total;
    }
    return {same == total, fmt("%zu/%zu scenarios byte-identical across two runs", same, total)};
}

Outcome oracles() {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> ber_dist(0.0, 0.01);
    std::size_t mismatches = 0;
    double worst = 0.0;
    for (std::size_t w : {1u, 7u, 100u, 333u}) {
        BerWindow win(w);
        std::vector<double> all;
        for (int i = 0; i < 1000; ++i) {
            const double b = ber_dist(gen);
            all.push_back(b);
            const double got = win.push(b);
            const std::size_t n = std::min(all.size(), w);
            double sum = 0.0;
            for (std::size_t k = all.size() - n; k < all.size(); ++k) {
                sum += all[k];
            }
            const double err = std::abs(got - sum / static_cast<double>(n));
            worst = std::max(worst, err);
            mismatches += err > 1e-12 ? 1 : 0;
        }
    }

    ControllerConfig cfg = ControllerConfig::for_ladder(6);
    std::uniform_int_distribution<int> lq_dist(0, 255);
    std::vector<LinkMetricSample> samples;
    std::size_t smooth_mismatches = 0;
    for (int i = 0; i < 1000; ++i) {
        LinkMetricSample m;
        m.lq.value = static_cast<std::uint8_t>(lq_dist(gen));
        samples.push_back(m);
        const ProximityEstimate e = estimate_proximity(samples, cfg);
        const std::size_t n = std::min(samples.size(), cfg.window);
        double sum = 0.0;
        for (std::size_t k = samples.size() - n; k < samples.size(); ++k) {
            sum += samples[k].lq.value;
        }
        smooth_mismatches += std::abs(e.smoothed_lq - sum / static_cast<double>(n)) > 1e-9 ? 1 : 0;
    }

    // First-attempt delivery through the link itself.
    const double ber = 1e-4;
    const AclPacket dh5{5, 339, false, false};
    LinkConfig lc;
    lc.retry_limit = 1;
    AclLink link(lc, 99);
    std::size_t ok = 0;
    const std::size_t trials = 100'000;
    for (std::size_t i = 0; i < trials; ++i) {
        ok += link.send(dh5, Direction::MasterToSlave, link.next_free(), ber).delivered ? 1 : 0;
    }
    const double rate = static_cast<double>(ok) / static_cast<double>(trials);
    const double expect = std::pow(1.0 - ber, static_cast<double>(dh5.payload_bits()));
    const bool delivery_ok = std::abs(rate - expect) <= 0.01;
    return {mismatches == 0 && smooth_mismatches == 0 && delivery_ok,
            fmt("BER window %zu mismatches (max err %.2e), LQ smoothing %zu mismatches, delivery %.4f vs %.4f",
                mismatches, worst, smooth_mismatches, rate, expect)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "inquiry timing", 1.0, inquiry_timing},
        {2, "throughput cap", 5.0, throughput_cap},
        {3, "power control flattens RSSI", 5.0, fig4_feedback},
        {4, "LQ falls with distance", 5.0, fig7_lq},
        {5, "RTT confounds", 30.0, rtt_confounds},
        {6, "controller monotone response", 5.0, monotone_response},
        {7, "hysteresis stability", 5.0, hysteresis},
        {8, "energy saving", 30.0, energy_saving},
        {9, "warning precedes loss", 60.0, warning_precedes_loss},
        {10, "determinism", 10.0, determinism},
        {11, "oracle equivalences", 30.0, oracles},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs <= c.limit_s;
        const bool pass = o.pass && in_time;
        failed += pass ? 0 : 1;
        std::printf("%s %2d %s: %s [%.2f s of %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs, c.limit_s);
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}

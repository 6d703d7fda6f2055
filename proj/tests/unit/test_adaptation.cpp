#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "btprox/adaptation.hpp"
#include "btprox/errors.hpp"

using namespace btprox;

namespace {

LinkMetricSample sample(int lq, std::uint64_t attempted = 10, std::uint64_t delivered = 10, int rssi = 0) {
    LinkMetricSample m;
    m.lq.value = static_cast<std::uint8_t>(lq);
    m.rssi.value = static_cast<std::int8_t>(rssi);
    m.attempted = attempted;
    m.delivered = delivered;
    return m;
}

std::vector<LinkMetricSample> constant(int lq, std::size_t n) {
    return std::vector<LinkMetricSample>(n, sample(lq));
}

}  // namespace

TEST_CASE("default thresholds keep a gap and rise with the rung") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    CHECK_NOTHROW(cfg.validate(6));
    for (std::size_t r = 1; r < 6; ++r) {
        CHECK(cfg.down_thresholds[r] < cfg.up_thresholds[r]);
        if (r > 1) {
            CHECK(cfg.up_thresholds[r] > cfg.up_thresholds[r - 1]);
            CHECK(cfg.down_thresholds[r] > cfg.down_thresholds[r - 1]);
        }
    }
    CHECK(cfg.up_thresholds[1] == 150.0);
    CHECK(cfg.up_thresholds[5] == 245.0);
}

TEST_CASE("threshold validation") {
    ControllerConfig cfg = ControllerConfig::for_ladder(3);
    CHECK_THROWS_AS(cfg.validate(4), ConfigError);
    cfg.down_thresholds[2] = cfg.up_thresholds[2];
    CHECK_THROWS_AS(cfg.validate(3), ConfigError);
    cfg = ControllerConfig::for_ladder(3);
    cfg.up_thresholds[2] = cfg.up_thresholds[1] - 1.0;
    CHECK_THROWS_AS(cfg.validate(3), ConfigError);
}

TEST_CASE("trend") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    CHECK(estimate_proximity(constant(200, 40), cfg).trend == Trend::Stationary);
    std::vector<LinkMetricSample> rising;
    std::vector<LinkMetricSample> falling;
    for (int i = 0; i < 60; ++i) {
        rising.push_back(sample(60 + 3 * i));
        falling.push_back(sample(240 - 3 * i));
    }
    CHECK(estimate_proximity(rising, cfg).trend == Trend::Approaching);
    CHECK(estimate_proximity(falling, cfg).trend == Trend::Receding);
}

TEST_CASE("smoothing matches a brute-force mean on a ramp") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    std::vector<LinkMetricSample> s;
    for (int i = 0; i < 200; ++i) {
        s.push_back(sample((i * 37) % 256));
        const std::size_t n = std::min(s.size(), cfg.window);
        double sum = 0.0;
        for (std::size_t k = s.size() - n; k < s.size(); ++k) {
            sum += s[k].lq.value;
        }
        CHECK(estimate_proximity(s, cfg).smoothed_lq == doctest::Approx(sum / static_cast<double>(n)));
    }
}

TEST_CASE("rssi does not influence the estimate") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    std::mt19937_64 gen(1);
    std::uniform_int_distribution<int> lq(0, 255);
    std::uniform_int_distribution<int> rssi(-128, 127);
    std::vector<LinkMetricSample> a;
    std::vector<LinkMetricSample> b;
    for (int i = 0; i < 300; ++i) {
        const int q = lq(gen);
        a.push_back(sample(q, 10, 10, rssi(gen)));
        b.push_back(sample(q, 10, 10, rssi(gen)));
        const ProximityEstimate x = estimate_proximity(a, cfg);
        const ProximityEstimate y = estimate_proximity(b, cfg);
        CHECK(x.smoothed_lq == y.smoothed_lq);
        CHECK(x.trend == y.trend);
    }
}

TEST_CASE("full quality climbs one rung per decision to the top") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    ProximityEstimate e;
    e.smoothed_lq = 255.0;
    std::size_t rung = 0;
    for (std::size_t step = 1; step <= 5; ++step) {
        rung = select_bitrate(e, rung, cfg);
        CHECK(rung == step);
    }
    CHECK(select_bitrate(e, rung, cfg) == 5);
}

TEST_CASE("quality below every down threshold walks to the bottom") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    ProximityEstimate e;
    e.smoothed_lq = 10.0;
    std::size_t rung = 5;
    for (int i = 0; i < 10; ++i) {
        const std::size_t next = select_bitrate(e, rung, cfg);
        CHECK(rung - next <= 1);
        rung = next;
    }
    CHECK(rung == 0);
}

TEST_CASE("triangle wave inside the hysteresis gap causes no changes after settling") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    // Straddles up[3] = 188 with amplitude 6 < gap 15.
    AdaptationController c(cfg, 6, 5);
    std::size_t changes_after = 0;
    std::size_t prev = c.rung();
    for (int i = 0; i < 6000; ++i) {
        const int phase = i % 40;
        const int lq = 182 + (phase < 20 ? phase * 12 / 20 : (40 - phase) * 12 / 20);
        c.observe(sample(lq));
        if (i % 5 == 4) {
            const Decision d = c.decide(SimTime{i * 100'000'000LL});
            if (i > 600 && d.rung != prev) {
                ++changes_after;
            }
            prev = d.rung;
        }
    }
    CHECK(changes_after == 0);
}

TEST_CASE("warning") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    CHECK(check_disconnection_warning(constant(255, 40), cfg) == Warning::None);
    std::vector<LinkMetricSample> silent = constant(255, 30);
    for (std::size_t i = 0; i < cfg.warn_windows; ++i) {
        silent.push_back(sample(255, 0, 0));
    }
    CHECK(check_disconnection_warning(silent, cfg) == Warning::Warning);
    silent.back() = sample(255);
    CHECK(check_disconnection_warning(silent, cfg) == Warning::None);
    CHECK(check_disconnection_warning(constant(20, 40), cfg) == Warning::Warning);
}

TEST_CASE("controller warning agrees with the pure check") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    AdaptationController c(cfg, 6, 5);
    std::mt19937_64 gen(12);
    std::uniform_int_distribution<int> lq(100, 200);
    std::uniform_int_distribution<int> silent(0, 9);
    std::vector<LinkMetricSample> all;
    for (int i = 0; i < 2000; ++i) {
        const LinkMetricSample m = silent(gen) == 0 ? sample(lq(gen), 0, 0) : sample(lq(gen));
        all.push_back(m);
        CHECK(c.observe(m) == check_disconnection_warning(all, cfg));
    }
}

TEST_CASE("controller decisions match the pure functions") {
    const ControllerConfig cfg = ControllerConfig::for_ladder(6);
    AdaptationController c(cfg, 6, 2);
    std::mt19937_64 gen(4);
    std::uniform_int_distribution<int> lq(0, 255);
    std::vector<LinkMetricSample> all;
    std::size_t rung = 2;
    for (int i = 0; i < 1000; ++i) {
        all.push_back(sample(lq(gen)));
        c.observe(all.back());
        if (i % 5 == 4) {
            const Decision d = c.decide(SimTime{i});
            const ProximityEstimate e = estimate_proximity(all, cfg);
            CHECK(d.estimate.smoothed_lq == doctest::Approx(e.smoothed_lq));
            CHECK(d.estimate.trend == e.trend);
            rung = select_bitrate(e, rung, cfg);
            CHECK(d.rung == rung);
        }
    }
}

TEST_CASE("checkpoint round trip") {
    A2dpStream s(BitrateLadder::standard());
    s.configure(SimTime{0}, 192'000);
    s.complete_signalling();
    s.start(SimTime{40'000'000});
    for (int i = 0; i < 37; ++i) {
        s.next_frame();
    }
    const SavedSession saved = session_checkpoint(s);
    CHECK(saved.next_seq == 37);
    CHECK(saved.track_position_ns == 37 * 20'000'000LL);
    CHECK(SavedSession::parse(saved.serialize()) == saved);

    const A2dpStream resumed = resume_session(saved, BitrateLadder::standard());
    CHECK(resumed.state() == s.state());
    CHECK(resumed.bitrate() == s.bitrate());
    CHECK(resumed.rung() == s.rung());
    CHECK(resumed.track_position() == s.track_position());
    CHECK(session_checkpoint(resumed) == saved);
}

TEST_CASE("resuming later keeps the saved offset") {
    A2dpStream s(BitrateLadder::standard());
    s.configure(SimTime{0}, 64'000);
    s.complete_signalling();
    s.start(SimTime{0});
    for (int i = 0; i < 10; ++i) {
        s.next_frame();
    }
    const SavedSession saved = session_checkpoint(s);
    for (int i = 0; i < 10; ++i) {
        s.next_frame();
    }
    CHECK(resume_session(saved, BitrateLadder::standard()).track_position() == SimTime{200'000'000});
}

TEST_CASE("serialization is byte-stable") {
    SavedSession a;
    a.state = StreamState::Streaming;
    a.bitrate_bps = 128'000;
    a.rung = 2;
    a.next_seq = 1234;
    a.track_position_ns = 1234LL * 20'000'000;
    SavedSession b = a;
    CHECK(a.serialize() == b.serialize());
    CHECK(a.serialize() ==
          R"({"bitrate_bps":128000,"next_seq":1234,"rung":2,"state":"STREAMING","track_position_ns":24680000000,"version":1})");
}

TEST_CASE("checkpoint guards") {
    A2dpStream s(BitrateLadder::standard());
    CHECK_THROWS_AS(session_checkpoint(s), InvalidStateError);
    s.configure(SimTime{0}, 64'000);
    CHECK_NOTHROW(session_checkpoint(s, Warning::Warning));
    CHECK_THROWS_AS(SavedSession::parse("{"), ConfigError);
    SavedSession bad;
    bad.state = StreamState::Streaming;
    bad.bitrate_bps = 64'000;
    bad.next_seq = 3;
    bad.track_position_ns = 1;
    CHECK_THROWS_AS(resume_session(bad, BitrateLadder::standard()), ConfigError);
}

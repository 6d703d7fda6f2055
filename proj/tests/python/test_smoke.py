import math

import pytest

import btprox


def test_channel_and_link_quality():
    assert btprox.path_loss_db(3.0) == pytest.approx(40 + 27 * math.log10(3))
    assert btprox.ber_from_snr(0.0) == pytest.approx(0.5 * math.exp(-0.5))
    assert btprox.compute_rssi(-50.0) == 0
    assert btprox.compute_rssi(-35.0) == 5
    assert btprox.compute_lq(0.0) == 255
    assert btprox.compute_lq(0.5) == 0
    assert btprox.packet_success_probability(2744, False, 1e-4) == pytest.approx(0.9999 ** 2744)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        btprox.path_loss_db(0.5)
    with pytest.raises(btprox.ConfigError):
        btprox.run_yaml("mode: nonsense")
    with pytest.raises(btprox.ConfigError):
        btprox.run_figure("fig9")


def test_inquiry_timeline():
    tl = btprox.inquiry_timeline()
    assert tl["duration_s"] == pytest.approx(10.24)
    assert tl["hops"] == 32768


def test_power_rises_with_bitrate():
    rates = [64_000, 96_000, 128_000, 192_000, 256_000, 320_000]
    powers = [btprox.power_mw(r) for r in rates]
    assert powers == sorted(powers)
    assert len(set(powers)) == len(powers)


def test_figures_run_and_are_deterministic():
    assert "adaptive-walk" in btprox.figure_names()
    a = btprox.run_figure("adaptive-walk")
    b = btprox.run_figure("adaptive-walk")
    assert a.csv == b.csv
    assert a.link_loss_s is not None and a.first_warning_s < a.link_loss_s
    seq = a.rung_sequence
    assert all(x >= y for x, y in zip(seq, seq[1:]))
    assert a.csv.splitlines()[0] == "time_s,distance_ft,rssi,lq,rtt_ms,bitrate_kbps,goodput_kbps,power_mw,warning"


def test_yaml_round_trip_and_overrides():
    yaml = btprox.figure_yaml("fig5")
    r = btprox.run_yaml(yaml, ["duration_s=1"])
    assert len(r.probe_rtt_ms) == 21
    rows = btprox.rows(r)
    assert len(rows) == 10
    assert rows[0]["rtt_ms"] > 0

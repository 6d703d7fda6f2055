"""Bluetooth proximity estimation and adaptive audio streaming simulator."""

import csv
import io

from ._core import (
    ConfigError,
    DomainError,
    InvalidBitrateError,
    InvalidStateError,
    Result,
    ber_from_snr,
    compute_lq,
    compute_rssi,
    figure_names,
    figure_yaml,
    inquiry_timeline,
    packet_success_probability,
    path_loss_db,
    power_mw,
    run_figure,
    run_yaml,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "InvalidBitrateError",
    "InvalidStateError",
    "Result",
    "ber_from_snr",
    "compute_lq",
    "compute_rssi",
    "figure_names",
    "figure_yaml",
    "inquiry_timeline",
    "packet_success_probability",
    "path_loss_db",
    "power_mw",
    "rows",
    "run_figure",
    "run_yaml",
]


def rows(result):
    """Trace rows as dicts; empty cells become None."""
    out = []
    for r in csv.DictReader(io.StringIO(result.csv)):
        out.append({k: (float(v) if v != "" else None) for k, v in r.items()})
    return out

#pragma once

#include <span>

namespace btprox {

/// Sink-side power: receive, decode and analog output terms.
struct PowerModel {
    double p_receive_base_mw = 30.0;
    double alpha_receive_mw_per_kbps = 0.05;
    double p_decode_base_mw = 30.0;
    double alpha_decode_mw_per_kbps = 0.20;
    double p_output_mw = 20.0;

    void validate() const;
};

double power_mw(double bitrate_bps, const PowerModel& model);

/// A bitrate held from `time_s` until the next point.
struct BitratePoint {
    double time_s = 0.0;
    double bitrate_bps = 0.0;
};

/// Piecewise-constant integral of power over the points, joules.
/// Throws DomainError on non-increasing timestamps.
double energy_j(std::span<const BitratePoint> points, const PowerModel& model);

}  // namespace btprox

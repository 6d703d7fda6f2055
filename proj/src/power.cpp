#include "btprox/power.hpp"

#include <cmath>

#include "btprox/errors.hpp"

namespace btprox {

void PowerModel::validate() const {
    const double coeffs[] = {p_receive_base_mw, alpha_receive_mw_per_kbps, p_decode_base_mw,
                             alpha_decode_mw_per_kbps, p_output_mw};
    for (double c : coeffs) {
        if (!(c >= 0.0) || !std::isfinite(c)) {
            throw ConfigError("power model coefficients must be finite and >= 0");
        }
    }
    if (!(alpha_receive_mw_per_kbps > 0.0 || alpha_decode_mw_per_kbps > 0.0)) {
        throw ConfigError("power model needs a positive receive or decode slope");
    }
}

double power_mw(double bitrate_bps, const PowerModel& m) {
    if (!(bitrate_bps >= 0.0)) {
        throw DomainError("bitrate must be >= 0");
    }
    const double kbps = bitrate_bps / 1000.0;
    return m.p_receive_base_mw + m.p_decode_base_mw + m.p_output_mw +
           (m.alpha_receive_mw_per_kbps + m.alpha_decode_mw_per_kbps) * kbps;
}

double energy_j(std::span<const BitratePoint> points, const PowerModel& model) {
    double joules = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double dt = points[i].time_s - points[i - 1].time_s;
        if (!(dt > 0.0)) {
            throw DomainError("energy integration needs strictly increasing timestamps");
        }
        joules += power_mw(points[i - 1].bitrate_bps, model) * 1e-3 * dt;
    }
    return joules;
}

}  // namespace btprox

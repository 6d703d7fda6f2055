#include "btprox/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "btprox/errors.hpp"

namespace btprox {

void ChannelConfig::validate() const {
    if (!(ref_distance_m > 0.0)) {
        throw ConfigError("channel.ref_distance_m must be > 0");
    }
    if (!(path_loss_exponent > 0.0)) {
        throw ConfigError("channel.path_loss_exponent must be > 0");
    }
    if (!(shadowing_sigma_db >= 0.0)) {
        throw ConfigError("channel.shadowing_sigma_db must be >= 0");
    }
    if (!std::isfinite(ref_loss_db) || !std::isfinite(noise_floor_dbm)) {
        throw ConfigError("channel.ref_loss_db and channel.noise_floor_dbm must be finite");
    }
}

double path_loss_db(double d_m, const ChannelConfig& cfg, double noise_db) {
    if (!(d_m >= cfg.ref_distance_m)) {
        throw DomainError("distance " + std::to_string(d_m) +
                          " m is below the reference distance " +
                          std::to_string(cfg.ref_distance_m) + " m");
    }
    return cfg.ref_loss_db +
           10.0 * cfg.path_loss_exponent * std::log10(d_m / cfg.ref_distance_m) + noise_db;
}

double ber_from_snr(double snr_db) {
    if (std::isnan(snr_db)) {
        return kBerCeiling;
    }
    const double snr_linear = std::pow(10.0, snr_db / 10.0);
    const double ber = 0.5 * std::exp(-snr_linear / 2.0);
    return std::clamp(ber, kBerFloor, kBerCeiling);
}

RxSample rx_sample(double tx_power_dbm, double d_m, const ChannelConfig& cfg, double noise_db) {
    RxSample s;
    s.rx_power_dbm = tx_power_dbm - path_loss_db(d_m, cfg, noise_db);
    s.snr_db = s.rx_power_dbm - cfg.noise_floor_dbm;
    s.ber = ber_from_snr(s.snr_db);
    return s;
}

Channel::Channel(ChannelConfig cfg)
    : cfg_(cfg), rng_(cfg.rng_seed), shadowing_(0.0, cfg.shadowing_sigma_db > 0.0 ? cfg.shadowing_sigma_db : 1.0) {
    cfg_.validate();
}

RxSample Channel::sample(double tx_power_dbm, double d_m) {
    double noise = 0.0;
    if (cfg_.shadowing_sigma_db > 0.0) {
        noise = shadowing_(rng_);
    }
    return rx_sample(tx_power_dbm, d_m, cfg_, noise);
}

RxSample Channel::mean_sample(double tx_power_dbm, double d_m) const {
    return rx_sample(tx_power_dbm, d_m, cfg_, 0.0);
}

}  // namespace btprox

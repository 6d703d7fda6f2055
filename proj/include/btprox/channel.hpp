#pragma once

#include <cstdint>
#include <random>

#include "btprox/rng.hpp"

namespace btprox {

/// Log-distance propagation with optional log-normal shadowing.
struct ChannelConfig {
    double ref_distance_m = 1.0;
    double ref_loss_db = 40.0;
    double path_loss_exponent = 2.7;
    double shadowing_sigma_db = 0.0;
    double noise_floor_dbm = -75.0;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

struct RxSample {
    double rx_power_dbm = 0.0;
    double snr_db = 0.0;
    double ber = 0.5;
};

inline constexpr double kBerFloor = 1e-8;
inline constexpr double kBerCeiling = 0.5;

/// Path loss at distance `d_m`; `noise_db` is an additive shadowing term.
/// Throws DomainError below the reference distance.
double path_loss_db(double d_m, const ChannelConfig& cfg, double noise_db = 0.0);

/// Noncoherent binary FSK: 0.5 * exp(-snr/2), clamped to [kBerFloor, 0.5].
double ber_from_snr(double snr_db);

/// Deterministic receive sample for an explicit shadowing term.
RxSample rx_sample(double tx_power_dbm, double d_m, const ChannelConfig& cfg, double noise_db = 0.0);

/// Channel instance owning the shadowing RNG of one simulation.
class Channel {
public:
    explicit Channel(ChannelConfig cfg);

    /// Draws shadowing (when sigma > 0) and returns the resulting sample.
    RxSample sample(double tx_power_dbm, double d_m);

    /// Sample with the shadowing term fixed at zero. Consumes no randomness.
    RxSample mean_sample(double tx_power_dbm, double d_m) const;

    const ChannelConfig& config() const { return cfg_; }

private:
    ChannelConfig cfg_;
    Rng rng_;
    std::normal_distribution<double> shadowing_;
};

}  // namespace btprox

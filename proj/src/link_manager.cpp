#include "btprox/link_manager.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "btprox/errors.hpp"

namespace btprox {

void Grpr::validate() const {
    if (!(lower_dbm < upper_dbm)) {
        throw ConfigError("grpr lower threshold must be below the upper threshold");
    }
}

void LqMapping::validate() const {
    if (!(ber_lo > 0.0 && ber_lo < ber_hi && ber_hi <= 0.5)) {
        throw ConfigError("lq mapping requires 0 < ber_lo < ber_hi <= 0.5");
    }
}

void PowerControlState::validate() const {
    if (!(min_tx_dbm <= max_tx_dbm)) {
        throw ConfigError("power control min_tx_dbm must not exceed max_tx_dbm");
    }
    if (!(step_db > 0.0)) {
        throw ConfigError("power control step_db must be > 0");
    }
    if (tx_power_dbm < min_tx_dbm || tx_power_dbm > max_tx_dbm) {
        throw ConfigError("power control tx_power_dbm outside [min_tx_dbm, max_tx_dbm]");
    }
}

Rssi compute_rssi(double rx_power_dbm, const Grpr& grpr) {
    if (grpr.contains(rx_power_dbm)) {
        return Rssi{0};
    }
    // std::round is half-away-from-zero.
    if (rx_power_dbm > grpr.upper_dbm) {
        const double offset = std::round(rx_power_dbm - grpr.upper_dbm);
        return Rssi{static_cast<std::int8_t>(std::clamp(offset, 1.0, 127.0))};
    }
    const double offset = std::round(rx_power_dbm - grpr.lower_dbm);
    if (std::isnan(offset)) {
        return Rssi{-128};
    }
    return Rssi{static_cast<std::int8_t>(std::clamp(offset, -128.0, -1.0))};
}

LinkQuality compute_lq(double avg_ber, const LqMapping& mapping) {
    if (!(avg_ber >= 0.0 && avg_ber <= 0.5)) {
        throw DomainError("average BER " + std::to_string(avg_ber) + " outside [0, 0.5]");
    }
    if (avg_ber <= mapping.ber_lo) {
        return LinkQuality{255};
    }
    if (avg_ber >= mapping.ber_hi) {
        return LinkQuality{0};
    }
    const double span = std::log10(mapping.ber_hi) - std::log10(mapping.ber_lo);
    const double scaled = 255.0 * (std::log10(mapping.ber_hi) - std::log10(avg_ber)) / span;
    return LinkQuality{static_cast<std::uint8_t>(std::clamp(std::round(scaled), 0.0, 255.0))};
}

BerWindow::BerWindow(std::size_t capacity) : ring_(capacity, 0.0) {
    if (capacity == 0) {
        throw ConfigError("BER window size must be >= 1");
    }
}

double BerWindow::push(double ber) {
    if (count_ == ring_.size()) {
        sum_ -= ring_[head_];
    } else {
        ++count_;
    }
    ring_[head_] = ber;
    sum_ += ber;
    head_ = (head_ + 1) % ring_.size();
    // Bound floating-point drift of the running sum.
    if (++since_resync_ >= ring_.size()) {
        since_resync_ = 0;
        sum_ = 0.0;
        for (std::size_t i = 0; i < count_; ++i) {
            sum_ += ring_[(head_ + ring_.size() - count_ + i) % ring_.size()];
        }
    }
    return mean();
}

double BerWindow::mean() const {
    if (count_ == 0) {
        return 0.0;
    }
    return std::max(0.0, sum_) / static_cast<double>(count_);
}

void BerWindow::clear() {
    std::fill(ring_.begin(), ring_.end(), 0.0);
    head_ = 0;
    count_ = 0;
    since_resync_ = 0;
    sum_ = 0.0;
}

PowerControlState power_control_step(Rssi rssi, PowerControlState state) {
    if (!state.enabled) {
        return state;
    }
    if (rssi.value > 0) {
        state.tx_power_dbm = std::max(state.min_tx_dbm, state.tx_power_dbm - state.step_db);
    } else if (rssi.value < 0) {
        state.tx_power_dbm = std::min(state.max_tx_dbm, state.tx_power_dbm + state.step_db);
    }
    return state;
}

}  // namespace btprox

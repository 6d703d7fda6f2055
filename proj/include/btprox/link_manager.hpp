#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "btprox/units.hpp"

namespace btprox {

/// Golden Receiver Power Range in dBm.
struct Grpr {
    double lower_dbm = -60.0;
    double upper_dbm = -40.0;

    void validate() const;
    bool contains(double rx_dbm) const { return rx_dbm >= lower_dbm && rx_dbm <= upper_dbm; }
};

/// Signed dB offset of the received power from the GRPR; 0 inside it.
struct Rssi {
    std::int8_t value = 0;
    auto operator<=>(const Rssi&) const = default;
};

/// Receiver-side link quality, 0..255, larger is better.
struct LinkQuality {
    std::uint8_t value = 255;
    auto operator<=>(const LinkQuality&) const = default;
};

/// Log-linear BER -> LQ mapping bounds.
struct LqMapping {
    double ber_lo = 1e-6;  // at or below: 255
    double ber_hi = 1e-1;  // at or above: 0

    void validate() const;
};

Rssi compute_rssi(double rx_power_dbm, const Grpr& grpr);

/// Throws DomainError when avg_ber is outside [0, 0.5].
LinkQuality compute_lq(double avg_ber, const LqMapping& mapping = {});

/// Sliding arithmetic mean over the last W per-packet BER values.
class BerWindow {
public:
    explicit BerWindow(std::size_t capacity);

    /// Adds one per-packet BER and returns the updated mean.
    double push(double ber);

    double mean() const;
    std::size_t size() const { return count_; }
    std::size_t capacity() const { return ring_.size(); }
    bool empty() const { return count_ == 0; }
    void clear();

private:
    std::vector<double> ring_;
    std::size_t head_ = 0;
    std::size_t count_ = 0;
    std::size_t since_resync_ = 0;
    double sum_ = 0.0;
};

struct PowerControlState {
    double tx_power_dbm = 4.0;
    double min_tx_dbm = -20.0;
    double max_tx_dbm = 4.0;
    double step_db = 2.0;
    bool enabled = true;

    void validate() const;
};

/// One Link Manager feedback step: positive RSSI asks the peer to lower its
/// output power, negative asks it to raise it. Disabled state is returned as is.
PowerControlState power_control_step(Rssi rssi, PowerControlState state);

/// Host-visible reading consumed by the adaptation controller.
struct LinkMetricSample {
    SimTime time{0};
    Rssi rssi;
    LinkQuality lq;
    std::uint64_t delivered = 0;
    std::uint64_t attempted = 0;

    /// Fraction of attempted packets that were delivered; 0 when nothing was heard.
    double delivery_ratio() const {
        return attempted == 0 ? 0.0 : static_cast<double>(delivered) / static_cast<double>(attempted);
    }
};

}  // namespace btprox

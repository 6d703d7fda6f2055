#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "btprox/channel.hpp"
#include "btprox/link_manager.hpp"
#include "btprox/rng.hpp"
#include "btprox/units.hpp"

namespace btprox {

struct InquiryConfig {
    std::size_t num_frequencies = 32;
    std::size_t train_size = 16;
    SimTime hop_period{312'500};
    std::size_t train_repetitions = 256;
    std::size_t train_switches = 4;

    void validate() const;

    /// One pass over a train: train_size slots.
    SimTime train_duration() const { return static_cast<std::int64_t>(train_size) * kSlot; }
    SimTime total_duration() const {
        return static_cast<std::int64_t>(train_switches * train_repetitions) * train_duration();
    }
};

enum class Train { A, B };
enum class HopKind { Transmit, Listen };

struct InquiryEvent {
    SimTime time{0};
    HopKind kind = HopKind::Transmit;
    std::size_t frequency = 0;
    Train train = Train::A;
};

/// Inquirer hop schedule. Every entry is one frequency hop.
struct InquiryTimeline {
    std::vector<InquiryEvent> events;
    SimTime duration{0};

    std::size_t hop_count() const { return events.size(); }
    std::size_t transmit_count() const;
    std::size_t listen_count() const { return hop_count() - transmit_count(); }
};

/// Each TX slot sends on two frequencies of the current train, the following
/// slot listens on the same two in order. Trains alternate A, B, A, ... after
/// `train_repetitions` passes each.
InquiryTimeline build_timeline(const InquiryConfig& cfg);

struct InquiryScanParams {
    double tx_power_dbm = 4.0;       // no connection, so no power control
    std::size_t response_bits = 366; // FHS response on air
    Grpr grpr;
};

struct InquiryResponse {
    SimTime time{0};  // relative to scan start
    double distance_m = 0.0;
    double rx_power_dbm = 0.0;
    Rssi rssi;
};

/// Runs one full inquiry procedure. A listen hop catches the responder with
/// probability 1/num_frequencies; the response then survives with the BER
/// packet-success probability. Empty result means nothing was heard.
std::vector<InquiryResponse> inquiry_rssi_scan(const std::function<double(SimTime)>& distance_at,
                                               const InquiryTimeline& timeline,
                                               const InquiryConfig& cfg, Channel& channel,
                                               const InquiryScanParams& params, Rng& rng);

std::vector<InquiryResponse> inquiry_rssi_scan(double d_m, const InquiryConfig& cfg, Channel& channel,
                                               const InquiryScanParams& params, Rng& rng);

}  // namespace btprox

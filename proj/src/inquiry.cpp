#include "btprox/inquiry.hpp"

#include <algorithm>

#include "btprox/errors.hpp"
#include "btprox/transport.hpp"

namespace btprox {

void InquiryConfig::validate() const {
    if (train_size == 0 || train_size % 2 != 0) {
        throw ConfigError("inquiry.train_size must be a positive even count");
    }
    if (num_frequencies != 2 * train_size) {
        throw ConfigError("inquiry.num_frequencies must equal 2 * train_size");
    }
    if (hop_period * 2 != kSlot) {
        throw ConfigError("inquiry hop period must be half a 625 us slot");
    }
    if (train_repetitions == 0 || train_switches == 0) {
        throw ConfigError("inquiry repetitions and switches must be >= 1");
    }
}

std::size_t InquiryTimeline::transmit_count() const {
    return static_cast<std::size_t>(std::count_if(events.begin(), events.end(), [](const InquiryEvent& e) {
        return e.kind == HopKind::Transmit;
    }));
}

InquiryTimeline build_timeline(const InquiryConfig& cfg) {
    cfg.validate();
    InquiryTimeline timeline;
    const std::size_t passes = cfg.train_switches * cfg.train_repetitions;
    timeline.events.reserve(passes * cfg.train_size * 2);

    for (std::size_t pass = 0; pass < passes; ++pass) {
        const Train train = (pass / cfg.train_repetitions) % 2 == 0 ? Train::A : Train::B;
        const std::size_t base_freq = train == Train::A ? 0 : cfg.train_size;
        const SimTime pass_start = static_cast<std::int64_t>(pass) * cfg.train_duration();

        for (std::size_t pair = 0; pair < cfg.train_size / 2; ++pair) {
            const SimTime tx_slot = pass_start + static_cast<std::int64_t>(2 * pair) * kSlot;
            const std::size_t f0 = base_freq + 2 * pair;
            const std::size_t f1 = f0 + 1;
            timeline.events.push_back({tx_slot, HopKind::Transmit, f0, train});
            timeline.events.push_back({tx_slot + cfg.hop_period, HopKind::Transmit, f1, train});
            timeline.events.push_back({tx_slot + kSlot, HopKind::Listen, f0, train});
            timeline.events.push_back({tx_slot + kSlot + cfg.hop_period, HopKind::Listen, f1, train});
        }
    }
    timeline.duration = static_cast<std::int64_t>(passes) * cfg.train_duration();
    return timeline;
}

std::vector<InquiryResponse> inquiry_rssi_scan(const std::function<double(SimTime)>& distance_at,
                                               const InquiryTimeline& timeline,
                                               const InquiryConfig& cfg, Channel& channel,
                                               const InquiryScanParams& params, Rng& rng) {
    const double match_probability = 1.0 / static_cast<double>(cfg.num_frequencies);
    std::vector<InquiryResponse> responses;

    for (const auto& ev : timeline.events) {
        if (ev.kind != HopKind::Listen) {
            continue;
        }
        if (uniform01(rng) >= match_probability) {
            continue;
        }
        const double d = distance_at(ev.time);
        const RxSample rx = channel.sample(params.tx_power_dbm, d);
        const double success = packet_success_probability(params.response_bits, false, rx.ber);
        if (uniform01(rng) >= success) {
            continue;
        }
        responses.push_back({ev.time, d, rx.rx_power_dbm, compute_rssi(rx.rx_power_dbm, params.grpr)});
    }
    return responses;
}

std::vector<InquiryResponse> inquiry_rssi_scan(double d_m, const InquiryConfig& cfg, Channel& channel,
                                               const InquiryScanParams& params, Rng& rng) {
    const InquiryTimeline timeline = build_timeline(cfg);
    return inquiry_rssi_scan([d_m](SimTime) { return d_m; }, timeline, cfg, channel, params, rng);
}

}  // namespace btprox

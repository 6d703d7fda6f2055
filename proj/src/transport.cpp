#include "btprox/transport.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "btprox/errors.hpp"

namespace btprox {

namespace {

constexpr std::size_t kFecDataBits = 10;
constexpr std::size_t kFecBlockBits = 15;
constexpr int kPacketTypes[] = {1, 3, 5};

std::size_t dh5_bits() { return packet_capacity(5, false) * 8; }

}  // namespace

std::size_t packet_capacity(int slots, bool fec) {
    std::size_t bytes = 0;
    switch (slots) {
        case 1: bytes = 27; break;
        case 3: bytes = 183; break;
        case 5: bytes = 339; break;
        default: throw DomainError("ACL packets span 1, 3 or 5 slots, got " + std::to_string(slots));
    }
    return fec ? bytes * 2 / 3 : bytes;
}

void validate_packet(const AclPacket& pkt) {
    const std::size_t cap = packet_capacity(pkt.slots, pkt.fec);
    if (pkt.payload_bytes > cap) {
        throw DomainError("payload of " + std::to_string(pkt.payload_bytes) + " bytes exceeds " +
                          std::to_string(cap) + "-byte capacity");
    }
}

double packet_success_probability(std::size_t payload_bits, bool fec, double ber) {
    if (!(ber >= 0.0 && ber <= 1.0)) {
        throw DomainError("bit error rate must lie in [0, 1]");
    }
    if (payload_bits == 0 || ber == 0.0) {
        return 1.0;
    }
    if (!fec) {
        return std::exp(static_cast<double>(payload_bits) * std::log1p(-ber));
    }
    const double blocks = std::ceil(static_cast<double>(payload_bits) / kFecDataBits);
    const double n = static_cast<double>(kFecBlockBits);
    const double block_ok = std::exp(n * std::log1p(-ber)) +
                            n * ber * std::exp((n - 1.0) * std::log1p(-ber));
    return std::exp(blocks * std::log(std::min(1.0, block_ok)));
}

double packet_success_probability(const AclPacket& pkt, double ber) {
    return packet_success_probability(pkt.payload_bits(), pkt.fec, ber);
}

std::vector<AclPacket> segment_payload(std::size_t bytes, bool fec) {
    std::vector<AclPacket> out;
    const std::size_t largest = packet_capacity(5, fec);
    while (bytes > largest) {
        out.push_back({5, largest, fec, false});
        bytes -= largest;
    }
    if (bytes > 0) {
        for (int slots : kPacketTypes) {
            if (bytes <= packet_capacity(slots, fec)) {
                out.push_back({slots, bytes, fec, false});
                break;
            }
        }
    }
    return out;
}

void LinkConfig::validate() const {
    if (retry_limit == 0) {
        throw ConfigError("link.retry_limit must be >= 1");
    }
    if (!(piconet_load >= 0.0 && piconet_load < 1.0)) {
        throw ConfigError("link.piconet_load must lie in [0, 1)");
    }
    if (mtu_bytes == 0) {
        throw ConfigError("link.mtu_bytes must be >= 1");
    }
    if (pairing.auth_delay < SimTime{0}) {
        throw ConfigError("link.auth_delay must be >= 0");
    }
}

AclLink::AclLink(LinkConfig cfg, std::uint64_t seed)
    : cfg_(cfg), loss_rng_(derive_seed(seed, 0)), sched_rng_(derive_seed(seed, 1)) {
    cfg_.validate();
    for (auto& b : buckets_) {
        b.tokens = static_cast<double>(dh5_bits());
    }
}

void AclLink::log(SimTime start, int slots, Device device) {
    if (record_air_) {
        air_log_.push_back({start, slots, device});
    }
}

SimTime AclLink::acquire_pair(SimTime earliest) {
    SimTime t = std::max(earliest, next_free_);
    const auto rem = t.count() % kSlotPair.count();
    if (rem != 0) {
        t += kSlotPair - SimTime{rem};
    }
    while (cfg_.piconet_load > 0.0 && uniform01(sched_rng_) < cfg_.piconet_load) {
        log(t, 1, Device::Master);
        log(t + kSlot, 1, Device::OtherSlave);
        t += kSlotPair;
    }
    return t;
}

bool AclLink::take_tokens(Direction dir, SimTime at, std::size_t bits) {
    Bucket& b = buckets_[dir == Direction::MasterToSlave ? 0 : 1];
    // Two packets deep so the sub-slot remainder of each refill is not thrown away.
    const double depth = 2.0 * static_cast<double>(dh5_bits());
    const double refill = kMaxAclBitsPerSecond * to_seconds(at - b.updated);
    const double available = std::min(depth, b.tokens + refill);
    if (available + 1e-9 < static_cast<double>(bits)) {
        return false;
    }
    b.tokens = available - static_cast<double>(bits);
    b.updated = at;
    return true;
}

SendResult AclLink::send(const AclPacket& pkt, Direction dir, SimTime ready, double ber, double u) {
    validate_packet(pkt);
    const double p = packet_success_probability(pkt, ber);

    // Failures before the first success, geometric via inverse CDF.
    std::size_t failures = 0;
    if (p <= 0.0) {
        failures = cfg_.retry_limit;
    } else if (p < 1.0) {
        const double tail = std::log1p(-std::clamp(u, 0.0, std::nextafter(1.0, 0.0)));
        const double k = std::floor(tail / std::log1p(-p));
        failures = k >= static_cast<double>(cfg_.retry_limit) ? cfg_.retry_limit : static_cast<std::size_t>(k);
    }

    SendResult result;
    const SimTime hold = static_cast<std::int64_t>(pkt.slots + 1) * kSlot;
    SimTime t = acquire_pair(ready);
    while (!take_tokens(dir, t, pkt.payload_bits())) {
        next_free_ = t + kSlotPair;
        t = acquire_pair(next_free_);
    }
    result.start = t;

    const std::size_t max_attempts = std::min(failures + 1, cfg_.retry_limit);
    for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
        if (attempt > 0) {
            t = acquire_pair(next_free_);
        }
        if (dir == Direction::MasterToSlave) {
            log(t, pkt.slots, Device::Master);
            log(t + static_cast<std::int64_t>(pkt.slots) * kSlot, 1, Device::Slave);
        } else {
            log(t, 1, Device::Master);
            log(t + kSlot, pkt.slots, Device::Slave);
        }
        next_free_ = t + hold;
        ++result.attempts;
    }
    result.end = next_free_;
    result.delivered = failures < cfg_.retry_limit;
    return result;
}

SendResult AclLink::send(const AclPacket& pkt, Direction dir, SimTime ready, double ber) {
    return send(pkt, dir, ready, ber, uniform01(loss_rng_));
}

RttResult rtt_probe(AclLink& link, SimTime issue, double ber, double distance_m, Rng& loss_rng) {
    RttResult r;
    const auto packets = segment_payload(link.config().mtu_bytes, link.config().fec);

    SimTime t = issue;
    for (Direction dir : {Direction::MasterToSlave, Direction::SlaveToMaster}) {
        for (const auto& pkt : packets) {
            const SendResult s = link.send(pkt, dir, t, ber, uniform01(loss_rng));
            r.retransmissions += s.attempts - 1;
            t = s.end;
            if (!s.delivered) {
                r.status = RttResult::Status::Timeout;
                r.slot_time = t - issue;
                return r;
            }
        }
    }
    r.slot_time = t - issue;
    r.propagation = SimTime{static_cast<std::int64_t>(std::llround(2.0 * distance_m / kSpeedOfLight * 1e9))};
    if (!link.config().pairing.paired) {
        r.auth_delay = link.config().pairing.auth_delay;
    }
    r.rtt = r.slot_time + r.propagation + r.auth_delay;
    return r;
}

double effective_throughput(std::span<const TxRecord> schedule, SimTime window) {
    if (window <= SimTime{0}) {
        throw DomainError("throughput window must be > 0");
    }
    std::uint64_t bits = 0;
    for (const auto& rec : schedule) {
        if (rec.delivered && rec.end <= window) {
            bits += rec.payload_bits;
        }
    }
    return static_cast<double>(bits) / to_seconds(window);
}

ThroughputReport run_saturating_schedule(AclLink& link, const AclPacket& pkt, double ber, SimTime duration) {
    ThroughputReport report;
    const SimTime hold = static_cast<std::int64_t>(pkt.slots + 1) * kSlot;
    while (link.next_free() + hold <= duration) {
        const SendResult s = link.send(pkt, Direction::MasterToSlave, link.next_free(), ber);
        if (s.end > duration) {
            break;
        }
        report.attempts += s.attempts;
        if (s.delivered) {
            ++report.delivered_packets;
        }
        report.schedule.push_back({s.end, pkt.payload_bits(), s.delivered});
    }
    report.bits_per_second = effective_throughput(report.schedule, duration);
    return report;
}

}  // namespace btprox

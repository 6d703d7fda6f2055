#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "btprox/rng.hpp"
#include "btprox/units.hpp"

namespace btprox {

/// ACL baseband packet. `slots` is 1, 3 or 5; FEC selects the DM variant.
struct AclPacket {
    int slots = 1;
    std::size_t payload_bytes = 0;
    bool fec = false;
    bool is_retransmission = false;

    std::size_t payload_bits() const { return payload_bytes * 8; }
};

/// Payload capacity in bytes: 27/183/339 unprotected, 18/122/226 with FEC.
std::size_t packet_capacity(int slots, bool fec);

/// Throws DomainError when slots or payload size are not a legal combination.
void validate_packet(const AclPacket& pkt);

/// Probability that one transmission of `payload_bits` arrives intact.
/// Without FEC: (1-ber)^bits. With FEC every 10 payload bits travel in a
/// 15-bit shortened Hamming block that corrects one error.
double packet_success_probability(std::size_t payload_bits, bool fec, double ber);
double packet_success_probability(const AclPacket& pkt, double ber);

/// Largest packets first, then the smallest type that holds the remainder.
std::vector<AclPacket> segment_payload(std::size_t bytes, bool fec);

enum class Direction { MasterToSlave, SlaveToMaster };
enum class Device { Master, Slave, OtherSlave };

struct PairingState {
    bool paired = true;
    SimTime auth_delay{50'000'000};
};

struct LinkConfig {
    std::size_t retry_limit = 8;
    double piconet_load = 0.0;  // fraction of slot pairs spent on other piconet members
    bool fec = false;
    std::size_t mtu_bytes = 672;
    PairingState pairing;

    void validate() const;
};

/// One on-air burst, for TDD discipline checks.
struct AirBurst {
    SimTime start{0};
    int slots = 1;
    Device device = Device::Master;
};

struct SendResult {
    bool delivered = false;
    std::size_t attempts = 0;
    SimTime start{0};  // first attempt
    SimTime end{0};    // end of the last attempt's slot pair
};

/// Slotted TDD ACL link between a master and one slave. Each attempt holds
/// `slots + 1` slots (data plus the return slot); master bursts begin on even
/// slots. Sustained new payload per direction is metered by a token bucket at
/// 721 kbps that starts with one DH5 payload and holds at most two.
class AclLink {
public:
    AclLink(LinkConfig cfg, std::uint64_t seed);

    /// Sends with retransmission. `u` in [0,1) fixes the retry count via the
    /// geometric inverse CDF, so a larger BER never needs fewer attempts for
    /// the same `u`. Not delivered means retry_limit consecutive failures.
    SendResult send(const AclPacket& pkt, Direction dir, SimTime ready, double ber, double u);

    /// Same, drawing `u` from the link's own loss stream.
    SendResult send(const AclPacket& pkt, Direction dir, SimTime ready, double ber);

    /// Earliest slot-pair start not yet claimed.
    SimTime next_free() const { return next_free_; }

    void record_air(bool on) { record_air_ = on; }
    const std::vector<AirBurst>& air_log() const { return air_log_; }

    const LinkConfig& config() const { return cfg_; }

private:
    SimTime acquire_pair(SimTime earliest);
    bool take_tokens(Direction dir, SimTime at, std::size_t bits);
    void log(SimTime start, int slots, Device device);

    struct Bucket {
        double tokens = 0.0;
        SimTime updated{0};
    };

    LinkConfig cfg_;
    Rng loss_rng_;
    Rng sched_rng_;
    SimTime next_free_{0};
    Bucket buckets_[2];
    bool record_air_ = false;
    std::vector<AirBurst> air_log_;
};

struct RttResult {
    enum class Status { Ok, Timeout };
    Status status = Status::Ok;
    SimTime rtt{0};          // issue to echo receipt, everything included
    SimTime slot_time{0};    // TDD schedule portion
    SimTime propagation{0};  // 2 d / c
    SimTime auth_delay{0};
    std::size_t retransmissions = 0;

    bool ok() const { return status == Status::Ok; }
};

/// MTU-sized L2CAP echo: the slave returns the payload as soon as it has it.
/// One uniform per baseband packet is drawn from `loss_rng`.
RttResult rtt_probe(AclLink& link, SimTime issue, double ber, double distance_m, Rng& loss_rng);

struct TxRecord {
    SimTime end{0};
    std::size_t payload_bits = 0;
    bool delivered = false;
};

/// Delivered payload bits completing within (0, window] divided by window.
double effective_throughput(std::span<const TxRecord> schedule, SimTime window);

struct ThroughputReport {
    std::vector<TxRecord> schedule;
    std::uint64_t attempts = 0;
    std::uint64_t delivered_packets = 0;
    double bits_per_second = 0.0;

    /// Per-attempt success fraction.
    double delivery_ratio() const {
        return attempts == 0 ? 0.0 : static_cast<double>(delivered_packets) / static_cast<double>(attempts);
    }
};

/// Offers `pkt` back to back from t = 0 until the link cannot finish another
/// within `duration`. Packets that exhaust retries are flushed, not fatal.
ThroughputReport run_saturating_schedule(AclLink& link, const AclPacket& pkt, double ber, SimTime duration);

}  // namespace btprox

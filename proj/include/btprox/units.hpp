#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace btprox {

/// Simulated time. Nanosecond ticks keep the 312.5 us inquiry hop exact.
using SimTime = std::chrono::nanoseconds;

inline constexpr SimTime kSlot{625'000};
inline constexpr SimTime kSlotPair = 2 * kSlot;

inline constexpr double kMetersPerFoot = 0.3048;
inline constexpr double kSpeedOfLight = 299'792'458.0;

/// Sustained ACL payload rate ceiling, bits/s.
inline constexpr double kMaxAclBitsPerSecond = 721'000.0;

constexpr double to_seconds(SimTime t) {
    return std::chrono::duration<double>(t).count();
}

constexpr double to_micros(SimTime t) {
    return std::chrono::duration<double, std::micro>(t).count();
}

inline SimTime from_seconds(double s) {
    return SimTime{static_cast<std::int64_t>(std::llround(s * 1e9))};
}

inline SimTime from_millis(double ms) {
    return SimTime{static_cast<std::int64_t>(std::llround(ms * 1e6))};
}

constexpr double feet_to_meters(double ft) { return ft * kMetersPerFoot; }
constexpr double meters_to_feet(double m) { return m / kMetersPerFoot; }

}  // namespace btprox

#pragma once

#include <cmath>
#include <cstdint>

namespace tlr {

// Integer nanoseconds since the experiment epoch.
using Nanos = std::int64_t;

inline constexpr Nanos kNanosPerMicro = 1'000;
inline constexpr Nanos kNanosPerMilli = 1'000'000;
inline constexpr Nanos kNanosPerSecond = 1'000'000'000;

inline Nanos millis_to_nanos(double ms) { return static_cast<Nanos>(std::llround(ms * 1e6)); }
inline Nanos seconds_to_nanos(double s) { return static_cast<Nanos>(std::llround(s * 1e9)); }
inline constexpr double nanos_to_millis(Nanos ns) { return static_cast<double>(ns) / 1e6; }
inline constexpr double nanos_to_seconds(Nanos ns) { return static_cast<double>(ns) / 1e9; }

}  // namespace tlr

#pragma once

#include <cmath>
#include <cstdint>

namespace jdqm::lattice {

/// All time arithmetic in grid construction, jump sampling and Brownian
/// queries is routed through a fixed dyadic lattice with resolution 2^-40
/// time units. Two algebraically equal times computed by different
/// expressions then map to one tick, so cached noise values are shared
/// bit-exactly between trajectories.
using Tick = std::int64_t;

inline constexpr int kResolutionBits = 40;
inline constexpr double kTicksPerUnit = 1099511627776.0; // 2^40

inline Tick to_ticks(double t) { return std::llround(t * kTicksPerUnit); }

/// Exact for |k| < 2^53: a tick times a power of two.
inline double to_time(Tick k) { return static_cast<double>(k) * 0x1p-40; }

inline double quantize(double t) { return to_time(to_ticks(t)); }

} // namespace jdqm::lattice

#pragma once

#include "jdqm/lattice.hpp"
#include "jdqm/rng.hpp"
#include "jdqm/tick_map.hpp"

#include <cstdint>
#include <vector>

namespace jdqm {

/// Jump times of one Poisson realization: strictly increasing, all in
/// (0, horizon], quantized to the time lattice.
struct JumpTimes {
    std::vector<double> times;
    std::vector<lattice::Tick> ticks;
    double lambda = 0.0;

    static constexpr lattice::Tick kNone = INT64_MAX;

    /// First jump tick strictly after `t`, or kNone.
    lattice::Tick next_after(lattice::Tick t) const;
    /// Number of jumps with tick <= t (the cadlag count N_t).
    std::int64_t count_at(lattice::Tick t) const;
    /// Number of jumps with tick < t (the left limit N_{t-}).
    std::int64_t count_before(lattice::Tick t) const;
};

/// Cumulative sums of i.i.d. Exponential(lambda) interarrivals, truncated
/// at the horizon; lambda = 0 yields no jumps. Interarrival k consumes
/// counter k of the stream.
JumpTimes sample_jump_times(double lambda, double horizon, const CounterRng& stream);

/// Lazily refinable Brownian path on the time lattice.
///
/// Values follow the dyadic Levy construction: integer-time anchors are
/// built from forward unit-variance increments, and every other lattice
/// point is drawn from the Brownian bridge between its two dyadic
/// neighbours (the endpoints of the smallest enclosing dyadic interval),
/// with mean (W_l + W_r)/2 and variance half the distance to them. Each
/// point's Gaussian consumes the counter equal to its tick, so W at any
/// set of times is a pure function of (seed, tag, times) -- query order
/// cannot change a single bit. Re-querying returns the cached value
/// bit-exactly.
class BrownianCache {
public:
    explicit BrownianCache(CounterRng stream);

    /// W at lattice tick k >= 0.
    double value_at(lattice::Tick k);

    std::size_t size() const { return values_.size(); }

private:
    double materialize(lattice::Tick k);

    CounterRng stream_;
    detail::TickValueMap values_;
};

/// One coupled realization of the driving noise (W, N). Fully determined
/// by (seed, sample_index, lambda, horizon); the Brownian and jump
/// substreams are disjoint, keyed (seed, stream_tag(sample, "brownian"))
/// and (seed, stream_tag(sample, "jumps")), so the number of W queries
/// never affects the jump times. Confine one path to one worker at a time
/// (the Brownian cache mutates); distinct paths run concurrently.
class NoisePath {
public:
    NoisePath(std::uint64_t seed, std::uint64_t sample_index, double lambda, double horizon);

    /// W_t for t in [0, horizon] (quantized to the lattice).
    /// Throws std::domain_error outside that interval.
    double brownian_at(double t);
    /// W_t - W_s for 0 <= s <= t <= horizon.
    double increment(double s, double t);

    const JumpTimes& jumps() const { return jumps_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t sample_index() const { return sample_; }
    double horizon() const { return horizon_; }
    lattice::Tick horizon_ticks() const { return horizon_ticks_; }
    std::size_t cached_brownian_values() const { return brownian_.size(); }

private:
    std::uint64_t seed_;
    std::uint64_t sample_;
    double horizon_;
    lattice::Tick horizon_ticks_;
    JumpTimes jumps_;
    BrownianCache brownian_;
};

} // namespace jdqm

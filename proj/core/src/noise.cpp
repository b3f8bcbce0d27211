#include "jdqm/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace jdqm {

using lattice::Tick;

Tick JumpTimes::next_after(Tick t) const {
    auto it = std::upper_bound(ticks.begin(), ticks.end(), t);
    return it == ticks.end() ? kNone : *it;
}

std::int64_t JumpTimes::count_at(Tick t) const {
    return std::upper_bound(ticks.begin(), ticks.end(), t) - ticks.begin();
}

std::int64_t JumpTimes::count_before(Tick t) const {
    return std::lower_bound(ticks.begin(), ticks.end(), t) - ticks.begin();
}

JumpTimes sample_jump_times(double lambda, double horizon, const CounterRng& stream) {
    if (lambda < 0.0) throw std::invalid_argument("sample_jump_times: lambda must be >= 0");
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_jump_times: horizon must be > 0");
    JumpTimes out;
    out.lambda = lambda;
    if (lambda == 0.0) return out;

    const Tick horizon_tick = lattice::to_ticks(horizon);
    double t = 0.0;
    Tick prev = 0;
    for (std::uint64_t k = 0;; ++k) {
        t += stream.exponential(k) / lambda;
        Tick tick = lattice::to_ticks(t);
        if (tick <= prev) tick = prev + 1; // lattice tie, vanishing probability
        if (tick > horizon_tick) break;
        out.ticks.push_back(tick);
        out.times.push_back(lattice::to_time(tick));
        prev = tick;
    }
    return out;
}

BrownianCache::BrownianCache(CounterRng stream) : stream_(stream) {
    values_.insert(0, 0.0); // W_0 = 0
}

double BrownianCache::value_at(Tick k) {
    if (const double* v = values_.find(k)) return *v;
    return materialize(k);
}

double BrownianCache::materialize(Tick k) {
    // k > 0 here (0 is seeded). Ancestors have strictly larger dyadic
    // level, so the recursion depth is at most kResolutionBits plus the
    // integer part of the horizon.
    const int level = std::countr_zero(static_cast<std::uint64_t>(k));
    double w;
    if (level >= lattice::kResolutionBits) {
        // Integer-time anchor: forward increment of variance one.
        const Tick unit = Tick{1} << lattice::kResolutionBits;
        w = value_at(k - unit) + stream_.normal(static_cast<std::uint64_t>(k));
    } else {
        const Tick half = Tick{1} << level;
        const double wl = value_at(k - half);
        const double wr = value_at(k + half);
        const double tau = lattice::to_time(half); // distance to each neighbour
        w = 0.5 * (wl + wr) + std::sqrt(0.5 * tau) * stream_.normal(static_cast<std::uint64_t>(k));
    }
    values_.insert(k, w);
    return w;
}

NoisePath::NoisePath(std::uint64_t seed, std::uint64_t sample_index, double lambda, double horizon)
    : seed_(seed),
      sample_(sample_index),
      horizon_(lattice::quantize(horizon)),
      horizon_ticks_(lattice::to_ticks(horizon)),
      jumps_(sample_jump_times(lambda, horizon, CounterRng(seed, stream_tag(sample_index, "jumps")))),
      brownian_(CounterRng(seed, stream_tag(sample_index, "brownian"))) {}

double NoisePath::brownian_at(double t) {
    const Tick k = lattice::to_ticks(t);
    if (k < 0 || k > horizon_ticks_) {
        std::ostringstream os;
        os << "brownian_at: t=" << t << " outside [0, " << horizon_ << "]";
        throw std::domain_error(os.str());
    }
    return brownian_.value_at(k);
}

double NoisePath::increment(double s, double t) {
    if (!(s <= t)) throw std::domain_error("increment: requires s <= t");
    return brownian_at(t) - brownian_at(s);
}

} // namespace jdqm

#include "jdqm/stepsize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jdqm {

double distance_to_theta(std::span<const double> theta, double x) {
    if (theta.empty()) return std::numeric_limits<double>::infinity();
    auto it = std::lower_bound(theta.begin(), theta.end(), x);
    double best = std::numeric_limits<double>::infinity();
    if (it != theta.end()) best = std::min(best, std::abs(*it - x));
    if (it != theta.begin()) best = std::min(best, std::abs(x - *(it - 1)));
    return best;
}

double admissibility_gap(double delta) {
    const double l = std::log(1.0 / delta);
    return std::sqrt(delta) * l * l;
}

namespace {

void check_eps0(std::span<const double> theta, double eps0) {
    if (!(eps0 > 0.0) || eps0 > 1.0)
        throw std::invalid_argument("eps0 must lie in (0, 1]");
    if (theta.size() >= 2) {
        double min_gap = std::numeric_limits<double>::infinity();
        for (std::size_t i = 1; i < theta.size(); ++i)
            min_gap = std::min(min_gap, theta[i] - theta[i - 1]);
        if (eps0 > 0.5 * min_gap)
            throw std::invalid_argument("eps0 must not exceed half the minimum theta gap");
    }
}

} // namespace

double compute_delta0(std::span<const double> theta, double eps0) {
    if (theta.empty()) return 1.0;
    check_eps0(theta, eps0);
    const double target = 0.5 * eps0;
    // admissibility_gap is increasing on (0, e^-4); cap the search there.
    const double cap = std::exp(-4.0);
    if (admissibility_gap(cap) <= target) return cap;
    double lo = 0.0, hi = cap;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0.0) break;
        if (admissibility_gap(mid) <= target)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

double default_eps0(std::span<const double> theta) {
    if (theta.size() < 2) return 1.0;
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < theta.size(); ++i)
        min_gap = std::min(min_gap, theta[i] - theta[i - 1]);
    return std::min(1.0, 0.5 * min_gap);
}

StepSizePolicy::StepSizePolicy(std::vector<double> theta, double eps0, double delta)
    : theta_(std::move(theta)), eps0_(eps0), delta_(delta) {
    for (std::size_t i = 1; i < theta_.size(); ++i)
        if (!(theta_[i - 1] < theta_[i]))
            throw std::invalid_argument("StepSizePolicy: theta must be strictly increasing");
    check_eps0(theta_, eps0);
    if (!(delta > 0.0) || delta >= 1.0)
        throw std::invalid_argument("StepSizePolicy: delta must lie in (0, 1)");

    delta0_ = compute_delta0(theta_, eps0);
    const double l = std::log(1.0 / delta);
    log_sq_ = l * l;

    if (theta_.empty()) {
        // No discontinuities: h == delta, the thresholds never fire.
        asymptotic_ = true;
        eps1_ = eps2_ = std::numeric_limits<double>::infinity();
        floor_ = delta;
        return;
    }

    asymptotic_ = delta <= delta0_;
    if (asymptotic_) {
        ring_scale_ = log_sq_;
        eps1_ = std::sqrt(delta) * log_sq_;
        eps2_ = delta * log_sq_ * log_sq_;
        floor_ = delta * delta * log_sq_ * log_sq_;
        if (!(eps2_ <= eps1_ && eps1_ <= 0.5 * eps0))
            throw std::invalid_argument("StepSizePolicy: thresholds violate eps2 <= eps1 <= eps0/2");
    } else {
        // Same shape with the log factors replaced by fixed separation
        // constants (clamped so the floor stays below delta/4).
        const double s = std::min(kPracticalFloorScale, 0.5 / std::sqrt(delta));
        ring_scale_ = std::max(kPracticalRingScale, s);
        eps1_ = ring_scale_ * std::sqrt(delta);
        eps2_ = ring_scale_ * s * delta;
        floor_ = s * s * delta * delta;
    }
}

double StepSizePolicy::step_size(double x) const {
    if (theta_.empty()) return delta_;
    const double d = distance_to_theta(theta_, x);
    if (d >= eps1_) return delta_;
    if (d < eps2_) return floor_;
    const double q = d / ring_scale_;
    return q * q;
}

} // namespace jdqm

#pragma once

#include <span>
#include <vector>

namespace jdqm {

/// min_i |x - zeta_i|; +infinity for an empty set (so the step size is the
/// plain delta everywhere). `theta` must be sorted ascending.
double distance_to_theta(std::span<const double> theta, double x);

/// Admissibility threshold expression sqrt(delta) * log^2(1/delta)
/// (natural logarithm), increasing in delta on (0, e^-4).
double admissibility_gap(double delta);

/// Largest delta in (0, e^-4] with sqrt(delta) log^2(1/delta) <= eps0/2,
/// found by bisection to 1e-12. Deltas up to this value keep the
/// asymptotic thresholds consistent (eps2 <= eps1 <= eps0/2). Returns 1
/// for an empty theta (no discontinuities, step size is constant delta).
double compute_delta0(std::span<const double> theta, double eps0);

/// Default eps0: half the minimum gap between adjacent discontinuities,
/// capped at 1; equal to 1 when there are fewer than two discontinuities.
double default_eps0(std::span<const double> theta);

/// State-dependent step size h^delta with three branches:
///     h(x) = delta                     d(x,Theta) >= eps1
///            (d(x,Theta)/C)^2          eps2 <= d(x,Theta) < eps1
///            floor                     d(x,Theta) < eps2
/// continuous, non-decreasing in the distance, and bounded by
/// [floor, delta]. C is the separation constant: one ring step moves the
/// state by about 1/C of its distance to the discontinuity, which is what
/// keeps crossings confined to the innermost band.
///
///  - delta <= delta0 ("asymptotic regime"): C = log^2(1/delta), so
///    eps1 = sqrt(delta) log^2(1/delta), eps2 = delta log^4(1/delta) and
///    floor = delta^2 log^4(1/delta), with eps2 <= eps1 <= eps0/2 by the
///    choice of delta0.
///  - delta > delta0 ("practical regime"): at such deltas the log factors
///    push eps2 past eps1 and the three-branch function degenerates, so
///    the same shape is kept with fixed constants: floor = (s delta)^2
///    with s = min(3, 1/(2 sqrt(delta))), C = max(6, s), hence
///    eps2 = C s delta and eps1 = C sqrt(delta) (which may exceed eps0/2;
///    the value delta is then only taken far from the discontinuities).
class StepSizePolicy {
public:
    static constexpr double kPracticalRingScale = 6.0;
    static constexpr double kPracticalFloorScale = 3.0;

    /// Throws std::invalid_argument unless theta is strictly increasing,
    /// eps0 in (0,1] (and <= half the minimum theta gap when m >= 2), and
    /// delta in (0,1).
    StepSizePolicy(std::vector<double> theta, double eps0, double delta);

    double step_size(double x) const;

    double delta() const { return delta_; }
    double eps0() const { return eps0_; }
    double eps1() const { return eps1_; }
    double eps2() const { return eps2_; }
    double delta0() const { return delta0_; }
    double min_step() const { return floor_; }
    bool asymptotic_regime() const { return asymptotic_; }
    const std::vector<double>& theta() const { return theta_; }

private:
    std::vector<double> theta_;
    double eps0_;
    double delta_;
    double delta0_;
    double eps1_;
    double eps2_;
    double floor_;
    double log_sq_;     // log^2(1/delta)
    double ring_scale_; // C in the ring branch (d/C)^2
    bool asymptotic_;
};

} // namespace jdqm

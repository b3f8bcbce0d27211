#pragma once

#include "jdqm/model.hpp"

#include <vector>

namespace jdqm {

/// C^3 bump: (1 - u^2)^4 for |u| <= 1, else 0.
double bump(double u);

/// Drift-regularizing change of variables
///     G(x) = x + sum_i alpha_i * bump((x - zeta_i)/nu) * (x - zeta_i)|x - zeta_i|.
/// G is strictly increasing, equals the identity at distance >= nu from
/// every zeta_i, and is chosen so that the transformed drift is continuous
/// across each zeta_i. Immutable after construction; all operations are
/// safe for concurrent use.
class Transform {
public:
    /// Identity map (the m = 0 case).
    static Transform identity();

    /// Direct construction. `g2_at_zeta` supplies the extended value of G''
    /// at each zeta (defaults to 2*alpha_i, the case mu(zeta) = mu(zeta+)).
    /// Validates 0 < nu < min(min_i 1/(8|alpha_i|), min_i gap_i/2) and
    /// probes G' > 0 across each bump support.
    Transform(std::vector<double> zetas, std::vector<double> alphas, double nu,
              std::vector<double> g2_at_zeta = {}, double inverse_tolerance = 1e-12);

    bool is_identity() const { return zetas_.empty(); }
    std::size_t discontinuity_count() const { return zetas_.size(); }
    const std::vector<double>& zetas() const { return zetas_; }
    const std::vector<double>& alphas() const { return alphas_; }
    const std::vector<double>& g2_at_zeta() const { return g2_; }
    double nu() const { return nu_; }
    double inverse_tolerance() const { return inverse_tolerance_; }

    /// G(x).
    double apply(double x) const;
    /// G'(x); exists everywhere, equals 1 outside the bump supports.
    double derivative(double x) const;
    /// G''(x) away from the zetas; at x == zeta_i returns the extended
    /// value g2_at_zeta[i]. One-sided limits at zeta_i are -/+ 2 alpha_i.
    double second_derivative(double x) const;
    /// G'''(x) away from the zetas (used for chain-rule derivatives of the
    /// transformed coefficients); returns 0 at the zetas, where the
    /// transformed derivative-or-zero is 0 by definition anyway.
    double third_derivative(double x) const;

    /// G^{-1}(y) with |G(x) - y| <= inverse_tolerance. Identity outside the
    /// bump supports; safeguarded Newton with bisection fallback inside.
    /// Throws NumericalError after 200 iterations (impossible for a valid
    /// transform, whose G' is bounded away from 0).
    double invert(double y) const { return invert(y, y); }
    /// Warm-started variant for sweeps over nearby values; the guess is
    /// clamped into the bracketing bump support.
    double invert(double y, double initial_guess) const;

private:
    std::vector<double> zetas_;
    std::vector<double> alphas_;
    std::vector<double> g2_;
    double nu_ = 1.0;
    double inverse_tolerance_ = 1e-12;
};

/// Builds the transform for a problem: alpha_i = (mu(zeta_i-) -
/// mu(zeta_i+)) / (2 sigma^2(zeta_i)), nu = nu_fraction times the strict
/// upper bound, G''(zeta_i) = 2 alpha_i + 2 (mu(zeta_i+) - mu(zeta_i)) /
/// sigma^2(zeta_i). Returns the identity transform for m = 0.
/// Throws std::invalid_argument when sigma vanishes at some zeta or
/// nu_fraction is outside (0, 1).
Transform build_transform(const SdeProblem& problem, double nu_fraction = 0.9);

/// Coefficients of the transformed SDE for Z = G(X):
///     mu~    = (G' mu + 1/2 G'' sigma^2) o G^{-1}
///     sigma~ = (G' sigma) o G^{-1}
///     rho~   = G(G^{-1} + rho(G^{-1})) - id.
/// mu~ is continuous across each zeta (that is the purpose of G) but may
/// lose differentiability there, so the returned set keeps the same theta.
/// Derivatives of mu~ and sigma~ come from the chain rule with the
/// closed-form derivatives of G; rho~'s derivative is never used by any
/// scheme and is defined as 0. The identity transform returns the raw
/// coefficients unchanged.
CoefficientSet transform_coefficients(const SdeProblem& problem, const Transform& transform);

} // namespace jdqm

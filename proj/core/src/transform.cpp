#include "jdqm/transform.hpp"

#include "jdqm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace jdqm {

double bump(double u) {
    const double s = 1.0 - u * u;
    if (s <= 0.0) return 0.0;
    const double s2 = s * s;
    return s2 * s2;
}

namespace {

double bump_d1(double u) {
    const double s = 1.0 - u * u;
    if (s <= 0.0) return 0.0;
    return -8.0 * u * s * s * s;
}

double bump_d2(double u) {
    const double s = 1.0 - u * u;
    if (s <= 0.0) return 0.0;
    return 8.0 * s * s * (7.0 * u * u - 1.0);
}

double bump_d3(double u) {
    const double s = 1.0 - u * u;
    if (s <= 0.0) return 0.0;
    return 48.0 * u * s * (3.0 - 7.0 * u * u);
}

double nu_upper_bound(const std::vector<double>& zetas, const std::vector<double>& alphas) {
    // min over 1/(8|alpha_i|) and half-gaps; min of the empty set is +inf.
    double bound = std::numeric_limits<double>::infinity();
    for (double a : alphas)
        if (a != 0.0) bound = std::min(bound, 1.0 / (8.0 * std::abs(a)));
    for (std::size_t i = 1; i < zetas.size(); ++i)
        bound = std::min(bound, 0.5 * (zetas[i] - zetas[i - 1]));
    return bound;
}

} // namespace

Transform Transform::identity() { return Transform({}, {}, 1.0); }

Transform::Transform(std::vector<double> zetas, std::vector<double> alphas, double nu,
                     std::vector<double> g2_at_zeta, double inverse_tolerance)
    : zetas_(std::move(zetas)),
      alphas_(std::move(alphas)),
      g2_(std::move(g2_at_zeta)),
      nu_(nu),
      inverse_tolerance_(inverse_tolerance) {
    if (alphas_.size() != zetas_.size())
        throw std::invalid_argument("Transform: alphas must parallel zetas");
    for (std::size_t i = 1; i < zetas_.size(); ++i)
        if (!(zetas_[i - 1] < zetas_[i]))
            throw std::invalid_argument("Transform: zetas must be strictly increasing");
    if (g2_.empty()) {
        g2_.reserve(zetas_.size());
        for (double a : alphas_) g2_.push_back(2.0 * a);
    }
    if (g2_.size() != zetas_.size())
        throw std::invalid_argument("Transform: g2_at_zeta must parallel zetas");
    if (!(inverse_tolerance_ > 0.0))
        throw std::invalid_argument("Transform: inverse_tolerance must be > 0");
    if (zetas_.empty()) return;

    const double bound = nu_upper_bound(zetas_, alphas_);
    if (!(nu_ > 0.0) || nu_ >= bound)
        throw std::invalid_argument("Transform: nu outside (0, min(1/(8|alpha|), gap/2))");

    // G' must stay positive across each bump support.
    for (std::size_t i = 0; i < zetas_.size(); ++i) {
        for (int j = 0; j <= 2000; ++j) {
            const double x = zetas_[i] - nu_ + (2.0 * nu_ * j) / 2000.0;
            if (!(derivative(x) > 0.0))
                throw std::invalid_argument("Transform: G' not positive on a bump support");
        }
    }
}

double Transform::apply(double x) const {
    double y = x;
    for (std::size_t i = 0; i < zetas_.size(); ++i) {
        const double s = x - zetas_[i];
        if (std::abs(s) >= nu_) continue;
        y += alphas_[i] * bump(s / nu_) * s * std::abs(s);
    }
    return y;
}

double Transform::derivative(double x) const {
    double d = 1.0;
    for (std::size_t i = 0; i < zetas_.size(); ++i) {
        const double s = x - zetas_[i];
        const double as = std::abs(s);
        if (as >= nu_) continue;
        const double u = s / nu_;
        d += alphas_[i] * (bump_d1(u) / nu_ * s * as + 2.0 * bump(u) * as);
    }
    return d;
}

double Transform::second_derivative(double x) const {
    double d = 0.0;
    for (std::size_t i = 0; i < zetas_.size(); ++i) {
        const double s = x - zetas_[i];
        if (s == 0.0) return g2_[i];
        const double as = std::abs(s);
        if (as >= nu_) continue;
        const double u = s / nu_;
        const double sign = s > 0.0 ? 1.0 : -1.0;
        d += alphas_[i] * (bump_d2(u) / (nu_ * nu_) * s * as + 4.0 * bump_d1(u) / nu_ * as +
                           2.0 * bump(u) * sign);
    }
    return d;
}

double Transform::third_derivative(double x) const {
    double d = 0.0;
    for (std::size_t i = 0; i < zetas_.size(); ++i) {
        const double s = x - zetas_[i];
        if (s == 0.0) return 0.0;
        const double as = std::abs(s);
        if (as >= nu_) continue;
        const double u = s / nu_;
        const double sign = s > 0.0 ? 1.0 : -1.0;
        const double nu2 = nu_ * nu_;
        d += alphas_[i] * (bump_d3(u) / (nu2 * nu_) * s * as + 6.0 * bump_d2(u) / nu2 * as +
                           6.0 * bump_d1(u) / nu_ * sign);
    }
    return d;
}

double Transform::invert(double y, double initial_guess) const {
    if (zetas_.empty()) return y;
    // Locate the only bump support that can contain y; G is the identity
    // elsewhere and maps each [zeta - nu, zeta + nu] onto itself.
    auto it = std::lower_bound(zetas_.begin(), zetas_.end(), y);
    double zeta = std::numeric_limits<double>::quiet_NaN();
    if (it != zetas_.end() && std::abs(*it - y) < nu_)
        zeta = *it;
    else if (it != zetas_.begin() && std::abs(y - *(it - 1)) < nu_)
        zeta = *(it - 1);
    else
        return y;

    double lo = zeta - nu_, hi = zeta + nu_;
    double x = initial_guess > lo && initial_guess < hi ? initial_guess : y;
    double residual = apply(x) - y;
    for (int iter = 0; iter < 200; ++iter) {
        if (std::abs(residual) <= inverse_tolerance_) return x;
        if (residual < 0.0)
            lo = x;
        else
            hi = x;
        const double step = residual / derivative(x);
        double next = x - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
        residual = apply(x) - y;
    }
    std::ostringstream os;
    os << "Transform::invert failed to converge: y=" << y << " last residual=" << residual;
    throw NumericalError(os.str());
}

Transform build_transform(const SdeProblem& problem, double nu_fraction) {
    if (!(nu_fraction > 0.0) || !(nu_fraction < 1.0))
        throw std::invalid_argument("build_transform: nu_fraction must lie in (0, 1)");
    const CoefficientSet& c = problem.coefficients;
    if (c.theta.empty()) return Transform::identity();

    std::vector<double> alphas, g2;
    alphas.reserve(c.theta.size());
    g2.reserve(c.theta.size());
    for (double zeta : c.theta) {
        const double s = c.sigma(zeta);
        if (s == 0.0) {
            std::ostringstream os;
            os << "build_transform: sigma vanishes at discontinuity zeta=" << zeta;
            throw std::invalid_argument(os.str());
        }
        const double s2 = s * s;
        const double a = (c.mu.left_limit_at(zeta) - c.mu.right_limit_at(zeta)) / (2.0 * s2);
        alphas.push_back(a);
        g2.push_back(2.0 * a + 2.0 * (c.mu.right_limit_at(zeta) - c.mu(zeta)) / s2);
    }
    double bound = nu_upper_bound(c.theta, alphas);
    if (!std::isfinite(bound)) bound = 1.0; // all alphas zero: G == id, any nu works
    return Transform(c.theta, alphas, nu_fraction * bound, std::move(g2));
}

CoefficientSet transform_coefficients(const SdeProblem& problem, const Transform& transform) {
    const CoefficientSet& c = problem.coefficients;
    if (transform.is_identity()) return c;

    auto g = std::make_shared<const Transform>(transform);
    auto mu = std::make_shared<const PiecewiseSmoothFn>(c.mu);
    auto sigma = std::make_shared<const PiecewiseSmoothFn>(c.sigma);
    auto rho = std::make_shared<const PiecewiseSmoothFn>(c.rho);

    auto mu_t_eval = [g, mu, sigma](double z) {
        const double x = g->invert(z);
        const double s = (*sigma)(x);
        return g->derivative(x) * (*mu)(x) + 0.5 * g->second_derivative(x) * s * s;
    };
    auto mu_t_deriv = [g, mu, sigma](double z) {
        const double x = g->invert(z);
        const double g1 = g->derivative(x);
        const double g2v = g->second_derivative(x);
        const double g3 = g->third_derivative(x);
        const double s = (*sigma)(x);
        const double ds = sigma->derivative_or_zero(x);
        const double dm = mu->derivative_or_zero(x);
        return (g2v * (*mu)(x) + g1 * dm + 0.5 * g3 * s * s + g2v * s * ds) / g1;
    };
    auto sigma_t_eval = [g, sigma](double z) {
        const double x = g->invert(z);
        return g->derivative(x) * (*sigma)(x);
    };
    auto sigma_t_deriv = [g, sigma](double z) {
        const double x = g->invert(z);
        const double g1 = g->derivative(x);
        return (g->second_derivative(x) * (*sigma)(x) + g1 * sigma->derivative_or_zero(x)) / g1;
    };
    auto rho_t_eval = [g, rho](double z) {
        const double x = g->invert(z);
        return g->apply(x + (*rho)(x)) - z;
    };

    // The zetas are fixed points of G, so the transformed coefficients keep
    // the same breakpoint set. mu~'s one-sided limits are closed-form:
    // G'(zeta) = 1 and G''(zeta -/+) = -/+ 2 alpha.
    const auto& zetas = transform.zetas();
    const auto& alphas = transform.alphas();
    std::vector<double> mu_left, mu_right, sg_left, sg_right;
    for (std::size_t i = 0; i < zetas.size(); ++i) {
        const double z = zetas[i];
        const double s2 = c.sigma(z) * c.sigma(z);
        mu_left.push_back(c.mu.left_limit_at(z) - alphas[i] * s2);
        mu_right.push_back(c.mu.right_limit_at(z) + alphas[i] * s2);
        sg_left.push_back(c.sigma(z));
        sg_right.push_back(c.sigma(z));
        if (std::abs(mu_left.back() - mu_right.back()) >
            1e-9 * std::max(1.0, std::abs(mu_left.back())))
            throw NumericalError("transform_coefficients: transformed drift not continuous");
        if (c.sigma(z) == 0.0)
            throw std::invalid_argument("transform_coefficients: sigma vanishes at a zeta");
    }

    CoefficientSet out;
    out.mu = PiecewiseSmoothFn::piecewise(mu_t_eval, mu_t_deriv, zetas, mu_left, mu_right);
    out.sigma = PiecewiseSmoothFn::piecewise(sigma_t_eval, sigma_t_deriv, zetas, sg_left, sg_right);
    out.rho = PiecewiseSmoothFn::smooth(rho_t_eval, [](double) { return 0.0; });
    out.theta = zetas;
    return out;
}

} // namespace jdqm

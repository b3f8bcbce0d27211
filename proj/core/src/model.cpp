#include "jdqm/model.hpp"

#include "jdqm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace jdqm {

PiecewiseSmoothFn PiecewiseSmoothFn::smooth(Fn evaluate, Fn derivative) {
    PiecewiseSmoothFn f;
    f.evaluate_ = std::move(evaluate);
    f.derivative_ = std::move(derivative);
    return f;
}

PiecewiseSmoothFn PiecewiseSmoothFn::piecewise(Fn evaluate, Fn derivative,
                                               std::vector<double> breakpoints,
                                               std::vector<double> left_limits,
                                               std::vector<double> right_limits) {
    if (breakpoints.size() != left_limits.size() || breakpoints.size() != right_limits.size())
        throw std::invalid_argument("piecewise: limit lists must parallel breakpoints");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
        if (!(breakpoints[i - 1] < breakpoints[i]))
            throw std::invalid_argument("piecewise: breakpoints must be strictly increasing");
    PiecewiseSmoothFn f;
    f.evaluate_ = std::move(evaluate);
    f.derivative_ = std::move(derivative);
    f.breakpoints_ = std::move(breakpoints);
    f.left_limits_ = std::move(left_limits);
    f.right_limits_ = std::move(right_limits);
    return f;
}

bool PiecewiseSmoothFn::is_breakpoint(double x) const {
    return std::binary_search(breakpoints_.begin(), breakpoints_.end(), x);
}

double PiecewiseSmoothFn::derivative_or_zero(double x) const {
    if (is_breakpoint(x)) return 0.0;
    return derivative_(x);
}

double PiecewiseSmoothFn::left_limit_at(double x) const {
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    if (it != breakpoints_.end() && *it == x)
        return left_limits_[static_cast<std::size_t>(it - breakpoints_.begin())];
    return evaluate_(x);
}

double PiecewiseSmoothFn::right_limit_at(double x) const {
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    if (it != breakpoints_.end() && *it == x)
        return right_limits_[static_cast<std::size_t>(it - breakpoints_.begin())];
    return evaluate_(x);
}

bool ValidationReport::all_passed() const {
    return std::all_of(clauses.begin(), clauses.end(),
                       [](const ValidationClause& c) { return c.passed; });
}

const ValidationClause* ValidationReport::find(const std::string& name) const {
    for (const auto& c : clauses)
        if (c.name == name) return &c;
    return nullptr;
}

namespace {

void require_finite(double v, double x, const char* what) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "validate_assumptions: " << what << " is not finite at x=" << x;
        throw std::invalid_argument(os.str());
    }
}

/// Largest |f(x+h)-f(x)|/h over `count` probe points in [lo, hi - h].
double fd_lipschitz(const PiecewiseSmoothFn& f, double lo, double hi, double h, int count,
                    const char* what) {
    double worst = 0.0;
    if (hi - lo <= 2.0 * h || count < 2) return worst;
    const double span = hi - lo - h;
    for (int i = 0; i < count; ++i) {
        const double x = lo + span * (static_cast<double>(i) + 0.5) / count;
        const double a = f(x);
        const double b = f(x + h);
        require_finite(a, x, what);
        require_finite(b, x + h, what);
        worst = std::max(worst, std::abs(b - a) / h);
    }
    return worst;
}

/// A jump inside a supposedly Lipschitz stretch makes the finite-difference
/// slope scale like 1/h; halving h 16-fold then blows the estimate up by
/// ~16. Smooth stretches keep it stable.
bool lipschitz_stable(const PiecewiseSmoothFn& f, double lo, double hi, double h, int count,
                      const char* what, double* worst_out) {
    const double coarse = fd_lipschitz(f, lo, hi, h, count, what);
    const double fine = fd_lipschitz(f, lo, hi, h / 16.0, count, what);
    *worst_out = std::max(coarse, fine);
    return fine <= 8.0 * std::max(coarse, 1.0);
}

} // namespace

ValidationReport validate_assumptions(const SdeProblem& problem, double grid_width,
                                      int sample_count, double window_half_width) {
    if (grid_width <= 0.0) throw std::invalid_argument("validate_assumptions: grid_width must be > 0");
    if (sample_count < 2) throw std::invalid_argument("validate_assumptions: sample_count must be >= 2");

    const CoefficientSet& c = problem.coefficients;
    for (std::size_t i = 1; i < c.theta.size(); ++i)
        if (!(c.theta[i - 1] < c.theta[i]))
            throw std::invalid_argument("validate_assumptions: theta must be strictly increasing");

    ValidationReport report;
    const double lo = problem.xi - window_half_width;
    const double hi = problem.xi + window_half_width;

    // (ii) sigma non-degenerate at every drift discontinuity.
    {
        ValidationClause cl{"sigma_nonzero_at_theta", true, 0.0, ""};
        for (double zeta : c.theta) {
            const double s = c.sigma(zeta);
            require_finite(s, zeta, "sigma");
            if (s == 0.0) {
                cl.passed = false;
                cl.location = zeta;
                cl.detail = "sigma vanishes at a drift discontinuity";
                break;
            }
        }
        report.clauses.push_back(cl);
    }

    // Every declared breakpoint of mu must be listed in theta.
    {
        ValidationClause cl{"mu_breakpoints_in_theta", true, 0.0, ""};
        for (double b : c.mu.breakpoints()) {
            if (!std::binary_search(c.theta.begin(), c.theta.end(), b)) {
                cl.passed = false;
                cl.location = b;
                cl.detail = "mu breakpoint missing from theta";
                break;
            }
        }
        report.clauses.push_back(cl);
    }

    // (i) mu piecewise Lipschitz: probe each open interval between
    // breakpoints, keeping clear of the breakpoints themselves.
    {
        ValidationClause cl{"mu_piecewise_lipschitz", true, 0.0, ""};
        std::vector<double> edges{lo};
        for (double z : c.theta)
            if (z > lo && z < hi) edges.push_back(z);
        edges.push_back(hi);
        const double margin = 4.0 * grid_width;
        for (std::size_t i = 0; i + 1 < edges.size() && cl.passed; ++i) {
            const double a = edges[i] + (i == 0 ? 0.0 : margin);
            const double b = edges[i + 1] - (i + 2 == edges.size() ? 0.0 : margin);
            if (b - a <= 4.0 * grid_width) continue;
            double worst = 0.0;
            if (!lipschitz_stable(c.mu, a, b, grid_width, sample_count, "mu", &worst)) {
                cl.passed = false;
                cl.location = 0.5 * (a + b);
                cl.detail = "finite-difference slope of mu diverges inside a smooth piece";
            }
        }
        report.clauses.push_back(cl);
    }

    // (ii)/(iii) sigma and rho globally Lipschitz on the window.
    for (const auto& [fn, label] :
         {std::pair<const PiecewiseSmoothFn*, const char*>{&c.sigma, "sigma_lipschitz"},
          std::pair<const PiecewiseSmoothFn*, const char*>{&c.rho, "rho_lipschitz"}}) {
        ValidationClause cl{label, true, 0.0, ""};
        double worst = 0.0;
        if (!lipschitz_stable(*fn, lo, hi, grid_width, sample_count, label, &worst)) {
            cl.passed = false;
            cl.location = problem.xi;
            cl.detail = "finite-difference slope diverges";
        }
        report.clauses.push_back(cl);
    }

    // Declared one-sided limits against evaluate(zeta -/+ h), h = 1e-8.
    {
        ValidationClause cl{"one_sided_limits", true, 0.0, ""};
        const double h = 1e-8, tol = 1e-5;
        for (const PiecewiseSmoothFn* fn : {&c.mu, &c.sigma, &c.rho}) {
            for (double z : fn->breakpoints()) {
                const double dl = std::abs(fn->left_limit_at(z) - (*fn)(z - h));
                const double dr = std::abs(fn->right_limit_at(z) - (*fn)(z + h));
                if (dl > tol || dr > tol) {
                    cl.passed = false;
                    cl.location = z;
                    cl.detail = "declared one-sided limit disagrees with evaluate(zeta +/- 1e-8)";
                }
            }
            if (!cl.passed) break;
        }
        report.clauses.push_back(cl);
    }

    // d_f extension must vanish exactly on theta.
    {
        ValidationClause cl{"derivative_zero_at_breakpoints", true, 0.0, ""};
        for (double z : c.mu.breakpoints()) {
            if (c.mu.derivative_or_zero(z) != 0.0) {
                cl.passed = false;
                cl.location = z;
                break;
            }
        }
        report.clauses.push_back(cl);
    }

    if (problem.horizon <= 0.0 || problem.lambda < 0.0)
        throw std::invalid_argument("validate_assumptions: need horizon > 0 and lambda >= 0");

    return report;
}

namespace {

SdeProblem make_sign_drift(double lambda) {
    // mu(x) = 1 for x < 0, -1 for x >= 0; the canonical discontinuous drift.
    auto mu = PiecewiseSmoothFn::piecewise(
        [](double x) { return x < 0.0 ? 1.0 : -1.0; }, [](double) { return 0.0; }, {0.0}, {1.0},
        {-1.0});
    auto sigma = PiecewiseSmoothFn::smooth([](double) { return 1.0; }, [](double) { return 0.0; });
    // Lipschitz jump coefficient with a kink at 0 (its own breakpoint; not a
    // drift discontinuity).
    auto rho = PiecewiseSmoothFn::piecewise(
        [](double x) { return 0.1 * (1.0 + std::abs(x)); },
        [](double x) { return x > 0.0 ? 0.1 : -0.1; }, {0.0}, {0.1}, {0.1});

    SdeProblem p;
    p.name = lambda == 0.0 ? "pure-diffusion-disc" : "sign-drift";
    p.coefficients = CoefficientSet{std::move(mu), std::move(sigma), std::move(rho), {0.0}};
    p.xi = 0.1;
    p.horizon = 1.0;
    p.lambda = lambda;
    return p;
}

SdeProblem make_merton_smooth() {
    constexpr double a = 0.1;  // drift rate
    constexpr double b = 0.2;  // volatility
    constexpr double c = 0.1;  // relative jump size
    auto mu = PiecewiseSmoothFn::smooth([](double x) { return a * x; }, [](double) { return a; });
    auto sigma = PiecewiseSmoothFn::smooth([](double x) { return b * x; }, [](double) { return b; });
    auto rho = PiecewiseSmoothFn::smooth([](double x) { return c * x; }, [](double) { return c; });

    SdeProblem p;
    p.name = "merton-smooth";
    p.coefficients = CoefficientSet{std::move(mu), std::move(sigma), std::move(rho), {}};
    p.xi = 1.0;
    p.horizon = 1.0;
    p.lambda = 1.0;
    p.reference_solution = [](double t, double w_t, std::int64_t n_t) {
        return std::exp((a - 0.5 * b * b) * t + b * w_t) *
               std::pow(1.0 + c, static_cast<double>(n_t));
    };
    return p;
}

} // namespace

SdeProblem builtin_problem(const std::string& name) {
    if (name == "sign-drift") return make_sign_drift(1.0);
    if (name == "pure-diffusion-disc") return make_sign_drift(0.0);
    if (name == "merton-smooth") return make_merton_smooth();

    std::ostringstream os;
    os << "unknown problem '" << name << "'; registered:";
    for (const auto& n : builtin_problem_names()) os << ' ' << n;
    throw ConfigError(os.str());
}

std::vector<std::string> builtin_problem_names() {
    return {"sign-drift", "merton-smooth", "pure-diffusion-disc"};
}

} // namespace jdqm

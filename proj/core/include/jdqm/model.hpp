#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace jdqm {

/// Scalar coefficient function that is smooth between finitely many
/// breakpoints. Carries its derivative-or-zero extension (the classical
/// derivative where it exists, 0 at the breakpoints) and explicit one-sided
/// limits at each breakpoint, supplied by the problem author.
class PiecewiseSmoothFn {
public:
    using Fn = std::function<double(double)>;

    PiecewiseSmoothFn() = default;

    /// Globally differentiable function: no breakpoints.
    static PiecewiseSmoothFn smooth(Fn evaluate, Fn derivative);

    /// Function with breakpoints; `left_limits`/`right_limits` are parallel
    /// to `breakpoints` (strictly increasing).
    static PiecewiseSmoothFn piecewise(Fn evaluate, Fn derivative,
                                       std::vector<double> breakpoints,
                                       std::vector<double> left_limits,
                                       std::vector<double> right_limits);

    double operator()(double x) const { return evaluate_(x); }

    /// d_f: the classical derivative away from breakpoints, exactly 0 at
    /// every declared breakpoint.
    double derivative_or_zero(double x) const;

    /// One-sided limits. At a declared breakpoint these return the stored
    /// value; elsewhere the function is continuous and they evaluate it.
    double left_limit_at(double x) const;
    double right_limit_at(double x) const;

    const std::vector<double>& breakpoints() const { return breakpoints_; }
    bool is_breakpoint(double x) const;

private:
    Fn evaluate_;
    Fn derivative_;
    std::vector<double> breakpoints_;
    std::vector<double> left_limits_;
    std::vector<double> right_limits_;
};

/// Drift, diffusion and jump coefficient of a jump-diffusion SDE together
/// with the drift discontinuity set theta (strictly increasing).
struct CoefficientSet {
    PiecewiseSmoothFn mu;
    PiecewiseSmoothFn sigma;
    PiecewiseSmoothFn rho;
    std::vector<double> theta;

    std::size_t discontinuity_count() const { return theta.size(); }
};

/// Closed-form strong solution where available, as a function of
/// (t, W_t, N_t). N_t is the cadlag jump count at t; pass the left count
/// for a left limit.
using ReferenceSolution = std::function<double(double t, double w_t, std::int64_t n_t)>;

/// One SDE problem instance:
///   dX_t = mu(X_t) dt + sigma(X_t) dW_t + rho(X_{t-}) dN_t,  X_0 = xi,
/// on [0, horizon], with Poisson intensity lambda (lambda = 0 degenerates
/// to the continuous case).
struct SdeProblem {
    std::string name;
    CoefficientSet coefficients;
    double xi = 0.0;
    double horizon = 1.0;
    double lambda = 0.0;
    ReferenceSolution reference_solution; // may be empty

    bool has_reference_solution() const { return static_cast<bool>(reference_solution); }
};

struct ValidationClause {
    std::string name;
    bool passed = false;
    double location = 0.0; // offending point when failed
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationClause> clauses;

    bool all_passed() const;
    const ValidationClause* find(const std::string& name) const;
};

/// Numerically probes the standing assumptions on a problem: sigma != 0 at
/// every discontinuity of mu, finite-difference Lipschitz screens for mu
/// (piecewise, between breakpoints), sigma and rho (global), and
/// consistency of the declared one-sided limits. Sampling happens on
/// [xi - window_half_width, xi + window_half_width]. A heuristic screen,
/// not a proof.
///
/// Throws std::invalid_argument for non-increasing theta or non-finite
/// coefficient values on the probe grid.
ValidationReport validate_assumptions(const SdeProblem& problem, double grid_width,
                                      int sample_count, double window_half_width = 5.0);

/// Built-in problem registry. Known names: "sign-drift", "merton-smooth",
/// "pure-diffusion-disc". Unknown names raise ConfigError listing the
/// registry contents.
SdeProblem builtin_problem(const std::string& name);
std::vector<std::string> builtin_problem_names();

} // namespace jdqm

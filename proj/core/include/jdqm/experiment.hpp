#pragma once

#include "jdqm/model.hpp"
#include "jdqm/noise.hpp"
#include "jdqm/schemes.hpp"
#include "jdqm/transform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jdqm {

/// Full description of a convergence or cost study. Parsed from a flat
/// key=value config file by the CLI; every field has a default.
struct ExperimentConfig {
    std::string problem = "sign-drift";
    std::optional<double> xi_override;
    std::optional<double> horizon_override;
    std::optional<double> lambda_override;

    std::vector<SchemeKind> schemes = {SchemeKind::doubly_adaptive_qm};
    std::vector<double> deltas;        // strictly decreasing
    int reference_refinement = 32;     // R >= 8; delta_ref = min(deltas)/R
    int samples = 1000;                // M >= 100
    std::vector<double> p_list = {1.0, 2.0};
    std::uint64_t seed = 1;
    double nu_fraction = 0.9;
    double eps0 = 0.0;                 // 0 = problem default
    int threads = 0;                   // 0 = hardware concurrency
    std::string output_csv;
    std::string output_svg;

    /// Throws ConfigError on violated invariants.
    void validate() const;
    /// Registry lookup plus scalar overrides.
    SdeProblem resolve_problem() const;
};

/// Aggregated study results. `rows` is the flat table that the CSV schema
/// mirrors one-to-one; `slopes` additionally carries the bootstrap
/// confidence intervals of the fitted log-log slopes (console output
/// only, not part of the CSV schema).
struct ConvergenceReport {
    struct Row {
        std::string scheme;
        double delta = 0.0;
        double mean_cost = 0.0;
        double cost_se = 0.0;
        double p = 0.0;
        double error = 0.0;
        double error_ci_lo = 0.0;
        double error_ci_hi = 0.0;
        double slope_vs_cost = 0.0;
        double slope_vs_delta = 0.0;
        std::uint64_t excluded = 0;
    };
    struct SlopeFit {
        std::string scheme;
        double p = 0.0;
        double vs_cost = 0.0, vs_cost_lo = 0.0, vs_cost_hi = 0.0;
        double vs_delta = 0.0, vs_delta_lo = 0.0, vs_delta_hi = 0.0;
    };
    std::vector<Row> rows;
    std::vector<SlopeFit> slopes;

    const SlopeFit* find_slope(const std::string& scheme, double p) const;
};

struct CostRow {
    double delta = 0.0;
    double mean_cost = 0.0;
    double normalized_cost = 0.0; // mean_cost / (1/delta + lambda * T)
};

/// Evaluates one realized solution on a noise path in the original
/// X coordinates: either a simulated trajectory mapped through G^{-1}
/// (identity when no transform applies) or a closed-form solution.
/// Stateful walk hints make ascending-time sweeps O(1) per query; confine
/// an evaluator to one thread.
class PathEvaluator {
public:
    /// Trajectory-backed; `transform` may be null (EM on the raw SDE).
    /// `x_values` (G^{-1} of the grid values) are computed when not given.
    PathEvaluator(const Trajectory& trajectory, const Transform* transform, NoisePath& path,
                  std::vector<double> x_values = {});
    /// Closed-form-backed.
    PathEvaluator(ReferenceSolution solution, NoisePath& path);

    double value(double t);
    double left_limit(double t);

    const Trajectory* trajectory() const { return trajectory_; }
    NoisePath& path() const { return *path_; }

private:
    double map_to_x(double z);

    const Trajectory* trajectory_ = nullptr;
    const Transform* transform_ = nullptr;
    ReferenceSolution closed_form_;
    NoisePath* path_ = nullptr;
    std::vector<double> x_values_;       // X at grid points
    std::vector<double> x_left_;         // lazily inverted left limits (NaN = unset)
    std::size_t hint_ = 0;
    double warm_x_ = 0.0;                // previous inversion, Newton warm start
};

/// sup_{t in [0,T]} |coarse(t) - reference(t)| approximated over the union
/// of both grids, comparing left limits as well at shared jump times.
/// Both evaluators must sit on the same NoisePath (same seed and sample);
/// otherwise throws ExperimentError.
double coupled_sup_error(PathEvaluator& coarse, PathEvaluator& reference, NoisePath& path);

/// Coupled Monte Carlo convergence study. For each sample: one noise
/// path, one transformation-based doubly-adaptive reference run at
/// delta_min / R, then every (scheme, delta) simulated on the same path
/// and compared via coupled_sup_error. Aggregates L^p errors with
/// bootstrap confidence intervals and ordinary-least-squares log-log
/// slopes versus mean cost and versus delta. Deterministic for a fixed
/// config (fixed aggregation order, counter-based resampling).
ConvergenceReport run_convergence_study(const ExperimentConfig& config);

/// Mean cost of the transformation-based doubly-adaptive scheme per delta
/// together with the ratio mean_cost / (1/delta + lambda*T).
std::vector<CostRow> run_cost_study(const ExperimentConfig& config);

/// Ordinary least squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y);

} // namespace jdqm

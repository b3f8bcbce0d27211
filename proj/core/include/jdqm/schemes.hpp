#pragma once

#include "jdqm/model.hpp"
#include "jdqm/noise.hpp"
#include "jdqm/stepsize.hpp"
#include "jdqm/transform.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jdqm {

enum class SchemeKind {
    doubly_adaptive_qm, ///< state-adaptive step size, jump-adapted, Milstein correction
    jump_adapted_qm,    ///< constant candidate step, jump-adapted, Milstein correction
    jump_adapted_em,    ///< constant candidate step, jump-adapted, Euler update
};

std::string to_string(SchemeKind kind);
SchemeKind scheme_kind_from_string(const std::string& name);

struct SchemeConfig {
    SchemeKind kind = SchemeKind::doubly_adaptive_qm;
    double delta = 0.0;
    /// Required by the doubly-adaptive kind, ignored by the others.
    std::optional<StepSizePolicy> policy;
};

/// Per-step snapshot of the coefficients at the step's left endpoint, so
/// between-grid evaluation never re-evaluates coefficient closures at
/// historical states.
struct StepRecord {
    double mu = 0.0;
    double sigma = 0.0;
    double dsigma = 0.0;
};

/// One simulated path of a scheme: the adaptive grid, scheme values and
/// left limits at grid points, Brownian values at grid points, the
/// coefficient snapshots, and which grid points are Poisson jump times.
/// cost() is the number of steps taken to reach the horizon.
struct Trajectory {
    std::vector<lattice::Tick> grid_ticks;
    std::vector<double> grid;
    std::vector<double> values;
    std::vector<double> left_limits;
    std::vector<double> w_values;
    std::vector<StepRecord> steps; // steps[n] covers (grid[n], grid[n+1])
    std::vector<unsigned char> jump_flags;
    std::uint64_t path_seed = 0;
    std::uint64_t path_sample = 0;

    std::size_t cost() const { return grid.empty() ? 0 : grid.size() - 1; }

    /// Index n of the interval with grid[n] <= t (binary search).
    std::size_t interval_index(lattice::Tick t) const;

    /// Scheme value at any t in [0, horizon]: values[n] at grid points,
    /// otherwise the continuous-time extension from the covering step's
    /// snapshot (queries W_t from the same path). Right-continuous.
    double value_at(double t, NoisePath& path) const;

    /// Left limit at t: left_limits[n] at grid points, the same extension
    /// formula otherwise.
    double left_limit_at(double t, NoisePath& path) const;
};

/// Next grid point: (tau_n + h) /\ first jump after tau_n /\ horizon,
/// computed on the time lattice (candidate steps round down, so steps
/// never exceed h).
lattice::Tick next_grid_tick(lattice::Tick tau, double candidate_step, const JumpTimes& jumps,
                             lattice::Tick horizon);

/// Policy-driven form: candidate step h^delta(z).
double next_grid_point(double tau, double z, const StepSizePolicy& policy, const JumpTimes& jumps,
                       double horizon);

/// One quasi-Milstein update returning the left limit at the step's end:
///     z + mu dt + sigma dW + (1/2) sigma dsigma (dW^2 - dt).
double quasi_milstein_step(double z, double dt, double dw, double mu, double sigma, double dsigma);
/// Evaluates the coefficients of `set` at z (dsigma via derivative-or-zero).
double quasi_milstein_step(double z, double dt, double dw, const CoefficientSet& set);

/// Simulates one trajectory of the configured scheme for the coefficient
/// set, driven by `path` (whose horizon must cover `horizon`). The grid is
/// jump-adapted; at jump grid points the value gains rho(left limit).
/// The EM kind drops the Milstein correction (its snapshots store
/// dsigma = 0, so between-grid evaluation is Euler-consistent too).
/// Throws NumericalError on non-finite states or runaway grids.
Trajectory simulate(const CoefficientSet& coefficients, double xi, double horizon,
                    const SchemeConfig& config, NoisePath& path);

/// A transformed-scheme run: the trajectory in Z-space plus the mapped
/// values G^{-1}(Z) at the grid points. The cost is the Z-space cost.
struct TransformedRun {
    Trajectory trajectory;
    std::vector<double> x_values;
};

/// Runs the scheme on the transformed coefficients with Z_0 = G(xi) and
/// maps grid values back through G^{-1}.
TransformedRun simulate_transformed(const SdeProblem& problem, const Transform& transform,
                                    const CoefficientSet& transformed_coefficients,
                                    const SchemeConfig& config, NoisePath& path);

/// Convenience overload that builds the transformed coefficients itself.
TransformedRun simulate_transformed(const SdeProblem& problem, const Transform& transform,
                                    const SchemeConfig& config, NoisePath& path);

/// Debug export: one row per grid point, columns
/// time left_limit value jump_flag.
void write_trajectory_table(const Trajectory& trajectory, std::ostream& out);

} // namespace jdqm

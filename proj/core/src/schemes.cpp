#include "jdqm/schemes.hpp"

#include "jdqm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace jdqm {

using lattice::Tick;

std::string to_string(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::doubly_adaptive_qm: return "doubly-adaptive-qm";
        case SchemeKind::jump_adapted_qm: return "jump-adapted-qm";
        case SchemeKind::jump_adapted_em: return "jump-adapted-em";
    }
    return "?";
}

SchemeKind scheme_kind_from_string(const std::string& name) {
    if (name == "doubly-adaptive-qm") return SchemeKind::doubly_adaptive_qm;
    if (name == "jump-adapted-qm") return SchemeKind::jump_adapted_qm;
    if (name == "jump-adapted-em") return SchemeKind::jump_adapted_em;
    throw ConfigError("unknown scheme '" + name +
                      "'; known: doubly-adaptive-qm jump-adapted-qm jump-adapted-em");
}

Tick next_grid_tick(Tick tau, double candidate_step, const JumpTimes& jumps, Tick horizon) {
    // Round the candidate down so tau_{n+1} - tau_n <= h exactly; never
    // stall (at least one tick).
    Tick step = static_cast<Tick>(std::floor(candidate_step * lattice::kTicksPerUnit));
    step = std::max<Tick>(step, 1);
    Tick next = tau + step;
    const Tick jump = jumps.next_after(tau);
    if (jump != JumpTimes::kNone) next = std::min(next, jump);
    return std::min(next, horizon);
}

double next_grid_point(double tau, double z, const StepSizePolicy& policy, const JumpTimes& jumps,
                       double horizon) {
    return lattice::to_time(
        next_grid_tick(lattice::to_ticks(tau), policy.step_size(z), jumps, lattice::to_ticks(horizon)));
}

double quasi_milstein_step(double z, double dt, double dw, double mu, double sigma, double dsigma) {
    return z + mu * dt + sigma * dw + 0.5 * sigma * dsigma * (dw * dw - dt);
}

double quasi_milstein_step(double z, double dt, double dw, const CoefficientSet& set) {
    return quasi_milstein_step(z, dt, dw, set.mu(z), set.sigma(z), set.sigma.derivative_or_zero(z));
}

namespace {

constexpr std::size_t kMaxSteps = 1000000000; // runaway-grid guard

[[noreturn]] void throw_blowup(double z, double dt, double dw) {
    std::ostringstream os;
    os << "scheme blow-up: non-finite state from z=" << z << " dt=" << dt << " dW=" << dw;
    throw NumericalError(os.str());
}

} // namespace

Trajectory simulate(const CoefficientSet& coefficients, double xi, double horizon,
                    const SchemeConfig& config, NoisePath& path) {
    if (!(config.delta > 0.0) || config.delta >= 1.0)
        throw std::invalid_argument("simulate: delta must lie in (0, 1)");
    const bool adaptive = config.kind == SchemeKind::doubly_adaptive_qm;
    if (adaptive && !config.policy)
        throw std::invalid_argument("simulate: the doubly-adaptive kind needs a StepSizePolicy");
    const Tick horizon_tick = lattice::to_ticks(horizon);
    if (horizon_tick <= 0 || horizon_tick > path.horizon_ticks())
        throw std::invalid_argument("simulate: path horizon does not cover the problem horizon");
    const bool milstein = config.kind != SchemeKind::jump_adapted_em;

    Trajectory traj;
    traj.path_seed = path.seed();
    traj.path_sample = path.sample_index();
    const std::size_t hint = static_cast<std::size_t>(
        std::min(4.0 * horizon / config.delta + 16.0, 1e7));
    traj.grid_ticks.reserve(hint);
    traj.grid.reserve(hint);
    traj.values.reserve(hint);
    traj.left_limits.reserve(hint);
    traj.w_values.reserve(hint);
    traj.steps.reserve(hint);
    traj.jump_flags.reserve(hint);

    traj.grid_ticks.push_back(0);
    traj.grid.push_back(0.0);
    traj.values.push_back(xi);
    traj.left_limits.push_back(xi);
    traj.w_values.push_back(path.brownian_at(0.0));
    traj.jump_flags.push_back(0);

    double z = xi;
    Tick tau = 0;
    while (tau < horizon_tick) {
        if (traj.steps.size() >= kMaxSteps)
            throw NumericalError("simulate: grid failed to reach the horizon within 1e9 steps");
        const double h = adaptive ? config.policy->step_size(z) : config.delta;
        const Tick next = next_grid_tick(tau, h, path.jumps(), horizon_tick);
        const bool jumped = next == path.jumps().next_after(tau);
        const double t1 = lattice::to_time(next);
        const double w1 = path.brownian_at(t1);
        const double dt = t1 - lattice::to_time(tau);
        const double dw = w1 - traj.w_values.back();

        StepRecord rec;
        rec.mu = coefficients.mu(z);
        rec.sigma = coefficients.sigma(z);
        rec.dsigma = milstein ? coefficients.sigma.derivative_or_zero(z) : 0.0;

        const double left = quasi_milstein_step(z, dt, dw, rec.mu, rec.sigma, rec.dsigma);
        if (!std::isfinite(left)) throw_blowup(z, dt, dw);
        const double value = jumped ? left + coefficients.rho(left) : left;
        if (!std::isfinite(value)) throw_blowup(left, dt, dw);

        traj.steps.push_back(rec);
        traj.grid_ticks.push_back(next);
        traj.grid.push_back(t1);
        traj.left_limits.push_back(left);
        traj.values.push_back(value);
        traj.w_values.push_back(w1);
        traj.jump_flags.push_back(jumped ? 1 : 0);
        z = value;
        tau = next;
    }
    return traj;
}

std::size_t Trajectory::interval_index(Tick t) const {
    auto it = std::upper_bound(grid_ticks.begin(), grid_ticks.end(), t);
    return static_cast<std::size_t>(it - grid_ticks.begin()) - 1;
}

double Trajectory::value_at(double t, NoisePath& path) const {
    const Tick k = lattice::to_ticks(t);
    if (k < 0 || k > grid_ticks.back())
        throw std::domain_error("Trajectory::value_at: t outside [0, horizon]");
    const std::size_t n = interval_index(k);
    if (grid_ticks[n] == k) return values[n];
    const StepRecord& r = steps[n];
    const double dw = path.brownian_at(lattice::to_time(k)) - w_values[n];
    const double dt = lattice::to_time(k) - grid[n];
    return quasi_milstein_step(values[n], dt, dw, r.mu, r.sigma, r.dsigma);
}

double Trajectory::left_limit_at(double t, NoisePath& path) const {
    const Tick k = lattice::to_ticks(t);
    if (k < 0 || k > grid_ticks.back())
        throw std::domain_error("Trajectory::left_limit_at: t outside [0, horizon]");
    const std::size_t n = interval_index(k);
    if (grid_ticks[n] == k) return left_limits[n];
    const StepRecord& r = steps[n];
    const double dw = path.brownian_at(lattice::to_time(k)) - w_values[n];
    const double dt = lattice::to_time(k) - grid[n];
    return quasi_milstein_step(values[n], dt, dw, r.mu, r.sigma, r.dsigma);
}

TransformedRun simulate_transformed(const SdeProblem& problem, const Transform& transform,
                                    const CoefficientSet& transformed_coefficients,
                                    const SchemeConfig& config, NoisePath& path) {
    TransformedRun run;
    run.trajectory = simulate(transformed_coefficients, transform.apply(problem.xi),
                              problem.horizon, config, path);
    run.x_values.reserve(run.trajectory.values.size());
    for (double z : run.trajectory.values) run.x_values.push_back(transform.invert(z));
    return run;
}

TransformedRun simulate_transformed(const SdeProblem& problem, const Transform& transform,
                                    const SchemeConfig& config, NoisePath& path) {
    return simulate_transformed(problem, transform, transform_coefficients(problem, transform),
                                config, path);
}

void write_trajectory_table(const Trajectory& trajectory, std::ostream& out) {
    out << "time left_limit value jump_flag\n";
    char buf[128];
    for (std::size_t n = 0; n < trajectory.grid.size(); ++n) {
        std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %d\n", trajectory.grid[n],
                      trajectory.left_limits[n], trajectory.values[n],
                      trajectory.jump_flags[n] ? 1 : 0);
        out << buf;
    }
}

} // namespace jdqm

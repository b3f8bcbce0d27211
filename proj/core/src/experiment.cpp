#include "jdqm/experiment.hpp"

#include "jdqm/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace jdqm {

using lattice::Tick;

void ExperimentConfig::validate() const {
    if (schemes.empty()) throw ConfigError("config: schemes must not be empty");
    if (deltas.empty()) throw ConfigError("config: deltas must not be empty");
    for (double d : deltas)
        if (!(d > 0.0) || d >= 1.0) throw ConfigError("config: every delta must lie in (0, 1)");
    for (std::size_t i = 1; i < deltas.size(); ++i)
        if (!(deltas[i] < deltas[i - 1]))
            throw ConfigError("config: deltas must be strictly decreasing");
    if (reference_refinement < 8) throw ConfigError("config: reference_refinement must be >= 8");
    if (samples < 100) throw ConfigError("config: samples must be >= 100");
    if (p_list.empty()) throw ConfigError("config: p_list must not be empty");
    for (double p : p_list)
        if (!(p >= 1.0)) throw ConfigError("config: every p must be >= 1");
    if (!(nu_fraction > 0.0) || !(nu_fraction < 1.0))
        throw ConfigError("config: nu_fraction must lie in (0, 1)");
    if (eps0 < 0.0 || eps0 > 1.0) throw ConfigError("config: eps0 must lie in [0, 1] (0 = auto)");
    if (threads < 0) throw ConfigError("config: threads must be >= 0");
}

SdeProblem ExperimentConfig::resolve_problem() const {
    SdeProblem p = builtin_problem(problem);
    if (xi_override) p.xi = *xi_override;
    if (horizon_override) {
        if (!(*horizon_override > 0.0)) throw ConfigError("config: horizon must be > 0");
        p.horizon = *horizon_override;
    }
    if (lambda_override) {
        if (*lambda_override < 0.0) throw ConfigError("config: lambda must be >= 0");
        p.lambda = *lambda_override;
    }
    return p;
}

const ConvergenceReport::SlopeFit* ConvergenceReport::find_slope(const std::string& scheme,
                                                                 double p) const {
    for (const auto& s : slopes)
        if (s.scheme == scheme && s.p == p) return &s;
    return nullptr;
}

PathEvaluator::PathEvaluator(const Trajectory& trajectory, const Transform* transform,
                             NoisePath& path, std::vector<double> x_values)
    : trajectory_(&trajectory), transform_(transform), path_(&path),
      x_values_(std::move(x_values)) {
    if (transform_ && transform_->is_identity()) transform_ = nullptr;
    if (x_values_.empty()) {
        x_values_.reserve(trajectory.values.size());
        for (double z : trajectory.values) x_values_.push_back(map_to_x(z));
    }
    x_left_.assign(trajectory.values.size(), std::numeric_limits<double>::quiet_NaN());
}

PathEvaluator::PathEvaluator(ReferenceSolution solution, NoisePath& path)
    : closed_form_(std::move(solution)), path_(&path) {}

double PathEvaluator::map_to_x(double z) {
    if (!transform_) return z;
    warm_x_ = transform_->invert(z, warm_x_);
    return warm_x_;
}

double PathEvaluator::value(double t) {
    if (!trajectory_) {
        const Tick k = lattice::to_ticks(t);
        return closed_form_(t, path_->brownian_at(t), path_->jumps().count_at(k));
    }
    const Tick k = lattice::to_ticks(t);
    const auto& ticks = trajectory_->grid_ticks;
    if (k < 0 || k > ticks.back())
        throw std::domain_error("PathEvaluator: t outside the trajectory horizon");
    // Ascending sweeps advance the hint; anything else falls back to a rescan.
    if (k < ticks[hint_]) hint_ = 0;
    while (hint_ + 1 < ticks.size() && ticks[hint_ + 1] <= k) ++hint_;
    if (ticks[hint_] == k) return x_values_[hint_];
    const StepRecord& r = trajectory_->steps[hint_];
    const double dw = path_->brownian_at(t) - trajectory_->w_values[hint_];
    const double dt = t - trajectory_->grid[hint_];
    return map_to_x(
        quasi_milstein_step(trajectory_->values[hint_], dt, dw, r.mu, r.sigma, r.dsigma));
}

double PathEvaluator::left_limit(double t) {
    if (!trajectory_) {
        const Tick k = lattice::to_ticks(t);
        return closed_form_(t, path_->brownian_at(t), path_->jumps().count_before(k));
    }
    const Tick k = lattice::to_ticks(t);
    const auto& ticks = trajectory_->grid_ticks;
    if (k < 0 || k > ticks.back())
        throw std::domain_error("PathEvaluator: t outside the trajectory horizon");
    if (k < ticks[hint_]) hint_ = 0;
    while (hint_ + 1 < ticks.size() && ticks[hint_ + 1] <= k) ++hint_;
    if (ticks[hint_] == k) {
        double& cached = x_left_[hint_];
        if (std::isnan(cached)) cached = map_to_x(trajectory_->left_limits[hint_]);
        return cached;
    }
    const StepRecord& r = trajectory_->steps[hint_];
    const double dw = path_->brownian_at(t) - trajectory_->w_values[hint_];
    const double dt = t - trajectory_->grid[hint_];
    return map_to_x(
        quasi_milstein_step(trajectory_->values[hint_], dt, dw, r.mu, r.sigma, r.dsigma));
}

double coupled_sup_error(PathEvaluator& coarse, PathEvaluator& reference, NoisePath& path) {
    for (const PathEvaluator* e : {&coarse, &reference}) {
        if (const Trajectory* t = e->trajectory()) {
            if (t->path_seed != path.seed() || t->path_sample != path.sample_index())
                throw ExperimentError(
                    "coupled_sup_error: trajectory was simulated on a different noise path");
        }
    }

    const std::vector<Tick> empty;
    const std::vector<Tick>& a = coarse.trajectory() ? coarse.trajectory()->grid_ticks : empty;
    const std::vector<Tick>& b =
        reference.trajectory() ? reference.trajectory()->grid_ticks : empty;
    const std::vector<Tick>& jumps = path.jumps().ticks;

    double sup = 0.0;
    std::size_t ia = 0, ib = 0, ij = 0;
    while (ia < a.size() || ib < b.size()) {
        Tick k;
        if (ib >= b.size() || (ia < a.size() && a[ia] <= b[ib]))
            k = a[ia];
        else
            k = b[ib];
        while (ia < a.size() && a[ia] == k) ++ia;
        while (ib < b.size() && b[ib] == k) ++ib;
        const double t = lattice::to_time(k);
        sup = std::max(sup, std::abs(coarse.value(t) - reference.value(t)));
        while (ij < jumps.size() && jumps[ij] < k) ++ij;
        if (ij < jumps.size() && jumps[ij] == k)
            sup = std::max(sup, std::abs(coarse.left_limit(t) - reference.left_limit(t)));
    }
    return sup;
}

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

namespace {

int worker_count(const ExperimentConfig& cfg) {
    if (cfg.threads > 0) return cfg.threads;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

/// Runs body(i) for i in [0, count) across workers; results must land in
/// per-index slots so scheduling cannot affect the outcome.
void parallel_for_samples(int count, int workers, const std::function<void(int)>& body) {
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct SampleMatrix {
    // cell (scheme, delta) -> per-sample values; NaN marks exclusion.
    std::vector<std::vector<double>> errors;
    std::vector<std::vector<double>> costs;
};

double mean_of(const std::vector<double>& v, const std::vector<int>& idx) {
    double s = 0.0;
    for (int i : idx) s += v[static_cast<std::size_t>(i)];
    return s / static_cast<double>(idx.size());
}

double lp_mean(const std::vector<double>& v, const std::vector<int>& idx, double p) {
    double s = 0.0;
    for (int i : idx) s += std::pow(v[static_cast<std::size_t>(i)], p);
    return std::pow(s / static_cast<double>(idx.size()), 1.0 / p);
}

} // namespace

ConvergenceReport run_convergence_study(const ExperimentConfig& cfg) {
    cfg.validate();
    const SdeProblem problem = cfg.resolve_problem();
    {
        const ValidationReport vr = validate_assumptions(problem, 1e-3, 256);
        if (!vr.all_passed()) throw ConfigError("config: problem fails assumption validation");
    }
    const Transform transform = build_transform(problem, cfg.nu_fraction);
    const CoefficientSet tcoeffs = transform_coefficients(problem, transform);
    const double eps0 = cfg.eps0 > 0.0 ? cfg.eps0 : default_eps0(problem.coefficients.theta);

    const std::size_t n_schemes = cfg.schemes.size();
    const std::size_t n_deltas = cfg.deltas.size();
    const int M = cfg.samples;

    const double delta_ref = cfg.deltas.back() / cfg.reference_refinement;
    SchemeConfig ref_config{SchemeKind::doubly_adaptive_qm, delta_ref,
                            StepSizePolicy(problem.coefficients.theta, eps0, delta_ref)};

    std::vector<SchemeConfig> cell_configs;
    cell_configs.reserve(n_schemes * n_deltas);
    for (SchemeKind kind : cfg.schemes) {
        for (double delta : cfg.deltas) {
            SchemeConfig sc{kind, delta, std::nullopt};
            if (kind == SchemeKind::doubly_adaptive_qm)
                sc.policy.emplace(problem.coefficients.theta, eps0, delta);
            cell_configs.push_back(std::move(sc));
        }
    }

    SampleMatrix mat;
    mat.errors.assign(cell_configs.size(),
                      std::vector<double>(static_cast<std::size_t>(M),
                                          std::numeric_limits<double>::quiet_NaN()));
    mat.costs = mat.errors;
    std::vector<unsigned char> excluded(static_cast<std::size_t>(M), 0);

    auto run_sample = [&](int i) {
        NoisePath path(cfg.seed, static_cast<std::uint64_t>(i), problem.lambda, problem.horizon);
        try {
            TransformedRun ref_run =
                simulate_transformed(problem, transform, tcoeffs, ref_config, path);
            PathEvaluator ref_eval(ref_run.trajectory, &transform, path,
                                   std::move(ref_run.x_values));
            for (std::size_t cell = 0; cell < cell_configs.size(); ++cell) {
                // Every kind runs on the transformed SDE; the EM baseline
                // only drops the Milstein correction.
                const TransformedRun run =
                    simulate_transformed(problem, transform, tcoeffs, cell_configs[cell], path);
                PathEvaluator eval(run.trajectory, &transform, path, run.x_values);
                mat.errors[cell][static_cast<std::size_t>(i)] =
                    coupled_sup_error(eval, ref_eval, path);
                mat.costs[cell][static_cast<std::size_t>(i)] =
                    static_cast<double>(run.trajectory.cost());
            }
        } catch (const NumericalError&) {
            excluded[static_cast<std::size_t>(i)] = 1;
        }
    };
    parallel_for_samples(M, worker_count(cfg), run_sample);

    std::vector<int> included;
    included.reserve(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i)
        if (!excluded[static_cast<std::size_t>(i)]) included.push_back(i);
    const std::uint64_t n_excluded = static_cast<std::uint64_t>(M) - included.size();
    if (static_cast<double>(n_excluded) > 0.001 * M) {
        std::ostringstream os;
        os << "experiment failure: " << n_excluded << " of " << M
           << " samples excluded by blow-up (> 0.1% budget)";
        throw ExperimentError(os.str());
    }
    if (included.empty()) throw ExperimentError("experiment failure: no samples survived");

    // Cluster bootstrap over sample indices, shared across cells so errors
    // at different deltas stay coupled. Deterministic: counter-based.
    constexpr int kResamples = 1000;
    const CounterRng boot(cfg.seed, stream_tag(0, "bootstrap"));
    const std::size_t n_inc = included.size();
    std::vector<std::vector<int>> resamples(kResamples, std::vector<int>(n_inc));
    for (int b = 0; b < kResamples; ++b)
        for (std::size_t j = 0; j < n_inc; ++j)
            resamples[b][j] = included[boot.bits(static_cast<std::uint64_t>(b) * n_inc + j) % n_inc];

    ConvergenceReport report;
    auto cell_at = [&](std::size_t s, std::size_t d) { return s * n_deltas + d; };

    for (std::size_t s = 0; s < n_schemes; ++s) {
        const std::string scheme_name = to_string(cfg.schemes[s]);

        std::vector<double> mean_costs(n_deltas), cost_ses(n_deltas);
        for (std::size_t d = 0; d < n_deltas; ++d) {
            const auto& costs = mat.costs[cell_at(s, d)];
            const double m = mean_of(costs, included);
            double var = 0.0;
            for (int i : included) {
                const double dv = costs[static_cast<std::size_t>(i)] - m;
                var += dv * dv;
            }
            var /= std::max<double>(1.0, static_cast<double>(n_inc - 1));
            mean_costs[d] = m;
            cost_ses[d] = std::sqrt(var / static_cast<double>(n_inc));
        }

        for (double p : cfg.p_list) {
            std::vector<double> errors(n_deltas), ci_lo(n_deltas), ci_hi(n_deltas);
            std::vector<double> log_cost(n_deltas), log_delta(n_deltas), log_err(n_deltas);
            for (std::size_t d = 0; d < n_deltas; ++d) {
                const auto& errs = mat.errors[cell_at(s, d)];
                errors[d] = lp_mean(errs, included, p);
                std::vector<double> boot_vals(kResamples);
                for (int b = 0; b < kResamples; ++b)
                    boot_vals[static_cast<std::size_t>(b)] = lp_mean(errs, resamples[b], p);
                std::sort(boot_vals.begin(), boot_vals.end());
                ci_lo[d] = boot_vals[static_cast<std::size_t>(0.025 * kResamples)];
                ci_hi[d] = boot_vals[static_cast<std::size_t>(0.975 * kResamples) - 1];
                log_cost[d] = std::log(mean_costs[d]);
                log_delta[d] = std::log(cfg.deltas[d]);
                log_err[d] = std::log(errors[d]);
            }

            // Slope of log error against log mean cost (headline metric)
            // and against log delta. Error decays as cost grows, so the
            // rate is the negated cost slope.
            ConvergenceReport::SlopeFit fit;
            fit.scheme = scheme_name;
            fit.p = p;
            fit.vs_cost = -ols_slope(log_cost, log_err);
            fit.vs_delta = ols_slope(log_delta, log_err);
            std::vector<double> boot_cost_slopes(kResamples), boot_delta_slopes(kResamples);
            std::vector<double> bx(n_deltas), by(n_deltas);
            for (int b = 0; b < kResamples; ++b) {
                for (std::size_t d = 0; d < n_deltas; ++d) {
                    bx[d] = std::log(mean_of(mat.costs[cell_at(s, d)], resamples[b]));
                    by[d] = std::log(lp_mean(mat.errors[cell_at(s, d)], resamples[b], p));
                }
                boot_cost_slopes[static_cast<std::size_t>(b)] = -ols_slope(bx, by);
                for (std::size_t d = 0; d < n_deltas; ++d) bx[d] = log_delta[d];
                boot_delta_slopes[static_cast<std::size_t>(b)] = ols_slope(bx, by);
            }
            std::sort(boot_cost_slopes.begin(), boot_cost_slopes.end());
            std::sort(boot_delta_slopes.begin(), boot_delta_slopes.end());
            fit.vs_cost_lo = boot_cost_slopes[static_cast<std::size_t>(0.025 * kResamples)];
            fit.vs_cost_hi = boot_cost_slopes[static_cast<std::size_t>(0.975 * kResamples) - 1];
            fit.vs_delta_lo = boot_delta_slopes[static_cast<std::size_t>(0.025 * kResamples)];
            fit.vs_delta_hi = boot_delta_slopes[static_cast<std::size_t>(0.975 * kResamples) - 1];
            report.slopes.push_back(fit);

            for (std::size_t d = 0; d < n_deltas; ++d) {
                ConvergenceReport::Row row;
                row.scheme = scheme_name;
                row.delta = cfg.deltas[d];
                row.mean_cost = mean_costs[d];
                row.cost_se = cost_ses[d];
                row.p = p;
                row.error = errors[d];
                row.error_ci_lo = ci_lo[d];
                row.error_ci_hi = ci_hi[d];
                row.slope_vs_cost = fit.vs_cost;
                row.slope_vs_delta = fit.vs_delta;
                row.excluded = n_excluded;
                report.rows.push_back(std::move(row));
            }
        }
    }
    return report;
}

std::vector<CostRow> run_cost_study(const ExperimentConfig& cfg) {
    cfg.validate();
    const SdeProblem problem = cfg.resolve_problem();
    const Transform transform = build_transform(problem, cfg.nu_fraction);
    const CoefficientSet tcoeffs = transform_coefficients(problem, transform);
    const double eps0 = cfg.eps0 > 0.0 ? cfg.eps0 : default_eps0(problem.coefficients.theta);
    const int M = cfg.samples;

    std::vector<CostRow> rows;
    for (double delta : cfg.deltas) {
        SchemeConfig sc{SchemeKind::doubly_adaptive_qm, delta,
                        StepSizePolicy(problem.coefficients.theta, eps0, delta)};
        std::vector<double> costs(static_cast<std::size_t>(M), 0.0);
        std::vector<unsigned char> excluded(static_cast<std::size_t>(M), 0);
        parallel_for_samples(M, worker_count(cfg), [&](int i) {
            NoisePath path(cfg.seed, static_cast<std::uint64_t>(i), problem.lambda,
                           problem.horizon);
            try {
                const TransformedRun run =
                    simulate_transformed(problem, transform, tcoeffs, sc, path);
                costs[static_cast<std::size_t>(i)] = static_cast<double>(run.trajectory.cost());
            } catch (const NumericalError&) {
                excluded[static_cast<std::size_t>(i)] = 1;
            }
        });
        double sum = 0.0;
        int n = 0;
        for (int i = 0; i < M; ++i) {
            if (excluded[static_cast<std::size_t>(i)]) continue;
            sum += costs[static_cast<std::size_t>(i)];
            ++n;
        }
        const int n_excluded = M - n;
        if (static_cast<double>(n_excluded) > 0.001 * M)
            throw ExperimentError("cost study: exclusion budget exceeded");
        CostRow row;
        row.delta = delta;
        row.mean_cost = sum / std::max(1, n);
        row.normalized_cost =
            row.mean_cost / (1.0 / delta + problem.lambda * problem.horizon);
        rows.push_back(row);
    }
    return rows;
}

} // namespace jdqm

// Acceptance suite: one pass/fail line per criterion, exit code = number
// of failed criteria. Heavy Monte Carlo settings match the study
// configurations documented in the README.

#include "jdqm/errors.hpp"
#include "jdqm/experiment.hpp"
#include "jdqm/model.hpp"
#include "jdqm/noise.hpp"
#include "jdqm/report_io.hpp"
#include "jdqm/rng.hpp"
#include "jdqm/schemes.hpp"
#include "jdqm/stepsize.hpp"
#include "jdqm/transform.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>
#include <vector>

using namespace jdqm;
using lattice::Tick;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void run_parallel(int count, const std::function<void(int)>& body) {
    const unsigned hw = std::thread::hardware_concurrency();
    const int workers = hw == 0 ? 1 : static_cast<int>(hw);
    std::atomic<int> next{0};
    auto loop = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            body(i);
        }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
    for (auto& t : pool) t.join();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

// ----------------------------------------------------------------------
// criteria 1 and 2: rate-1 convergence and baseline separation
// ----------------------------------------------------------------------

void criteria_1_2() {
    ExperimentConfig cfg;
    cfg.problem = "sign-drift";
    cfg.schemes = {SchemeKind::doubly_adaptive_qm, SchemeKind::jump_adapted_qm,
                   SchemeKind::jump_adapted_em};
    cfg.deltas.clear();
    for (int k = 4; k <= 10; ++k) cfg.deltas.push_back(std::pow(2.0, -k));
    cfg.reference_refinement = 32;
    cfg.samples = 1000;
    cfg.p_list = {2.0};
    cfg.seed = 20250811;

    const auto t0 = std::chrono::steady_clock::now();
    const ConvergenceReport rep = run_convergence_study(cfg);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto* ada = rep.find_slope("doubly-adaptive-qm", 2.0);
    const auto* qm = rep.find_slope("jump-adapted-qm", 2.0);
    const auto* em = rep.find_slope("jump-adapted-em", 2.0);

    const bool c1 = ada && ada->vs_cost >= 0.85 && ada->vs_cost <= 1.15;
    report(1, c1,
           fmt("transformation-based doubly-adaptive quasi-Milstein rate vs cost = %.4f "
               "(target [0.85, 1.15]); study took %.0f s",
               ada ? ada->vs_cost : -1.0, seconds));

    const bool em_ok = em && em->vs_cost >= 0.35 && em->vs_cost <= 0.65;
    const bool qm_ok = qm && qm->vs_cost >= 0.60 && qm->vs_cost <= 0.95;
    const bool below = qm && ada && qm->vs_cost < ada->vs_cost;
    report(2, em_ok && qm_ok && below,
           fmt("EM rate %.4f (target [0.35, 0.65]); fixed-step quasi-Milstein rate %.4f "
               "(target [0.60, 0.95], strictly below adaptive %.4f: %s)",
               em ? em->vs_cost : -1.0, qm ? qm->vs_cost : -1.0, ada ? ada->vs_cost : -1.0,
               below ? "yes" : "no"));
}

// ----------------------------------------------------------------------
// criterion 3: cost linearity
// ----------------------------------------------------------------------

void criterion_3() {
    ExperimentConfig cfg;
    cfg.problem = "sign-drift";
    cfg.deltas.clear();
    for (int k = 4; k <= 10; ++k) cfg.deltas.push_back(std::pow(2.0, -k));
    cfg.samples = 1000;
    cfg.seed = 31;
    const auto rows = run_cost_study(cfg);
    double lo = rows[0].normalized_cost, hi = rows[0].normalized_cost;
    for (const auto& r : rows) {
        lo = std::min(lo, r.normalized_cost);
        hi = std::max(hi, r.normalized_cost);
    }
    const bool bounded = hi / lo <= 3.0;

    // exact uniform counts on an m = 0, lambda = 0 problem
    ExperimentConfig ucfg;
    ucfg.problem = "merton-smooth";
    ucfg.lambda_override = 0.0;
    ucfg.deltas = {0.25, 1.0 / 16, 0.3, 1.0 / 128};
    std::sort(ucfg.deltas.begin(), ucfg.deltas.end(), std::greater<double>());
    ucfg.samples = 100;
    ucfg.seed = 32;
    bool uniform_exact = true;
    for (const auto& r : run_cost_study(ucfg))
        uniform_exact = uniform_exact && r.mean_cost == std::ceil(1.0 / r.delta);

    report(3, bounded && uniform_exact,
           fmt("normalized cost ratio across the ladder = %.3f (target <= 3); "
               "uniform m=0, lambda=0 count equals ceil(T/delta): %s",
               hi / lo, uniform_exact ? "yes" : "no"));
}

// ----------------------------------------------------------------------
// criterion 4: transform correctness
// ----------------------------------------------------------------------

void criterion_4() {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const CounterRng rng(404, 1);

    double worst_rt = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = -2.0 + 4.0 * rng.uniform(i);
        worst_rt = std::max(worst_rt, std::abs(g.invert(g.apply(x)) - x));
    }
    const bool rt_ok = worst_rt <= 1e-10;

    bool outside_ok = true;
    for (double x : {g.nu(), -g.nu(), 0.115, -0.2, 0.75, -1.5, 4.0}) {
        outside_ok = outside_ok && g.apply(x) == x && g.derivative(x) == 1.0 &&
                     g.second_derivative(x) == 0.0;
    }

    // analytic vs central finite differences away from theta
    double worst_fd = 0.0;
    const double h = 1e-6;
    int used = 0;
    for (int i = 0; used < 200; ++i) {
        const double x = -0.15 + 0.3 * rng.uniform(20000 + i);
        if (std::abs(x) < 2e-3) continue;
        ++used;
        const double fd1 = (g.apply(x + h) - g.apply(x - h)) / (2.0 * h);
        const double fd2 = (g.derivative(x + h) - g.derivative(x - h)) / (2.0 * h);
        worst_fd = std::max(worst_fd,
                            std::abs(g.derivative(x) - fd1) / std::max(1.0, std::abs(fd1)));
        worst_fd = std::max(worst_fd, std::abs(g.second_derivative(x) - fd2) /
                                          std::max(1.0, std::abs(fd2)));
    }
    const bool fd_ok = worst_fd <= 1e-6;

    const double alpha = g.alphas()[0];
    const double dev_l = std::abs(g.second_derivative(-1e-7) - (-2.0 * alpha));
    const double dev_r = std::abs(g.second_derivative(+1e-7) - (+2.0 * alpha));
    const bool onesided_ok = dev_l <= 1e-8 && dev_r <= 1e-8;

    report(4, rt_ok && outside_ok && fd_ok && onesided_ok,
           fmt("round trip worst %.2e (<= 1e-10); identity outside bump: %s; "
               "FD agreement worst %.2e (<= 1e-6); G'' one-sided dev %.2e/%.2e (<= 1e-8)",
               worst_rt, outside_ok ? "bit-exact" : "VIOLATED", worst_fd, dev_l, dev_r));
}

// ----------------------------------------------------------------------
// criterion 5: step-size invariants
// ----------------------------------------------------------------------

void criterion_5() {
    const std::vector<double> theta{0.0};
    const CounterRng rng(505, 2);
    bool bounds_ok = true, continuity_ok = true, admissible_ok = true;
    double worst_gap = 0.0;
    for (double delta : {1e-5, 3e-6, 1e-6, 1e-7, 1e-8}) {
        const StepSizePolicy policy(theta, 1.0, delta);
        admissible_ok = admissible_ok && policy.asymptotic_regime() &&
                        policy.eps2() <= policy.eps1() && policy.eps1() <= 0.5 * policy.eps0();
        const double lsq = std::pow(std::log(1.0 / delta), 2);
        const double lo = delta * delta * lsq * lsq;
        for (int i = 0; i < 10000; ++i) {
            const double x = -2.0 + 4.0 * rng.uniform(static_cast<std::uint64_t>(1e9 * delta) + i);
            const double hx = policy.step_size(x);
            bounds_ok = bounds_ok && hx >= lo && hx <= delta;
        }
        for (double edge : {policy.eps1(), policy.eps2()}) {
            const double off = edge * 1e-13;
            const double gap = std::abs(policy.step_size(edge - off) - policy.step_size(edge + off));
            worst_gap = std::max(worst_gap, gap / delta);
            continuity_ok = continuity_ok && gap <= 1e-12 * delta;
        }
    }
    bool enforcement_ok = false;
    try {
        (void)StepSizePolicy(theta, 1.5, 1e-6);
    } catch (const std::invalid_argument&) {
        enforcement_ok = true;
    }
    report(5, bounds_ok && continuity_ok && admissible_ok && enforcement_ok,
           fmt("bounds delta^2 log^4 <= h <= delta on 1e4 x per delta: %s; boundary continuity "
               "worst %.2e * delta (<= 1e-12); admissibility chain enforced at construction: %s",
               bounds_ok ? "yes" : "NO", worst_gap,
               (admissible_ok && enforcement_ok) ? "yes" : "NO"));
}

// ----------------------------------------------------------------------
// criterion 6: jump-adaptedness across 1e5 trajectories
// ----------------------------------------------------------------------

void criterion_6() {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const CoefficientSet tc = transform_coefficients(p, g);
    const double delta = 1.0 / 16;
    const StepSizePolicy policy(p.coefficients.theta, 1.0, delta);
    const double z0 = g.apply(p.xi);

    const int n = 100000;
    std::atomic<long> bad_grid{0}, bad_update{0}, total_jumps{0};
    run_parallel(n, [&](int s) {
        NoisePath path(606, static_cast<std::uint64_t>(s), p.lambda, p.horizon);
        SchemeConfig cfg{SchemeKind::doubly_adaptive_qm, delta, policy};
        const Trajectory t = simulate(tc, z0, p.horizon, cfg, path);
        for (Tick j : path.jumps().ticks) {
            ++total_jumps;
            if (!std::binary_search(t.grid_ticks.begin(), t.grid_ticks.end(), j)) ++bad_grid;
        }
        for (std::size_t i = 0; i < t.grid.size(); ++i) {
            const double expected =
                t.jump_flags[i] ? t.left_limits[i] + tc.rho(t.left_limits[i]) : t.left_limits[i];
            if (t.values[i] != expected) ++bad_update;
        }
    });
    report(6, bad_grid == 0 && bad_update == 0,
           fmt("%ld Poisson jump times over 1e5 trajectories: %ld missing from grids "
               "(bit-exact), %ld jump updates off machine precision",
               total_jumps.load(), bad_grid.load(), bad_update.load()));
}

// ----------------------------------------------------------------------
// criterion 7: noise coupling
// ----------------------------------------------------------------------

void criterion_7() {
    // order independence under permuted queries
    const CounterRng meta(707, 3);
    int order_mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::uint64_t base = static_cast<std::uint64_t>(trial) * 64;
        std::vector<double> times;
        for (int q = 0; q < 10; ++q) times.push_back(lattice::quantize(meta.uniform(base + q)));
        std::vector<std::size_t> perm(times.size());
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t k = perm.size(); k > 1; --k)
            std::swap(perm[k - 1], perm[meta.bits(base + 32 + k) % k]);
        NoisePath fwd(70707, static_cast<std::uint64_t>(trial), 0.0, 1.0);
        NoisePath prm(70707, static_cast<std::uint64_t>(trial), 0.0, 1.0);
        std::vector<double> v1(times.size()), v2(times.size());
        for (std::size_t q = 0; q < times.size(); ++q) v1[q] = fwd.brownian_at(times[q]);
        for (std::size_t q : perm) v2[q] = prm.brownian_at(times[q]);
        if (v1 != v2) ++order_mismatches;
    }

    // W_1 moments over 1e5 seeds
    const int n = 100000;
    std::vector<double> w(n);
    run_parallel(n, [&](int s) {
        NoisePath path(717, static_cast<std::uint64_t>(s), 0.0, 1.0);
        w[static_cast<std::size_t>(s)] = path.brownian_at(1.0);
    });
    double mean = 0.0;
    for (double v : w) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : w) var += (v - mean) * (v - mean);
    var /= n;

    // Poisson(1) count moments over 1e5 seeds
    std::vector<double> counts(n);
    run_parallel(n, [&](int s) {
        const JumpTimes j = sample_jump_times(1.0, 1.0, CounterRng(727, stream_tag(s, "jumps")));
        counts[static_cast<std::size_t>(s)] = static_cast<double>(j.times.size());
    });
    double pmean = 0.0;
    for (double v : counts) pmean += v;
    pmean /= n;
    double pvar = 0.0;
    for (double v : counts) pvar += (v - pmean) * (v - pmean);
    pvar /= n;

    const bool ok = order_mismatches == 0 && std::abs(mean) <= 0.01 && var >= 0.98 &&
                    var <= 1.02 && std::abs(pmean - 1.0) <= 0.02 && std::abs(pvar - 1.0) <= 0.05;
    report(7, ok,
           fmt("permuted-order mismatches %d/1000 (bit-exact); W_1 mean %.4f (<= 0.01), "
               "var %.4f ([0.98, 1.02]); Poisson mean %.4f (1 +/- 0.02), var %.4f (1 +/- 0.05)",
               order_mismatches, mean, var, pmean, pvar));
}

// ----------------------------------------------------------------------
// criterion 8: exact special cases and closed-form cross-check
// ----------------------------------------------------------------------

void criterion_8() {
    // drift-only: Z_T = xi + a T for every sample and any grid
    CoefficientSet drift;
    drift.mu = PiecewiseSmoothFn::smooth([](double) { return 0.7; }, [](double) { return 0.0; });
    drift.sigma = PiecewiseSmoothFn::smooth([](double) { return 0.0; }, [](double) { return 0.0; });
    drift.rho = PiecewiseSmoothFn::smooth([](double) { return 0.0; }, [](double) { return 0.0; });
    double worst_drift = 0.0;
    for (int s = 0; s < 100; ++s) {
        NoisePath path(808, static_cast<std::uint64_t>(s), 1.0, 1.0);
        const Trajectory t = simulate(
            drift, 0.3, 1.0, SchemeConfig{SchemeKind::jump_adapted_qm, 1.0 / 32, std::nullopt},
            path);
        worst_drift = std::max(worst_drift, std::abs(t.values.back() - 1.0));
    }

    // jump-only: Z_T = xi + c N_T exactly (dyadic c)
    CoefficientSet jump;
    jump.mu = PiecewiseSmoothFn::smooth([](double) { return 0.0; }, [](double) { return 0.0; });
    jump.sigma = PiecewiseSmoothFn::smooth([](double) { return 0.0; }, [](double) { return 0.0; });
    jump.rho = PiecewiseSmoothFn::smooth([](double) { return 0.5; }, [](double) { return 0.0; });
    int jump_mismatches = 0;
    for (int s = 0; s < 100; ++s) {
        NoisePath path(818, static_cast<std::uint64_t>(s), 2.0, 1.0);
        const Trajectory t = simulate(
            jump, 1.0, 1.0, SchemeConfig{SchemeKind::jump_adapted_qm, 1.0 / 32, std::nullopt},
            path);
        const double expected =
            1.0 + 0.5 * static_cast<double>(path.jumps().count_at(lattice::to_ticks(1.0)));
        if (t.values.back() != expected) ++jump_mismatches;
    }

    // merton-smooth: closed form vs fine-reference estimate within 2x
    const SdeProblem m = builtin_problem("merton-smooth");
    const double delta = std::pow(2.0, -8);
    const double delta_ref = delta / 32.0;
    const int samples = 1000;
    std::vector<double> err_ref(samples), err_closed(samples);
    run_parallel(samples, [&](int s) {
        NoisePath path(828, static_cast<std::uint64_t>(s), m.lambda, m.horizon);
        const SchemeConfig coarse_cfg{SchemeKind::doubly_adaptive_qm, delta,
                                      StepSizePolicy({}, 1.0, delta)};
        const SchemeConfig ref_cfg{SchemeKind::doubly_adaptive_qm, delta_ref,
                                   StepSizePolicy({}, 1.0, delta_ref)};
        const Trajectory coarse = simulate(m.coefficients, m.xi, m.horizon, coarse_cfg, path);
        const Trajectory ref = simulate(m.coefficients, m.xi, m.horizon, ref_cfg, path);
        PathEvaluator ec(coarse, nullptr, path);
        PathEvaluator er(ref, nullptr, path);
        err_ref[static_cast<std::size_t>(s)] = coupled_sup_error(ec, er, path);
        // closed form substituted for the fine trajectory on the same union
        double sup = 0.0;
        PathEvaluator exact(m.reference_solution, path);
        std::size_t ia = 0, ib = 0;
        const auto& A = coarse.grid_ticks;
        const auto& B = ref.grid_ticks;
        PathEvaluator ec2(coarse, nullptr, path);
        while (ia < A.size() || ib < B.size()) {
            Tick k;
            if (ib >= B.size() || (ia < A.size() && A[ia] <= B[ib]))
                k = A[ia];
            else
                k = B[ib];
            while (ia < A.size() && A[ia] == k) ++ia;
            while (ib < B.size() && B[ib] == k) ++ib;
            const double t = lattice::to_time(k);
            sup = std::max(sup, std::abs(ec2.value(t) - exact.value(t)));
        }
        err_closed[static_cast<std::size_t>(s)] = sup;
    });
    double e_ref = 0.0, e_closed = 0.0;
    for (int s = 0; s < samples; ++s) {
        e_ref += err_ref[static_cast<std::size_t>(s)] * err_ref[static_cast<std::size_t>(s)];
        e_closed +=
            err_closed[static_cast<std::size_t>(s)] * err_closed[static_cast<std::size_t>(s)];
    }
    e_ref = std::sqrt(e_ref / samples);
    e_closed = std::sqrt(e_closed / samples);
    const double ratio = e_closed / e_ref;

    const bool ok = worst_drift <= 1e-12 && jump_mismatches == 0 && ratio >= 0.5 && ratio <= 2.0;
    report(8, ok,
           fmt("drift-only worst |Z_T - (xi + aT)| = %.2e (<= 1e-12); jump-only mismatches %d; "
               "merton L2 sup error closed-form %.5f vs fine-reference %.5f (ratio %.3f in "
               "[0.5, 2])",
               worst_drift, jump_mismatches, e_closed, e_ref, ratio));
}

// ----------------------------------------------------------------------
// criterion 9: bit-identical reruns
// ----------------------------------------------------------------------

void criterion_9() {
    ExperimentConfig cfg;
    cfg.problem = "sign-drift";
    cfg.schemes = {SchemeKind::doubly_adaptive_qm, SchemeKind::jump_adapted_em};
    cfg.deltas = {1.0 / 16, 1.0 / 32, 1.0 / 64};
    cfg.reference_refinement = 8;
    cfg.samples = 120;
    cfg.p_list = {1.0, 2.0};
    cfg.seed = 4242;

    std::ostringstream a, b;
    write_report_csv(run_convergence_study(cfg), a);
    write_report_csv(run_convergence_study(cfg), b);
    report(9, a.str() == b.str(),
           fmt("repeated study with identical config+seed: CSV bytes %s (%zu bytes)",
               a.str() == b.str() ? "identical" : "DIFFER", a.str().size()));
}

} // namespace

int main() {
    std::printf("acceptance suite: adaptive quasi-Milstein schemes for jump-diffusion SDEs\n");
    criteria_1_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    if (g_failures == 0)
        std::printf("all criteria passed\n");
    else
        std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}

#include <doctest.h>

#include "jdqm/errors.hpp"
#include "jdqm/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace jdqm;

namespace {

CoefficientSet constant_coeffs(double mu, double sigma, double rho) {
    CoefficientSet c;
    c.mu = PiecewiseSmoothFn::smooth([mu](double) { return mu; }, [](double) { return 0.0; });
    c.sigma =
        PiecewiseSmoothFn::smooth([sigma](double) { return sigma; }, [](double) { return 0.0; });
    c.rho = PiecewiseSmoothFn::smooth([rho](double) { return rho; }, [](double) { return 0.0; });
    return c;
}

} // namespace

TEST_CASE("quasi milstein step formula") {
    // hand-evaluated update
    CHECK(quasi_milstein_step(1.0, 0.01, 0.1, 2.0, 3.0, 0.5) == doctest::Approx(1.32));
    CHECK(quasi_milstein_step(1.0, 0.01, 0.2, 2.0, 3.0, 0.5) == doctest::Approx(1.6425));
    // vanishing coefficients: constant path
    CHECK(quasi_milstein_step(0.7, 0.5, 1.3, 0.0, 0.0, 0.0) == 0.7);
    // constant sigma reduces to the Euler step
    CHECK(quasi_milstein_step(1.0, 0.01, 0.1, 2.0, 3.0, 0.0) == doctest::Approx(1.0 + 0.02 + 0.3));
}

TEST_CASE("next grid point") {
    JumpTimes jumps;
    jumps.ticks = {lattice::to_ticks(0.55)};
    jumps.times = {lattice::to_time(jumps.ticks[0])};
    const StepSizePolicy policy({}, 1.0, 0.25); // h == 0.25 everywhere

    // plain candidate step
    CHECK(next_grid_point(0.0, 5.0, policy, jumps, 1.0) == doctest::Approx(0.25));
    // jump time cuts the step and becomes a grid point, bit-exact
    CHECK(next_grid_point(0.5, 5.0, policy, jumps, 1.0) == jumps.times[0]);
    // horizon clamp
    CHECK(next_grid_point(0.9, 5.0, policy, JumpTimes{}, 1.0) == 1.0);
}

TEST_CASE("drift-only problems are exact") {
    const CoefficientSet c = constant_coeffs(0.7, 0.0, 0.0);
    NoisePath path(3, 0, 0.0, 1.0);
    for (SchemeKind kind : {SchemeKind::jump_adapted_qm, SchemeKind::jump_adapted_em}) {
        const Trajectory t = simulate(c, 0.3, 1.0, SchemeConfig{kind, 0.125, std::nullopt}, path);
        CHECK(std::abs(t.values.back() - (0.3 + 0.7)) <= 1e-12);
        // between grid points: linear interpolation
        NoisePath p2(3, 0, 0.0, 1.0);
        CHECK(t.value_at(0.4375, p2) == doctest::Approx(0.3 + 0.7 * 0.4375).epsilon(1e-12));
    }
}

TEST_CASE("jump-only problems accumulate rho per jump") {
    const CoefficientSet c = constant_coeffs(0.0, 0.0, 0.5);
    NoisePath path(11, 4, 2.0, 1.0); // a few jumps
    const Trajectory t =
        simulate(c, 1.0, 1.0, SchemeConfig{SchemeKind::jump_adapted_qm, 0.125, std::nullopt}, path);
    const double n_jumps = static_cast<double>(path.jumps().count_at(lattice::to_ticks(1.0)));
    CHECK(t.values.back() == 1.0 + 0.5 * n_jumps);
}

TEST_CASE("uniform grid structure for m = 0") {
    const CoefficientSet c = constant_coeffs(0.1, 0.0, 0.0);
    SUBCASE("no jumps: exactly ceil(T/delta) steps") {
        NoisePath path(5, 0, 0.0, 1.0);
        for (double delta : {0.25, 0.3, 1.0 / 64}) {
            const Trajectory t = simulate(
                c, 0.0, 1.0, SchemeConfig{SchemeKind::doubly_adaptive_qm, delta,
                                          StepSizePolicy({}, 1.0, delta)},
                path);
            CHECK(t.cost() == static_cast<std::size_t>(std::ceil(1.0 / delta)));
        }
    }
    SUBCASE("with jumps: uniform mesh merged with jump times") {
        NoisePath path(6, 2, 3.0, 1.0);
        const double delta = 0.125;
        const Trajectory t = simulate(
            c, 0.0, 1.0,
            SchemeConfig{SchemeKind::doubly_adaptive_qm, delta, StepSizePolicy({}, 1.0, delta)},
            path);
        // every jump time is a grid point
        for (lattice::Tick j : path.jumps().ticks) {
            CHECK(std::binary_search(t.grid_ticks.begin(), t.grid_ticks.end(), j));
        }
        // every non-jump grid point lies on the uniform mesh continued from
        // the previous jump
        const std::size_t expected_min = static_cast<std::size_t>(std::ceil(1.0 / delta));
        CHECK(t.cost() >= expected_min);
        CHECK(t.cost() <= expected_min + path.jumps().ticks.size() + 1);
    }
}

TEST_CASE("jump-adaptedness and jump update reconstruction") {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const CoefficientSet tc = transform_coefficients(p, g);
    const double eps0 = default_eps0(p.coefficients.theta);
    const double delta = 1.0 / 32;
    const SchemeConfig cfg{SchemeKind::doubly_adaptive_qm, delta,
                           StepSizePolicy(p.coefficients.theta, eps0, delta)};
    for (int s = 0; s < 50; ++s) {
        NoisePath path(17, static_cast<std::uint64_t>(s), p.lambda, p.horizon);
        const Trajectory t = simulate(tc, g.apply(p.xi), p.horizon, cfg, path);
        // grid properties
        CHECK(t.grid.front() == 0.0);
        CHECK(t.grid.back() == p.horizon);
        for (std::size_t n = 1; n < t.grid_ticks.size(); ++n)
            CHECK(t.grid_ticks[n] > t.grid_ticks[n - 1]);
        // every jump is a grid point, bit-exact; flags match; update matches
        std::size_t flagged = 0;
        for (std::size_t n = 0; n < t.grid.size(); ++n) {
            if (t.jump_flags[n]) {
                ++flagged;
                CHECK(std::binary_search(path.jumps().ticks.begin(), path.jumps().ticks.end(),
                                         t.grid_ticks[n]));
                CHECK(t.values[n] == t.left_limits[n] + tc.rho(t.left_limits[n]));
            } else {
                CHECK(t.values[n] == t.left_limits[n]);
            }
        }
        CHECK(flagged == path.jumps().ticks.size());
    }
}

TEST_CASE("step bound holds exactly") {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const CoefficientSet tc = transform_coefficients(p, g);
    const double delta = 1.0 / 64;
    const StepSizePolicy policy(p.coefficients.theta, 1.0, delta);
    const SchemeConfig cfg{SchemeKind::doubly_adaptive_qm, delta, policy};
    NoisePath path(23, 1, p.lambda, p.horizon);
    const Trajectory t = simulate(tc, g.apply(p.xi), p.horizon, cfg, path);
    for (std::size_t n = 0; n + 1 < t.grid.size(); ++n) {
        const double dt = t.grid[n + 1] - t.grid[n];
        CHECK(dt <= delta + 1e-15);
        CHECK(dt <= policy.step_size(t.values[n]) + 1e-15);
    }
}

TEST_CASE("em and qm agree bit-exactly when dsigma == 0") {
    CoefficientSet c = constant_coeffs(0.4, 0.9, 0.2);
    NoisePath p1(9, 7, 1.0, 1.0), p2(9, 7, 1.0, 1.0);
    const Trajectory qm =
        simulate(c, 0.5, 1.0, SchemeConfig{SchemeKind::jump_adapted_qm, 0.0625, std::nullopt}, p1);
    const Trajectory em =
        simulate(c, 0.5, 1.0, SchemeConfig{SchemeKind::jump_adapted_em, 0.0625, std::nullopt}, p2);
    REQUIRE(qm.values.size() == em.values.size());
    for (std::size_t n = 0; n < qm.values.size(); ++n) {
        CHECK(qm.values[n] == em.values[n]);
        CHECK(qm.left_limits[n] == em.left_limits[n]);
    }
}

TEST_CASE("between-grid evaluation") {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const CoefficientSet tc = transform_coefficients(p, g);
    const SchemeConfig cfg{SchemeKind::jump_adapted_qm, 0.125, std::nullopt};
    NoisePath path(77, 0, p.lambda, p.horizon);
    const Trajectory t = simulate(tc, g.apply(p.xi), p.horizon, cfg, path);

    // at grid points: right-continuous values
    for (std::size_t n = 0; n < t.grid.size(); ++n) {
        CHECK(t.value_at(t.grid[n], path) == t.values[n]);
        CHECK(t.left_limit_at(t.grid[n], path) == t.left_limits[n]);
    }
    // approaching the next grid point from inside the step reproduces the
    // left limit bit-exactly (same cached Brownian value, same arithmetic)
    for (std::size_t n = 1; n < t.grid.size(); ++n) {
        const StepRecord& r = t.steps[n - 1];
        const double dt = t.grid[n] - t.grid[n - 1];
        const double dw = t.w_values[n] - t.w_values[n - 1];
        const double reconstructed =
            quasi_milstein_step(t.values[n - 1], dt, dw, r.mu, r.sigma, r.dsigma);
        CHECK(reconstructed == t.left_limits[n]);
    }
    CHECK_THROWS_AS((void)t.value_at(1.5, path), std::domain_error);
}

TEST_CASE("simulate_transformed") {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const SchemeConfig cfg{SchemeKind::jump_adapted_qm, 1.0 / 32, std::nullopt};

    SUBCASE("round trip through the wrapper") {
        NoisePath path(101, 0, p.lambda, p.horizon);
        const TransformedRun run = simulate_transformed(p, g, cfg, path);
        REQUIRE(run.x_values.size() == run.trajectory.values.size());
        for (std::size_t n = 0; n < run.x_values.size(); ++n)
            CHECK(std::abs(g.apply(run.x_values[n]) - run.trajectory.values[n]) <= 1e-12);
        // jump-adapted grid in z-space
        std::size_t flagged = 0;
        for (auto f : run.trajectory.jump_flags) flagged += f;
        CHECK(flagged == path.jumps().ticks.size());
    }

    SUBCASE("identity transform reproduces the raw simulation bit-exactly") {
        const SdeProblem m = builtin_problem("merton-smooth");
        NoisePath p1(55, 3, m.lambda, m.horizon), p2(55, 3, m.lambda, m.horizon);
        const TransformedRun run = simulate_transformed(m, Transform::identity(), cfg, p1);
        const Trajectory raw = simulate(m.coefficients, m.xi, m.horizon, cfg, p2);
        REQUIRE(run.trajectory.values.size() == raw.values.size());
        for (std::size_t n = 0; n < raw.values.size(); ++n) {
            CHECK(run.trajectory.values[n] == raw.values[n]);
            CHECK(run.x_values[n] == raw.values[n]);
        }
    }
}

TEST_CASE("blow-up detection") {
    // exploding drift drives the state non-finite within one step
    CoefficientSet c;
    c.mu = PiecewiseSmoothFn::smooth([](double x) { return 1e308 * (1.0 + x * x); },
                                     [](double) { return 0.0; });
    c.sigma = PiecewiseSmoothFn::smooth([](double) { return 0.0; }, [](double) { return 0.0; });
    c.rho = PiecewiseSmoothFn::smooth([](double) { return 0.0; }, [](double) { return 0.0; });
    NoisePath path(1, 0, 0.0, 1.0);
    CHECK_THROWS_AS(
        (void)simulate(c, 1e300, 1.0, SchemeConfig{SchemeKind::jump_adapted_em, 0.5, std::nullopt},
                       path),
        NumericalError);
}

TEST_CASE("trajectory table export") {
    const CoefficientSet c = constant_coeffs(1.0, 0.0, 0.0);
    NoisePath path(2, 0, 0.0, 1.0);
    const Trajectory t =
        simulate(c, 0.0, 1.0, SchemeConfig{SchemeKind::jump_adapted_em, 0.5, std::nullopt}, path);
    std::ostringstream os;
    write_trajectory_table(t, os);
    const std::string out = os.str();
    CHECK(out.rfind("time left_limit value jump_flag\n", 0) == 0);
    CHECK(std::count(out.begin(), out.end(), '\n') == 1 + 3); // header + 3 grid points
}

TEST_CASE("moment stability across seed blocks") {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const CoefficientSet tc = transform_coefficients(p, g);
    const double delta = 1.0 / 256;
    const SchemeConfig cfg{SchemeKind::doubly_adaptive_qm, delta,
                           StepSizePolicy(p.coefficients.theta, 1.0, delta)};
    auto block_mean = [&](int lo, int hi) {
        double acc = 0.0;
        for (int s = lo; s < hi; ++s) {
            NoisePath path(808, static_cast<std::uint64_t>(s), p.lambda, p.horizon);
            const Trajectory t = simulate(tc, g.apply(p.xi), p.horizon, cfg, path);
            double peak = 0.0;
            for (double z : t.values) peak = std::max(peak, z * z);
            acc += peak;
        }
        return acc / (hi - lo);
    };
    const double a = block_mean(0, 10000);
    const double b = block_mean(10000, 20000);
    CHECK(std::isfinite(a));
    CHECK(std::isfinite(b));
    CHECK(a / b >= 0.8);
    CHECK(a / b <= 1.25);
}

TEST_CASE("adaptivity engages near the discontinuity") {
    const SdeProblem p = builtin_problem("sign-drift");
    const Transform g = build_transform(p, 0.9);
    const CoefficientSet tc = transform_coefficients(p, g);
    double previous_fraction = -1.0;
    for (double delta : {1.0 / 16, 1.0 / 64, 1.0 / 256}) {
        const SchemeConfig cfg{SchemeKind::doubly_adaptive_qm, delta,
                               StepSizePolicy(p.coefficients.theta, 1.0, delta)};
        const lattice::Tick full = static_cast<lattice::Tick>(
            std::floor(delta * lattice::kTicksPerUnit));
        std::size_t shortened = 0, total = 0;
        for (int s = 0; s < 200; ++s) {
            NoisePath path(909, static_cast<std::uint64_t>(s), p.lambda, p.horizon);
            const Trajectory t = simulate(tc, g.apply(p.xi), p.horizon, cfg, path);
            for (std::size_t n = 0; n + 1 < t.grid_ticks.size(); ++n)
                shortened += (t.grid_ticks[n + 1] - t.grid_ticks[n]) < full;
            total += t.cost();
        }
        const double fraction = static_cast<double>(shortened) / static_cast<double>(total);
        CHECK(fraction > 0.0);
        CHECK(fraction > previous_fraction);
        previous_fraction = fraction;
    }
}

TEST_CASE("scheme kind names round trip") {
    for (SchemeKind k : {SchemeKind::doubly_adaptive_qm, SchemeKind::jump_adapted_qm,
                         SchemeKind::jump_adapted_em})
        CHECK(scheme_kind_from_string(to_string(k)) == k);
    CHECK_THROWS_AS((void)scheme_kind_from_string("midpoint"), ConfigError);
}

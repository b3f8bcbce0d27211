#include <benchmark/benchmark.h>

#include "jdqm/experiment.hpp"
#include "jdqm/model.hpp"
#include "jdqm/noise.hpp"
#include "jdqm/schemes.hpp"
#include "jdqm/stepsize.hpp"
#include "jdqm/transform.hpp"

#include <cmath>

namespace {

void BM_BrownianQuery(benchmark::State& state) {
    jdqm::NoisePath path(1, 0, 0.0, 1.0);
    const jdqm::CounterRng rng(2, 3);
    std::uint64_t i = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(path.brownian_at(jdqm::lattice::quantize(rng.uniform(i++))));
    }
}
BENCHMARK(BM_BrownianQuery);

void BM_NormalDraw(benchmark::State& state) {
    const jdqm::CounterRng rng(4, 5);
    std::uint64_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(rng.normal(i++));
}
BENCHMARK(BM_NormalDraw);

void BM_TransformInvert(benchmark::State& state) {
    const jdqm::SdeProblem p = jdqm::builtin_problem("sign-drift");
    const jdqm::Transform g = jdqm::build_transform(p, 0.9);
    int i = 0;
    for (auto _ : state) {
        const double y = -0.11 + 0.22 * ((i++ % 1000) / 1000.0);
        benchmark::DoNotOptimize(g.invert(y));
    }
}
BENCHMARK(BM_TransformInvert);

void BM_StepSize(benchmark::State& state) {
    const jdqm::StepSizePolicy policy({0.0}, 1.0, 1.0 / 1024);
    int i = 0;
    for (auto _ : state) {
        const double x = -0.5 + (i++ % 997) / 997.0;
        benchmark::DoNotOptimize(policy.step_size(x));
    }
}
BENCHMARK(BM_StepSize);

void BM_SimulateSignDrift(benchmark::State& state) {
    const jdqm::SdeProblem p = jdqm::builtin_problem("sign-drift");
    const jdqm::Transform g = jdqm::build_transform(p, 0.9);
    const jdqm::CoefficientSet tc = jdqm::transform_coefficients(p, g);
    const double delta = std::pow(2.0, -static_cast<int>(state.range(0)));
    const jdqm::SchemeConfig cfg{jdqm::SchemeKind::doubly_adaptive_qm, delta,
                                 jdqm::StepSizePolicy(p.coefficients.theta, 1.0, delta)};
    std::uint64_t sample = 0;
    for (auto _ : state) {
        jdqm::NoisePath path(7, sample++, p.lambda, p.horizon);
        benchmark::DoNotOptimize(jdqm::simulate(tc, g.apply(p.xi), p.horizon, cfg, path));
    }
}
BENCHMARK(BM_SimulateSignDrift)->Arg(6)->Arg(8)->Arg(10);

} // namespace

#include <benchmark/benchmark.h>

#include <random>

#include "renfk/chain_sampler.hpp"
#include "renfk/finite_form.hpp"
#include "renfk/parabolic.hpp"
#include "renfk/semilinear.hpp"
#include "renfk/stable.hpp"
#include "renfk/wos.hpp"

using namespace renfk;

namespace {

// Ring with a few chords, killing 0.5 everywhere.
FiniteChainSpec ring_chain(std::size_t n) {
    const auto nn = static_cast<Eigen::Index>(n);
    FiniteChainSpec spec;
    spec.m = Eigen::VectorXd::Ones(nn);
    spec.L = Eigen::MatrixXd::Zero(nn, nn);
    for (Eigen::Index i = 0; i < nn; ++i) {
        spec.L(i, (i + 1) % nn) += 1.0;
        spec.L((i + 1) % nn, i) += 1.0;
        if (i % 3 == 0) {
            spec.L(i, (i + nn / 2) % nn) += 0.5;
            spec.L((i + nn / 2) % nn, i) += 0.5;
        }
    }
    for (Eigen::Index i = 0; i < nn; ++i) spec.L(i, i) = -spec.L.row(i).sum() - 0.5;
    return spec;
}

void BM_ChainWalk(benchmark::State& state) {
    const ChainSampler sampler(ring_chain(static_cast<std::size_t>(state.range(0))));
    Rng rng(1);
    std::int64_t steps = 0;
    for (auto _ : state) {
        double acc = 0.0;
        sampler.walk(0, std::numeric_limits<double>::infinity(), rng, [&](std::size_t s, double, double d) {
            acc += static_cast<double>(s) * d;
            ++steps;
        });
        benchmark::DoNotOptimize(acc);
    }
    state.counters["sojourns/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ChainWalk)->Arg(10)->Arg(50)->Arg(200);

void BM_WosPath(benchmark::State& state) {
    const int dim = static_cast<int>(state.range(0));
    const Domain ball = Domain::ball(dim, Point{}, 1.0);
    const FieldMeasure zero = FieldMeasure::zero(dim);
    const SourceFn one = [](const Point&) { return 1.0; };
    Rng rng(2);
    for (auto _ : state) benchmark::DoNotOptimize(wos_path(ball, Point{0.5, 0.0, 0.0}, one, zero, 1e-4, rng));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_WosPath)->DenseRange(1, 3);

void BM_StablePath(benchmark::State& state) {
    const double alpha = static_cast<double>(state.range(0)) / 10.0;
    const Domain interval = Domain::interval(-1.0, 1.0);
    const StableBallKernel kernel(1, alpha);
    const SourceFn g = [](const Point& p) { return 1.0 + p[0] * p[0]; };
    Rng rng(3);
    for (auto _ : state) benchmark::DoNotOptimize(stable_path(interval, kernel, Point{0.3, 0.0, 0.0}, g, rng));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StablePath)->Arg(5)->Arg(10)->Arg(15);

void BM_StableKernelTable(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(StableBallKernel(static_cast<int>(state.range(0)), 1.5));
}
BENCHMARK(BM_StableKernelTable)->DenseRange(1, 3)->Unit(benchmark::kMillisecond);

void BM_SemilinearSolve(benchmark::State& state) {
    const FiniteForm form = assemble_form(ring_chain(static_cast<std::size_t>(state.range(0))));
    const Nonlinearity f = builtin_nonlinearity("saturating", {{"rate", 1.0}, {"source", 0.5}});
    const StateMeasure mu(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(form.size())));
    for (auto _ : state) benchmark::DoNotOptimize(solve_elliptic_finite(form, f, mu, {}).u.sum());
}
BENCHMARK(BM_SemilinearSolve)->Arg(50)->Arg(200)->Unit(benchmark::kMicrosecond);

void BM_ParabolicGrid(benchmark::State& state) {
    ParabolicProblem p;
    const FiniteChainSpec chain = ring_chain(20);
    p.horizon = 1.0;
    p.m = chain.m;
    p.generators = {GeneratorPiece{1.0, chain.L}};
    p.f = builtin_nonlinearity("linear_decay", {{"rate", 1.0}});
    p.terminal = Eigen::VectorXd::LinSpaced(20, -1.0, 1.0);
    const double dt = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_parabolic_finite(p, dt).values.sum());
}
BENCHMARK(BM_ParabolicGrid)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

// Serial reference vs OpenMP fan-out on the Monte Carlo kernels. Both run the
// same per-path work with the same seeds, so outputs are identical.

#include "exlab/excursions.hpp"
#include "exlab/localtime.hpp"
#include "exlab/parallel.hpp"
#include "exlab/paths.hpp"
#include "exlab/rng.hpp"
#include "exlab/signs.hpp"

#include <benchmark/benchmark.h>

#include <omp.h>

namespace {

using namespace exlab;

ExecPolicy policy_for(const benchmark::State& state) {
    return state.range(1) == 0 ? ExecPolicy::serial() : ExecPolicy::threads(static_cast<int>(state.range(1)));
}

void set_labels(benchmark::State& state, std::size_t steps) {
    state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * state.range(0) * static_cast<int64_t>(steps));
    state.SetLabel(state.range(1) == 0 ? "serial" : "omp");
}

// Euler solution of dX = sgn(X) dB, keep X_1.
void BM_tanaka_paths(benchmark::State& state) {
    const auto sigma = Coefficient::step(1.0, -1.0);
    const double dt = 1e-4;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto v = map_paths(
            n, [&](std::size_t i) { return euler_sde(sigma, sample_brownian(rng::derive_seed(1, i, rng::kDriver), 1.0, dt)).values.back(); },
            policy_for(state));
        benchmark::DoNotOptimize(v.data());
    }
    set_labels(state, 10000);
}

// Theorem 1 construction with excursion indexing and sign choice.
void BM_construct_theorem1(benchmark::State& state) {
    const double dt = 1e-4;
    const auto n = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto v = map_paths(
            n,
            [&](std::size_t i) {
                const auto B = sample_brownian(rng::derive_seed(2, i, rng::kDriver), 1.0, dt);
                return construct_theorem1(B, 2.0, -1.0, rng::derive_seed(2, i, rng::kSigns)).X.values.back();
            },
            policy_for(state));
        benchmark::DoNotOptimize(v.data());
    }
    set_labels(state, 10000);
}

// Reflecting BM at dt = 1e-5 with the three local-time readings.
void BM_local_time(benchmark::State& state) {
    const double dt = 1e-5;
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto unit = Coefficient::step(1.0, 1.0);
    for (auto _ : state) {
        auto v = map_paths(
            n,
            [&](std::size_t i) {
                const auto r = reflect_skorokhod(sample_brownian(rng::derive_seed(3, i, rng::kDriver), 1.0, dt));
                return local_time_occupation(r.Y, unit, 0.01, 1.0, true, Grid::reflected).value +
                       local_time_downcrossing(r.Y, 0.01, 1.0, Grid::reflected).value;
            },
            policy_for(state));
        benchmark::DoNotOptimize(v.data());
    }
    set_labels(state, 100000);
}

void policies(benchmark::internal::Benchmark* b, int64_t paths) {
    b->Args({paths, 0});
    const int maxw = omp_get_num_procs();
    for (int w = 1; w <= maxw; w *= 2) b->Args({paths, w});
    if ((maxw & (maxw - 1)) != 0) b->Args({paths, maxw});
    b->ArgNames({"paths", "workers"})->Unit(benchmark::kMillisecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_tanaka_paths)->Apply([](auto* b) { policies(b, 256); });
BENCHMARK(BM_construct_theorem1)->Apply([](auto* b) { policies(b, 256); });
BENCHMARK(BM_local_time)->Apply([](auto* b) { policies(b, 32); });

BENCHMARK_MAIN();

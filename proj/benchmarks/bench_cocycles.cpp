#include <benchmark/benchmark.h>

#include <metvol/cocycles.hpp>
#include <metvol/met.hpp>

using namespace metvol;

namespace {

void BM_GrowthRatesStep(benchmark::State& state) {
    const int d = static_cast<int>(state.range(0));
    std::vector<ScalarLaw> laws(d, ScalarLaw::log_uniform(0.5, 2.0));
    CocycleSpec spec = CocycleSpec::iid_diagonal_op(laws, NormSpec::euclidean(), 3);
    Trajectory traj = stream(spec, 1 << 20);
    GrowthOptions opts;
    opts.endpoint_volumes = false;
    for (auto _ : state) {
        const int N = 256;
        benchmark::DoNotOptimize(growth_rates(traj, std::min(d, 4), N, opts, 1).n);
        state.SetItemsProcessed(state.items_processed() + N);
    }
}
BENCHMARK(BM_GrowthRatesStep)->Arg(4)->Arg(8);

void BM_StreamReplay(benchmark::State& state) {
    CocycleSpec spec = CocycleSpec::iid_general_op(6, 1.0, NormSpec::euclidean(), 5);
    Trajectory traj = stream(spec, 1 << 20);
    int k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(traj.op(k++ & 1023));
    }
}
BENCHMARK(BM_StreamReplay);

void BM_FastSubspace(benchmark::State& state) {
    Matrix A(3, 3);
    A << 2, 1, 0, 0, 1, 0.3, 0, 0, 0.4;
    CocycleSpec spec = CocycleSpec::constant_op(A, NormSpec::euclidean(), 1);
    Trajectory traj = stream(spec, 4096);
    for (auto _ : state)
        benchmark::DoNotOptimize(fast_subspace(traj, 1, 64, 7).log_det);
}
BENCHMARK(BM_FastSubspace);

}  // namespace

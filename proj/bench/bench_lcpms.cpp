// Timings for one test point of the nonparametric study: cached predictor
// (serial and parallel precomputation) against the brute-force pipeline.

#include <benchmark/benchmark.h>

#include "lcpms/oracle_ref.hpp"
#include "lcpms/parallel.hpp"
#include "lcpms/selection.hpp"
#include "lcpms/simulation.hpp"

namespace {

using namespace lcpms;

struct Fixture {
    SampleSplit split;
    ModelBank bank;
    KernelSpec kernel{KernelFamily::Gaussian, 0.3};
    GammaGrid grid = GammaGrid::standard();

    explicit Fixture(std::size_t n)
        : split(generate({DgpFamily::SineCubed, 0.1, n, n, 16, 12345})),
          bank(build_model_bank(nonparametric_bank_spec(), split.train)) {}
};

void BM_BuildPredictor(benchmark::State& state) {
    const Fixture f(static_cast<std::size_t>(state.range(0)));
    const auto execution = state.range(1) ? Execution::Parallel : Execution::Serial;
    for (auto _ : state) {
        const LcpmsPredictor p(f.split.calib, f.bank, f.kernel, f.grid, execution);
        benchmark::DoNotOptimize(p.num_models());
    }
}

void BM_CachedPredict(benchmark::State& state) {
    const Fixture f(static_cast<std::size_t>(state.range(0)));
    const auto execution = state.range(1) ? Execution::Parallel : Execution::Serial;
    const LcpmsPredictor p(f.split.calib, f.bank, f.kernel, f.grid, execution);
    std::size_t t = 0;
    for (auto _ : state) {
        const LcpmsResult r = p.predict(f.split.test.x(t++ % f.split.test.size()), 0.1);
        benchmark::DoNotOptimize(r.interval.measure());
    }
}

void BM_NaivePredict(benchmark::State& state) {
    const Fixture f(static_cast<std::size_t>(state.range(0)));
    std::size_t t = 0;
    for (auto _ : state) {
        const auto r = oracle::naive_lcpms(f.split.calib, f.split.test.x(t++ % f.split.test.size()), 0.1, f.grid,
                                           f.bank, f.kernel);
        benchmark::DoNotOptimize(r.interval.measure());
    }
}

}  // namespace

BENCHMARK(BM_BuildPredictor)->ArgsProduct({{200, 500}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CachedPredict)->ArgsProduct({{200, 500}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NaivePredict)->Arg(20)->Arg(50)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

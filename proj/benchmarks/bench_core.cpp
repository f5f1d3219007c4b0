#include <benchmark/benchmark.h>

#include "cpka/metrics.hpp"
#include "cpka/separators.hpp"
#include "cpka/tensor.hpp"
#include "cpka/whitening.hpp"

using namespace cpka;

namespace {

CMatrix white_data(int n, int l, std::uint64_t seed) {
    Rng rng(seed);
    CMatrix x(n, l);
    for (int j = 0; j < l; ++j)
        for (int i = 0; i < n; ++i) x(i, j) = rng.cnormal();
    return whiten({x, 1.0}).z.x;
}

}  // namespace

static void BM_FourthMomentTensor(benchmark::State& state) {
    const CMatrix z = white_data(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(fourth_moment_tensor(z).data().data());
    state.SetItemsProcessed(state.iterations() * state.range(1));
}
BENCHMARK(BM_FourthMomentTensor)->Args({3, 10000})->Args({4, 2000})->Args({8, 10000})->Unit(benchmark::kMicrosecond);

static void BM_Cw3(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const FourthOrderTensor t = fourth_moment_tensor(white_data(n, 2000, 2));
    Rng rng(3);
    CVector w(n);
    for (int i = 0; i < n; ++i) w(i) = rng.cnormal();
    w.normalize();
    for (auto _ : state) benchmark::DoNotOptimize(cw3(t, w).data());
}
BENCHMARK(BM_Cw3)->Arg(3)->Arg(8)->Arg(16);

static void BM_Cw3Samples(benchmark::State& state) {
    const CMatrix z = white_data(static_cast<int>(state.range(0)), 10000, 4);
    CVector w = CVector::Ones(z.rows()).normalized();
    for (auto _ : state) benchmark::DoNotOptimize(cw3_samples(z, w).data());
}
BENCHMARK(BM_Cw3Samples)->Arg(3)->Arg(8);

static void BM_PkaStatisticalTensor(benchmark::State& state) {
    const FourthOrderTensor t = random_statistical_tensor(3, 5);
    PkaConfig cfg;
    cfg.direction = Direction::Descent;
    for (auto _ : state) {
        try {
            benchmark::DoNotOptimize(pka(t, 3, cfg).w.data());
        } catch (const PkaIncomplete& e) {
            benchmark::DoNotOptimize(e.partial().w.data());
        }
    }
}
BENCHMARK(BM_PkaStatisticalTensor)->Unit(benchmark::kMillisecond);

static void BM_Jade(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(6);
    CMatrix s(n, 10000);
    for (int j = 0; j < 10000; ++j)
        for (int i = 0; i < n; ++i) s(i, j) = rng.uniform(-1, 1);
    const CMatrix z = whiten({s, 1.0}).z.x;
    for (auto _ : state) benchmark::DoNotOptimize(jade(z, n).w.data());
}
BENCHMARK(BM_Jade)->Arg(3)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();

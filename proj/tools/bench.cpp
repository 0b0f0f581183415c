#include "echlab/ellipsoid.hpp"
#include "echlab/rotation.hpp"
#include "echlab/twist.hpp"

#include <benchmark/benchmark.h>

#include <numeric>
#include <random>

using namespace echlab;

namespace {

const std::vector<SpectrumEntry>& sqrt2_spectrum() {
    static const auto spec = spectrum_prefix(make_ellipsoid(parse_real("1"), parse_real("sqrt2")), 2'000'001);
    return spec;
}

void BM_WeylWindow(benchmark::State& st, bool parallel) {
    const auto& spec = sqrt2_spectrum();
    const long double V = std::sqrt(2.0L);
    for (auto _ : st) {
        long double d = parallel ? weyl_max_deviation_parallel(spec, V, 1'000'000, 2'000'000)
                                 : weyl_max_deviation_serial(spec, V, 1'000'000, 2'000'000);
        benchmark::DoNotOptimize(d);
    }
}

std::vector<Rotation> grid_thetas() {
    std::vector<Rotation> out;
    for (int v = 2; v <= 12; ++v)
        for (int u = -2 * v; u <= 3 * v; ++u)
            if (std::gcd(u, v) == 1) out.push_back(Rotation::exact(u, v));
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<long double> u(-2, 3);
    for (int i = 0; i < 1000; ++i) out.push_back(Rotation::real(u(rng)));
    return out;
}

void BM_PartitionGrid(benchmark::State& st, bool parallel) {
    const auto thetas = grid_thetas();
    for (auto _ : st) {
        GridReport g = parallel ? partition_grid_parallel(thetas, 2, 50) : partition_grid_serial(thetas, 2, 50);
        benchmark::DoNotOptimize(g.cases);
    }
}

void BM_TwistSweep(benchmark::State& st, bool parallel) {
    const auto f = TwistProfile::named("inv-cube-compact");
    for (auto _ : st) {
        InfiniteTwistReport r = infinite_twist_experiment(f, 10, {1, 2, 4, 8, 16, 32}, {}, parallel);
        benchmark::DoNotOptimize(r.cells.data());
    }
}

}  // namespace

BENCHMARK_CAPTURE(BM_WeylWindow, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_WeylWindow, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PartitionGrid, serial, false)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_PartitionGrid, parallel, true)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_TwistSweep, serial, false)->Unit(benchmark::kMillisecond)->Iterations(1);
BENCHMARK_CAPTURE(BM_TwistSweep, parallel, true)->Unit(benchmark::kMillisecond)->Iterations(1);

BENCHMARK_MAIN();

// Serial reference vs OpenMP kernels on model-canvas and full-resolution grids.
// Run with OMP_NUM_THREADS set to compare scaling; outputs are bit-identical.

#include "radmark/kernels/kernels.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <vector>

namespace k = radmark::kernels;

namespace {

k::Grid grid_of(const benchmark::State& s) {
    const int side = static_cast<int>(s.range(0));
    return {side, side};
}

std::vector<k::Vec2> ring(int n, double cx, double cy, double r) {
    std::vector<k::Vec2> v;
    for (int i = 0; i < n; ++i) {
        const double a = 2 * M_PI * i / n;
        v.push_back({cx + r * std::cos(a) * (1 + 0.2 * std::sin(5 * a)), cy + r * std::sin(a)});
    }
    return v;
}

template <auto Fn>
void disk(benchmark::State& s) {
    const auto g = grid_of(s);
    std::vector<std::uint8_t> out(g.size());
    for (auto _ : s) {
        Fn(out, g, {g.width / 2.0, g.height / 2.0}, g.width * 0.1, 0.5, 0.5);
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * g.size()));
}

template <auto Fn>
void capsules(benchmark::State& s) {
    const auto g = grid_of(s);
    const auto line = ring(64, g.width / 2.0, g.height / 2.0, g.width * 0.35);
    std::vector<std::uint8_t> out(g.size());
    for (auto _ : s) {
        Fn(out, g, line, 2.0, 0.5, 0.5);
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * g.size()));
}

template <auto Fn>
void polygon(benchmark::State& s) {
    const auto g = grid_of(s);
    const auto v = ring(128, g.width / 2.0, g.height / 2.0, g.width * 0.4);
    std::vector<std::uint8_t> out(g.size());
    for (auto _ : s) {
        Fn(out, g, v);
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * g.size()));
}

template <auto Fn>
void resample(benchmark::State& s) {
    const auto dst = grid_of(s);
    const k::Grid src{dst.width * 4, dst.height * 3};
    std::vector<std::int32_t> in(src.size());
    std::mt19937 g(1);
    for (auto& x : in) x = static_cast<std::int32_t>(g() % 4096);
    std::vector<std::uint8_t> out(dst.size());
    const k::AxisMap m{4.0, 3.0, 0.0, 0.0};
    for (auto _ : s) {
        Fn(in, src, out, dst, m, {0, 0, dst.width, dst.height}, {0.0, 4095.0, false});
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * dst.size()));
}

template <auto Fn>
void overlap(benchmark::State& s) {
    const auto g = grid_of(s);
    std::vector<std::uint8_t> a(g.size()), b(g.size());
    std::mt19937 r(2);
    for (std::size_t i = 0; i < g.size(); ++i) a[i] = r() & 1, b[i] = r() & 1;
    for (auto _ : s) benchmark::DoNotOptimize(Fn(a, b));
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * g.size()));
}

template <auto Fn>
void dilate(benchmark::State& s) {
    const auto g = grid_of(s);
    std::vector<std::uint8_t> in(g.size()), out(g.size());
    k::serial::fill_disk(in, g, {g.width / 2.0, g.height / 2.0}, g.width * 0.2, 1, 1);
    for (auto _ : s) {
        Fn(in, out, g);
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * g.size()));
}

} // namespace

#define RADMARK_PAIR(name, kernel)                                                                    \
    BENCHMARK_TEMPLATE(name, &k::serial::kernel)->Name("serial/" #kernel)->Arg(512)->Arg(2048)->UseRealTime(); \
    BENCHMARK_TEMPLATE(name, &k::omp::kernel)->Name("omp/" #kernel)->Arg(512)->Arg(2048)->UseRealTime();

RADMARK_PAIR(disk, fill_disk)
RADMARK_PAIR(capsules, fill_capsules)
RADMARK_PAIR(polygon, fill_polygon)
RADMARK_PAIR(resample, resample_intensity)
RADMARK_PAIR(overlap, overlap)
RADMARK_PAIR(dilate, dilate)

BENCHMARK_MAIN();

#include "radmark/core/rng.hpp"
#include "radmark/kernels/kernels.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <vector>

using namespace radmark;
namespace k = radmark::kernels;

// The OpenMP kernels must agree bit for bit with the serial reference.

TEST_CASE("raster kernels: serial and omp agree") {
    auto g = testing::test_rng(4);
    for (int i = 0; i < 60; ++i) {
        const k::Grid grid{testing::uniform_int(g, 1, 97), testing::uniform_int(g, 1, 97)};
        std::vector<std::uint8_t> a(grid.size()), b(grid.size());
        const k::Vec2 c{testing::uniform(g, -5, 100), testing::uniform(g, -5, 100)};
        const double rmm = testing::uniform(g, 0.1, 20), row = testing::uniform(g, 0.2, 2), col = testing::uniform(g, 0.2, 2);
        k::serial::fill_disk(a, grid, c, rmm, row, col);
        k::omp::fill_disk(b, grid, c, rmm, row, col);
        CHECK(a == b);

        std::vector<k::Vec2> pts;
        for (int j = 0, n = testing::uniform_int(g, 1, 6); j < n; ++j) {
            pts.push_back({testing::uniform(g, 0, 100), testing::uniform(g, 0, 100)});
        }
        std::fill(a.begin(), a.end(), 0);
        std::fill(b.begin(), b.end(), 0);
        k::serial::fill_capsules(a, grid, pts, rmm, row, col);
        k::omp::fill_capsules(b, grid, pts, rmm, row, col);
        CHECK(a == b);

        std::fill(a.begin(), a.end(), 0);
        std::fill(b.begin(), b.end(), 0);
        k::serial::fill_polygon(a, grid, pts);
        k::omp::fill_polygon(b, grid, pts);
        CHECK(a == b);

        std::vector<std::uint8_t> da(grid.size()), db(grid.size());
        k::serial::dilate(a, da, grid);
        k::omp::dilate(a, db, grid);
        CHECK(da == db);
        k::serial::erode(da, a, grid);
        k::omp::erode(da, b, grid);
        CHECK(a == b);
    }
}

TEST_CASE("resampling kernels: serial and omp agree") {
    auto g = testing::test_rng(5);
    for (int i = 0; i < 30; ++i) {
        const k::Grid src{testing::uniform_int(g, 1, 120), testing::uniform_int(g, 1, 120)};
        std::vector<std::int32_t> values(src.size());
        for (auto& v : values) v = testing::uniform_int(g, 0, 4095);
        const k::Grid dst{64, 64};
        const k::AxisMap m{testing::uniform(g, 0.3, 3), testing::uniform(g, 0.3, 3), testing::uniform(g, -4, 4),
                           testing::uniform(g, -4, 4)};
        const k::Rect content{3, 2, 60, 61};
        const k::Window w{100, 3900, i % 2 == 0};
        std::vector<std::uint8_t> a(dst.size()), b(dst.size());
        k::serial::resample_intensity(values, src, a, dst, m, content, w);
        k::omp::resample_intensity(values, src, b, dst, m, content, w);
        CHECK(a == b);

        std::vector<std::uint8_t> bits(src.size());
        for (auto& v : bits) v = testing::uniform_int(g, 0, 1);
        k::serial::resample_nearest(bits, src, a, dst, m);
        k::omp::resample_nearest(bits, src, b, dst, m);
        CHECK(a == b);

        const auto ra = k::serial::intensity_range(values);
        const auto rb = k::omp::intensity_range(values);
        CHECK(ra.min == rb.min);
        CHECK(ra.max == rb.max);
    }
}

TEST_CASE("overlap and threshold kernels agree") {
    auto g = testing::test_rng(6);
    std::vector<std::uint8_t> a(10000), b(10000);
    std::vector<float> p(10000);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = testing::uniform_int(g, 0, 1);
        b[i] = testing::uniform_int(g, 0, 1);
        p[i] = static_cast<float>(testing::uniform(g, 0, 1));
    }
    const auto s = k::serial::overlap(a, b);
    const auto o = k::omp::overlap(a, b);
    CHECK(s.intersection == o.intersection);
    CHECK(s.union_count == o.union_count);
    CHECK(s.a_count == o.a_count);
    CHECK(s.b_count == o.b_count);
    std::vector<std::uint8_t> ta(p.size()), tb(p.size());
    k::serial::threshold(p, ta, 0.5f);
    k::omp::threshold(p, tb, 0.5f);
    CHECK(ta == tb);
}

TEST_CASE("derived seeds are stable and key sensitive") {
    CHECK(derive_seed(42, "a") == derive_seed(42, "a"));
    CHECK(derive_seed(42, "a") != derive_seed(42, "b"));
    CHECK(derive_seed(42, "a") != derive_seed(43, "a"));
    auto r1 = make_rng(9, "x");
    auto r2 = make_rng(9, "x");
    for (int i = 0; i < 100; ++i) CHECK(standard_normal(r1) == standard_normal(r2));
}

TEST_CASE("rng helpers: ranges and moments") {
    auto r = make_rng(1, "moments");
    double sum = 0, sum2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double u = uniform01(r);
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        const double z = standard_normal(r);
        sum += z;
        sum2 += z * z;
        REQUIRE(uniform_index(r, 7) < 7);
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

#pragma once

#include "oracles/oracles.hpp"
#include "radmark/core/mask.hpp"
#include "support/helpers.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace testing {

inline oracle::Grid bits(const radmark::Mask& m) {
    const auto d = m.decode();
    return {d.data().begin(), d.data().end()};
}

inline std::vector<radmark::PointPx> to_points(const std::vector<oracle::P>& v, radmark::Frame f) {
    std::vector<radmark::PointPx> out;
    for (const auto& p : v) out.push_back({p.x, p.y, f});
    return out;
}

// Star-shaped around a center: simple, often non-convex.
inline std::vector<oracle::P> random_star(std::mt19937_64& g, int w, int h) {
    const int n = uniform_int(g, 3, 12);
    std::vector<double> angles;
    for (int i = 0; i < n; ++i) angles.push_back(uniform(g, 0, 2 * std::numbers::pi));
    std::sort(angles.begin(), angles.end());
    const oracle::P c{uniform(g, 0, w), uniform(g, 0, h)};
    std::vector<oracle::P> v;
    for (double a : angles) {
        const double r = uniform(g, 1, 0.6 * std::max(w, h));
        v.push_back({c.x + r * std::cos(a), c.y + r * std::sin(a)});
    }
    return v;
}

} // namespace testing

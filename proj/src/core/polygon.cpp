#include "radmark/core/polygon.hpp"

#include <algorithm>

namespace radmark {

namespace {

double cross(const PointPx& o, const PointPx& a, const PointPx& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_segment(const PointPx& p, const PointPx& a, const PointPx& b) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
}

int orientation(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_touch(const PointPx& p1, const PointPx& p2, const PointPx& q1, const PointPx& q2) {
    const int d1 = orientation(cross(q1, q2, p1));
    const int d2 = orientation(cross(q1, q2, p2));
    const int d3 = orientation(cross(p1, p2, q1));
    const int d4 = orientation(cross(p1, p2, q2));
    if (d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
    if (d1 == 0 && on_segment(p1, q1, q2)) return true;
    if (d2 == 0 && on_segment(p2, q1, q2)) return true;
    if (d3 == 0 && on_segment(q1, p1, p2)) return true;
    if (d4 == 0 && on_segment(q2, p1, p2)) return true;
    return false;
}

} // namespace

double signed_area(std::span<const PointPx> v) {
    double twice = 0.0;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        twice += v[j].x * v[i].y - v[i].x * v[j].y;
    }
    return 0.5 * twice;
}

bool self_intersects(std::span<const PointPx> v) {
    const std::size_t n = v.size();
    if (n < 4) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a1 = v[i];
        const auto& a2 = v[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // Adjacent edges share a vertex by construction.
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_touch(a1, a2, v[j], v[(j + 1) % n])) return true;
        }
    }
    return false;
}

} // namespace radmark

#pragma once

// Per-pixel predicates shared by the serial and OpenMP kernels. Keeping the
// arithmetic in one place is what makes the two versions bit-identical.

#include "radmark/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace radmark::kernels::detail {

inline double center(int i) { return static_cast<double>(i) + 0.5; }

inline bool in_disk(double px, double py, Vec2 c, double r2, double row_mm, double col_mm) {
    const double dx = (px - c.x) * col_mm;
    const double dy = (py - c.y) * row_mm;
    return dx * dx + dy * dy <= r2;
}

// Squared mm distance from (px, py) to segment ab; all inputs in pixels.
inline double segment_dist2(double px, double py, Vec2 a, Vec2 b, double row_mm, double col_mm) {
    const double ax = a.x * col_mm, ay = a.y * row_mm;
    const double bx = b.x * col_mm, by = b.y * row_mm;
    const double qx = px * col_mm, qy = py * row_mm;
    const double ex = bx - ax, ey = by - ay;
    const double len2 = ex * ex + ey * ey;
    double t = 0.0;
    if (len2 > 0.0) {
        t = std::clamp(((qx - ax) * ex + (qy - ay) * ey) / len2, 0.0, 1.0);
    }
    const double dx = qx - (ax + t * ex);
    const double dy = qy - (ay + t * ey);
    return dx * dx + dy * dy;
}

inline bool near_polyline(double px, double py, std::span<const Vec2> pts, double r2, double row_mm,
                          double col_mm) {
    if (pts.size() == 1) {
        return segment_dist2(px, py, pts[0], pts[0], row_mm, col_mm) <= r2;
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (segment_dist2(px, py, pts[i], pts[i + 1], row_mm, col_mm) <= r2) return true;
    }
    return false;
}

// Does the horizontal line through y cross edge (a, b)?
inline bool edge_spans(Vec2 a, Vec2 b, double y) { return (a.y > y) != (b.y > y); }

inline double edge_crossing_x(Vec2 a, Vec2 b, double y) { return (b.x - a.x) * (y - a.y) / (b.y - a.y) + a.x; }

inline bool in_polygon(double px, double py, std::span<const Vec2> v) {
    bool inside = false;
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
        if (edge_spans(v[i], v[j], py) && px < edge_crossing_x(v[i], v[j], py)) inside = !inside;
    }
    return inside;
}

// Bilinear sample at continuous pixel-center coordinates, edge-clamped.
inline double sample_bilinear(std::span<const std::int32_t> src, Grid g, double sx, double sy) {
    const double fx = std::clamp(sx - 0.5, 0.0, static_cast<double>(g.width - 1));
    const double fy = std::clamp(sy - 0.5, 0.0, static_cast<double>(g.height - 1));
    const int x0 = static_cast<int>(fx);
    const int y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, g.width - 1);
    const int y1 = std::min(y0 + 1, g.height - 1);
    const double tx = fx - x0;
    const double ty = fy - y0;
    auto at = [&](int x, int y) { return static_cast<double>(src[static_cast<std::size_t>(y) * g.width + x]); };
    const double top = at(x0, y0) * (1.0 - tx) + at(x1, y0) * tx;
    const double bottom = at(x0, y1) * (1.0 - tx) + at(x1, y1) * tx;
    return top * (1.0 - ty) + bottom * ty;
}

// Mean of source pixels whose centers fall in [sx0, sx1) x [sy0, sy1). Falls
// back to the nearest pixel when the footprint holds no center.
inline double sample_area(std::span<const std::int32_t> src, Grid g, double sx0, double sy0, double sx1,
                          double sy1) {
    const int ix0 = std::max(0, static_cast<int>(std::ceil(sx0 - 0.5)));
    const int iy0 = std::max(0, static_cast<int>(std::ceil(sy0 - 0.5)));
    const int ix1 = std::min(g.width, static_cast<int>(std::ceil(sx1 - 0.5)));
    const int iy1 = std::min(g.height, static_cast<int>(std::ceil(sy1 - 0.5)));
    double sum = 0.0;
    long count = 0;
    for (int y = iy0; y < iy1; ++y) {
        for (int x = ix0; x < ix1; ++x) {
            sum += src[static_cast<std::size_t>(y) * g.width + x];
            ++count;
        }
    }
    if (count == 0) {
        const int x = std::clamp(static_cast<int>(std::floor((sx0 + sx1) * 0.5)), 0, g.width - 1);
        const int y = std::clamp(static_cast<int>(std::floor((sy0 + sy1) * 0.5)), 0, g.height - 1);
        return src[static_cast<std::size_t>(y) * g.width + x];
    }
    return sum / static_cast<double>(count);
}

inline std::uint8_t apply_window(double v, Window w) {
    const double span = w.high - w.low;
    double scaled = span > 0.0 ? (v - w.low) / span * 255.0 : 0.0;
    scaled = std::clamp(scaled, 0.0, 255.0);
    auto out = static_cast<std::uint8_t>(std::lround(scaled));
    return w.invert ? static_cast<std::uint8_t>(255 - out) : out;
}

inline std::uint8_t sample_window(std::span<const std::int32_t> src, Grid sg, AxisMap m, Window w, int x, int y) {
    const double cx = center(x), cy = center(y);
    double v;
    if (m.scale_x > 1.0 || m.scale_y > 1.0) {
        // Downsampling: each destination pixel covers more than one source pixel.
        const double sx0 = x * m.scale_x + m.offset_x;
        const double sy0 = y * m.scale_y + m.offset_y;
        v = sample_area(src, sg, sx0, sy0, sx0 + m.scale_x, sy0 + m.scale_y);
    } else {
        v = sample_bilinear(src, sg, cx * m.scale_x + m.offset_x, cy * m.scale_y + m.offset_y);
    }
    return apply_window(v, w);
}

inline std::uint8_t sample_nearest(std::span<const std::uint8_t> src, Grid sg, AxisMap m, int x, int y) {
    const double sx = center(x) * m.scale_x + m.offset_x;
    const double sy = center(y) * m.scale_y + m.offset_y;
    const double fx = std::floor(sx), fy = std::floor(sy);
    if (fx < 0.0 || fy < 0.0 || fx >= sg.width || fy >= sg.height) return 0;
    return src[static_cast<std::size_t>(fy) * sg.width + static_cast<std::size_t>(fx)] != 0 ? 1 : 0;
}

// Source index along one axis for every destination index, -1 outside.
inline std::vector<int> nearest_indices(int dst_count, double scale, double offset, int src_count) {
    std::vector<int> idx(static_cast<std::size_t>(dst_count));
    for (int i = 0; i < dst_count; ++i) {
        const double f = std::floor(center(i) * scale + offset);
        idx[static_cast<std::size_t>(i)] = f < 0.0 || f >= src_count ? -1 : static_cast<int>(f);
    }
    return idx;
}

inline std::uint8_t morph_at(std::span<const std::uint8_t> in, Grid g, int x, int y, bool dilation) {
    for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
            const int nx = x + dx, ny = y + dy;
            const bool set = nx >= 0 && ny >= 0 && nx < g.width && ny < g.height &&
                             in[static_cast<std::size_t>(ny) * g.width + nx] != 0;
            if (dilation && set) return 1;
            if (!dilation && !set) return 0;
        }
    }
    return dilation ? 0 : 1;
}

} // namespace radmark::kernels::detail

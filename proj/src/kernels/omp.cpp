#include "predicates.hpp"

#include <omp.h>

#include <limits>
#include <vector>

namespace radmark::kernels::omp {

using detail::center;

namespace {

// Rows/columns whose centers may satisfy a predicate bounded by [lo, hi].
struct Span {
    int begin;
    int end;
};

Span candidate_span(double lo, double hi, int limit) {
    const double b = std::floor(lo) - 1.0;
    const double e = std::ceil(hi) + 1.0;
    Span s{static_cast<int>(std::clamp(b, 0.0, static_cast<double>(limit))),
           static_cast<int>(std::clamp(e, 0.0, static_cast<double>(limit)))};
    return s;
}

} // namespace

void fill_disk(std::span<std::uint8_t> out, Grid g, Vec2 c, double radius_mm, double row_mm, double col_mm) {
    const double r2 = radius_mm * radius_mm;
    const double rx = radius_mm / col_mm, ry = radius_mm / row_mm;
    const Span xs = candidate_span(c.x - rx, c.x + rx, g.width);
    const Span ys = candidate_span(c.y - ry, c.y + ry, g.height);
#pragma omp parallel for schedule(static)
    for (int y = ys.begin; y < ys.end; ++y) {
        for (int x = xs.begin; x < xs.end; ++x) {
            if (detail::in_disk(center(x), center(y), c, r2, row_mm, col_mm)) {
                out[static_cast<std::size_t>(y) * g.width + x] = 1;
            }
        }
    }
}

void fill_capsules(std::span<std::uint8_t> out, Grid g, std::span<const Vec2> pts, double radius_mm, double row_mm,
                   double col_mm) {
    if (pts.empty()) return;
    const double r2 = radius_mm * radius_mm;
    const double rx = radius_mm / col_mm, ry = radius_mm / row_mm;
    double min_x = pts[0].x, max_x = pts[0].x, min_y = pts[0].y, max_y = pts[0].y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const Span xs = candidate_span(min_x - rx, max_x + rx, g.width);
    const Span ys = candidate_span(min_y - ry, max_y + ry, g.height);
#pragma omp parallel for schedule(dynamic, 8)
    for (int y = ys.begin; y < ys.end; ++y) {
        for (int x = xs.begin; x < xs.end; ++x) {
            if (detail::near_polyline(center(x), center(y), pts, r2, row_mm, col_mm)) {
                out[static_cast<std::size_t>(y) * g.width + x] = 1;
            }
        }
    }
}

void fill_polygon(std::span<std::uint8_t> out, Grid g, std::span<const Vec2> v) {
    if (v.size() < 3) return;
    double min_y = v[0].y, max_y = v[0].y;
    for (const auto& p : v) {
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const Span ys = candidate_span(min_y, max_y, g.height);
#pragma omp parallel
    {
        std::vector<double> crossings;
#pragma omp for schedule(dynamic, 8)
        for (int y = ys.begin; y < ys.end; ++y) {
            const double cy = center(y);
            crossings.clear();
            for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
                if (detail::edge_spans(v[i], v[j], cy)) crossings.push_back(detail::edge_crossing_x(v[i], v[j], cy));
            }
            std::sort(crossings.begin(), crossings.end());
            // A center is inside iff an odd number of crossings lie strictly to
            // its right, i.e. it sits in [c[2k], c[2k+1]).
            for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
                const double lo = crossings[k], hi = crossings[k + 1];
                int x = static_cast<int>(std::clamp(std::ceil(lo - 0.5) - 1.0, 0.0, static_cast<double>(g.width)));
                while (x < g.width && center(x) < lo) ++x;
                for (; x < g.width && center(x) < hi; ++x) {
                    out[static_cast<std::size_t>(y) * g.width + x] = 1;
                }
            }
        }
    }
}

void resample_nearest(std::span<const std::uint8_t> src, Grid sg, std::span<std::uint8_t> dst, Grid dg, AxisMap m) {
    // The map is separable: source column depends on x only, row on y only.
    // Same per-axis arithmetic as detail::sample_nearest, tabulated.
    const auto xs = detail::nearest_indices(dg.width, m.scale_x, m.offset_x, sg.width);
    const auto ys = detail::nearest_indices(dg.height, m.scale_y, m.offset_y, sg.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dg.height; ++y) {
        auto* row = dst.data() + static_cast<std::size_t>(y) * dg.width;
        if (ys[y] < 0) {
            std::fill(row, row + dg.width, std::uint8_t{0});
            continue;
        }
        const auto* srow = src.data() + static_cast<std::size_t>(ys[y]) * sg.width;
        for (int x = 0; x < dg.width; ++x) {
            row[x] = xs[x] >= 0 && srow[xs[x]] != 0 ? 1 : 0;
        }
    }
}

void resample_intensity(std::span<const std::int32_t> src, Grid sg, std::span<std::uint8_t> dst, Grid dg, AxisMap m,
                        Rect content, Window w) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < dg.height; ++y) {
        std::uint8_t* row = dst.data() + static_cast<std::size_t>(y) * dg.width;
        if (y < content.y0 || y >= content.y1) {
            std::fill(row, row + dg.width, std::uint8_t{0});
            continue;
        }
        for (int x = 0; x < dg.width; ++x) {
            row[x] = (x >= content.x0 && x < content.x1) ? detail::sample_window(src, sg, m, w, x, y) : std::uint8_t{0};
        }
    }
}

IntensityRange intensity_range(std::span<const std::int32_t> values) {
    std::int32_t lo = std::numeric_limits<std::int32_t>::max();
    std::int32_t hi = std::numeric_limits<std::int32_t>::min();
    const auto n = static_cast<std::ptrdiff_t>(values.size());
#pragma omp parallel for reduction(min : lo) reduction(max : hi) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        lo = std::min(lo, values[static_cast<std::size_t>(i)]);
        hi = std::max(hi, values[static_cast<std::size_t>(i)]);
    }
    return {lo, hi};
}

Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    std::size_t inter = 0, uni = 0, ca = 0, cb = 0;
    const auto n = static_cast<std::ptrdiff_t>(a.size());
#pragma omp parallel for reduction(+ : inter, uni, ca, cb) schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const bool sa = a[static_cast<std::size_t>(i)] != 0, sb = b[static_cast<std::size_t>(i)] != 0;
        ca += sa;
        cb += sb;
        inter += sa && sb;
        uni += sa || sb;
    }
    return {inter, uni, ca, cb};
}

void threshold(std::span<const float> prob, std::span<std::uint8_t> out, float level) {
    const auto n = static_cast<std::ptrdiff_t>(prob.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        out[static_cast<std::size_t>(i)] = prob[static_cast<std::size_t>(i)] >= level ? 1 : 0;
    }
}

void dilate(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Grid g) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            out[static_cast<std::size_t>(y) * g.width + x] = detail::morph_at(in, g, x, y, true);
        }
    }
}

void erode(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Grid g) {
#pragma omp parallel for schedule(static)
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            out[static_cast<std::size_t>(y) * g.width + x] = detail::morph_at(in, g, x, y, false);
        }
    }
}

} // namespace radmark::kernels::omp

#include "predicates.hpp"

#include <limits>

namespace radmark::kernels::serial {

using detail::center;

void fill_disk(std::span<std::uint8_t> out, Grid g, Vec2 c, double radius_mm, double row_mm, double col_mm) {
    const double r2 = radius_mm * radius_mm;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
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
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            if (detail::near_polyline(center(x), center(y), pts, r2, row_mm, col_mm)) {
                out[static_cast<std::size_t>(y) * g.width + x] = 1;
            }
        }
    }
}

void fill_polygon(std::span<std::uint8_t> out, Grid g, std::span<const Vec2> v) {
    if (v.size() < 3) return;
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            if (detail::in_polygon(center(x), center(y), v)) {
                out[static_cast<std::size_t>(y) * g.width + x] = 1;
            }
        }
    }
}

void resample_nearest(std::span<const std::uint8_t> src, Grid sg, std::span<std::uint8_t> dst, Grid dg, AxisMap m) {
    for (int y = 0; y < dg.height; ++y) {
        for (int x = 0; x < dg.width; ++x) {
            dst[static_cast<std::size_t>(y) * dg.width + x] = detail::sample_nearest(src, sg, m, x, y);
        }
    }
}

void resample_intensity(std::span<const std::int32_t> src, Grid sg, std::span<std::uint8_t> dst, Grid dg, AxisMap m,
                        Rect content, Window w) {
    for (int y = 0; y < dg.height; ++y) {
        for (int x = 0; x < dg.width; ++x) {
            const bool inside = x >= content.x0 && x < content.x1 && y >= content.y0 && y < content.y1;
            dst[static_cast<std::size_t>(y) * dg.width + x] =
                inside ? detail::sample_window(src, sg, m, w, x, y) : std::uint8_t{0};
        }
    }
}

IntensityRange intensity_range(std::span<const std::int32_t> values) {
    IntensityRange r{std::numeric_limits<std::int32_t>::max(), std::numeric_limits<std::int32_t>::min()};
    for (const auto v : values) {
        r.min = std::min(r.min, v);
        r.max = std::max(r.max, v);
    }
    return r;
}

Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    Overlap o;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const bool sa = a[i] != 0, sb = b[i] != 0;
        o.a_count += sa;
        o.b_count += sb;
        o.intersection += sa && sb;
        o.union_count += sa || sb;
    }
    return o;
}

void threshold(std::span<const float> prob, std::span<std::uint8_t> out, float level) {
    for (std::size_t i = 0; i < prob.size(); ++i) {
        out[i] = prob[i] >= level ? 1 : 0;
    }
}

void dilate(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Grid g) {
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            out[static_cast<std::size_t>(y) * g.width + x] = detail::morph_at(in, g, x, y, true);
        }
    }
}

void erode(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Grid g) {
    for (int y = 0; y < g.height; ++y) {
        for (int x = 0; x < g.width; ++x) {
            out[static_cast<std::size_t>(y) * g.width + x] = detail::morph_at(in, g, x, y, false);
        }
    }
}

} // namespace radmark::kernels::serial

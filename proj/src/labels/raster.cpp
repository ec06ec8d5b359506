#include "radmark/labels/raster.hpp"

#include "radmark/core/polygon.hpp"
#include "radmark/error.hpp"
#include "radmark/kernels/kernels.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace radmark {

namespace {

std::string label(std::string_view code) { return code.empty() ? std::string("feature") : "'" + std::string(code) + "'"; }

void check_canvas(Canvas c) {
    if (c.width <= 0 || c.height <= 0) {
        throw ContractViolation("raster canvas must have positive dimensions");
    }
}

void check_frame(const PointPx& p, Canvas c) {
    if (p.frame != c.frame) {
        throw ContractViolation("point in " + std::string(to_string(p.frame)) + " frame rasterized on a " +
                                std::string(to_string(c.frame)) + " canvas");
    }
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ContractViolation("non-finite point");
    }
}

void check_length(double mm, const char* what) {
    if (!(mm > 0.0) || !std::isfinite(mm)) {
        throw ConfigError(std::string(what) + " must be finite and positive");
    }
}

std::vector<kernels::Vec2> to_vec2(std::span<const PointPx> pts, Canvas c) {
    std::vector<kernels::Vec2> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        check_frame(p, c);
        out.push_back({p.x, p.y});
    }
    return out;
}

} // namespace

Mask rasterize_landmark(const PointPx& p, double radius_mm, const PixelSpacing& spacing, Canvas canvas,
                        std::string_view code) {
    check_canvas(canvas);
    check_frame(p, canvas);
    check_length(radius_mm, "landmark radius");
    DenseMask dense(canvas.width, canvas.height, canvas.frame);
    kernels::omp::fill_disk(dense.data(), {canvas.width, canvas.height}, {p.x, p.y}, radius_mm, spacing.row_mm,
                            spacing.col_mm);
    if (dense.is_empty()) {
        const double fx = std::floor(p.x), fy = std::floor(p.y);
        if (fx >= 0.0 && fy >= 0.0 && fx < canvas.width && fy < canvas.height) {
            dense.set(static_cast<int>(fx), static_cast<int>(fy));
        } else {
            throw ValidationError("landmark " + label(code) + " rasterizes to an empty mask (outside the canvas)");
        }
    }
    return Mask::encode(dense);
}

Mask rasterize_outline(std::span<const PointPx> line, double stroke_mm, const PixelSpacing& spacing, Canvas canvas,
                       std::string_view code) {
    check_canvas(canvas);
    check_length(stroke_mm, "outline stroke");
    if (line.empty()) {
        throw ValidationError("outline " + label(code) + " has no points");
    }
    const auto pts = to_vec2(line, canvas);
    DenseMask dense(canvas.width, canvas.height, canvas.frame);
    kernels::omp::fill_capsules(dense.data(), {canvas.width, canvas.height}, pts, stroke_mm / 2.0, spacing.row_mm,
                                spacing.col_mm);
    if (dense.is_empty()) {
        throw ValidationError("outline " + label(code) + " rasterizes to an empty mask");
    }
    return Mask::encode(dense);
}

Mask rasterize_patch(std::span<const PointPx> polygon, Canvas canvas, std::string_view code) {
    check_canvas(canvas);
    if (polygon.size() < 3) {
        throw ValidationError("patch " + label(code) + " needs at least 3 vertices");
    }
    const auto pts = to_vec2(polygon, canvas);
    if (signed_area(polygon) == 0.0) {
        throw ValidationError("patch " + label(code) + " has zero area");
    }
    if (self_intersects(polygon)) {
        throw ValidationError("patch " + label(code) + " is self-intersecting");
    }
    DenseMask dense(canvas.width, canvas.height, canvas.frame);
    kernels::omp::fill_polygon(dense.data(), {canvas.width, canvas.height}, pts);
    if (dense.is_empty()) {
        throw ValidationError("patch " + label(code) + " covers no pixel center");
    }
    return Mask::encode(dense);
}

BBox mask_to_bbox(const DenseMask& mask) {
    int x0 = std::numeric_limits<int>::max(), y0 = x0;
    int x1 = -1, y1 = -1;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.get(x, y)) continue;
            x0 = std::min(x0, x);
            y0 = std::min(y0, y);
            x1 = std::max(x1, x);
            y1 = std::max(y1, y);
        }
    }
    if (x1 < 0) {
        throw ValidationError("mask_to_bbox: mask is empty");
    }
    return BBox(x0, y0, x1 + 1, y1 + 1, mask.frame());
}

BBox mask_to_bbox(const Mask& mask) {
    // Walk the runs instead of decoding.
    const int w = mask.width();
    int x0 = std::numeric_limits<int>::max(), y0 = x0;
    int x1 = -1, y1 = -1;
    std::size_t pos = 0;
    bool fg = false;
    for (const auto run : mask.runs()) {
        if (fg && run > 0) {
            const std::size_t first = pos, last = pos + run - 1;
            const int ya = static_cast<int>(first / w), yb = static_cast<int>(last / w);
            y0 = std::min(y0, ya);
            y1 = std::max(y1, yb);
            if (ya != yb) {
                // A run crossing a row boundary reaches both column 0 and column w - 1.
                x0 = 0;
                x1 = w - 1;
            } else {
                x0 = std::min(x0, static_cast<int>(first % w));
                x1 = std::max(x1, static_cast<int>(last % w));
            }
        }
        pos += run;
        fg = !fg;
    }
    if (x1 < 0) {
        throw ValidationError("mask_to_bbox: mask is empty");
    }
    return BBox(x0, y0, x1 + 1, y1 + 1, mask.frame());
}

} // namespace radmark

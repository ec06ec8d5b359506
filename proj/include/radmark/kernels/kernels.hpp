#pragma once

// Per-pixel kernels behind rasterization, resampling, normalization and mask
// statistics. Each kernel exists twice with identical signatures:
//
//   kernels::omp     row-parallel OpenMP version used by the library
//   kernels::serial  plain reference loops, kept for parity tests and the
//                    benchmark
//
// Both versions evaluate the same per-pixel predicate, so their outputs are
// bit-identical. Pixel (x, y) has its center at (x + 0.5, y + 0.5).

#include <cstddef>
#include <cstdint>
#include <span>

namespace radmark::kernels {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct Grid {
    int width = 0;
    int height = 0;

    std::size_t size() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

// Maps destination pixel-center coordinates to source coordinates:
// src = dst * scale + offset, per axis.
struct AxisMap {
    double scale_x = 1.0;
    double scale_y = 1.0;
    double offset_x = 0.0;
    double offset_y = 0.0;
};

// Destination rectangle that receives content; everything else is zero.
struct Rect {
    int x0 = 0;
    int y0 = 0;
    int x1 = 0; // exclusive
    int y1 = 0; // exclusive
};

struct Overlap {
    std::size_t intersection = 0;
    std::size_t union_count = 0;
    std::size_t a_count = 0;
    std::size_t b_count = 0;
};

struct IntensityRange {
    std::int32_t min = 0;
    std::int32_t max = 0;
};

// Linear intensity window mapped to [0, 255].
struct Window {
    double low = 0.0;
    double high = 1.0;
    bool invert = false;
};

#define RADMARK_KERNEL_DECLS                                                                               \
    /* OR-fills pixels whose centers lie in the ellipse |(c - center) * spacing| <= radius_mm. */          \
    void fill_disk(std::span<std::uint8_t> out, Grid grid, Vec2 center, double radius_mm, double row_mm,   \
                   double col_mm);                                                                         \
    /* OR-fills pixels within radius_mm (mm space) of any polyline segment. */                             \
    void fill_capsules(std::span<std::uint8_t> out, Grid grid, std::span<const Vec2> polyline,             \
                       double radius_mm, double row_mm, double col_mm);                                    \
    /* OR-fills pixel centers inside the polygon under the even-odd rule. */                               \
    void fill_polygon(std::span<std::uint8_t> out, Grid grid, std::span<const Vec2> vertices);             \
    void resample_nearest(std::span<const std::uint8_t> src, Grid src_grid, std::span<std::uint8_t> dst,   \
                          Grid dst_grid, AxisMap dst_to_src);                                              \
    void resample_intensity(std::span<const std::int32_t> src, Grid src_grid, std::span<std::uint8_t> dst, \
                            Grid dst_grid, AxisMap dst_to_src, Rect content, Window window);               \
    IntensityRange intensity_range(std::span<const std::int32_t> values);                                  \
    Overlap overlap(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);                     \
    void threshold(std::span<const float> prob, std::span<std::uint8_t> out, float level);                 \
    /* 3x3 (8-neighbourhood) morphology. Pixels outside the grid count as background. */                   \
    void dilate(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Grid grid);                 \
    void erode(std::span<const std::uint8_t> in, std::span<std::uint8_t> out, Grid grid);

namespace serial {
RADMARK_KERNEL_DECLS
} // namespace serial

namespace omp {
RADMARK_KERNEL_DECLS
} // namespace omp

#undef RADMARK_KERNEL_DECLS

} // namespace radmark::kernels

#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace radmark {

inline constexpr int default_model_side = 512;

// Placement of an original image inside the square model canvas.
struct Letterbox {
    GeometryTransform transform;
    int side = 0;
    // Content rectangle in model pixels, half-open.
    int content_x0 = 0;
    int content_y0 = 0;
    int content_x1 = 0;
    int content_y1 = 0;
};

// The longer side becomes `side`; the shorter is rounded to whole pixels and
// centered with floor((side - content) / 2) padding before it. Per-axis scale
// is content / original so the content edges land on pixel boundaries.
Letterbox compute_letterbox(int width, int height, int side);

// Square 8-bit model input. transform maps original -> model.
struct NormalizedImage {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> intensities;
    GeometryTransform transform;
    // Set when the source had zero intensity variance; intensities are all 0.
    bool degenerate = false;

    std::uint8_t at(int x, int y) const { return intensities[static_cast<std::size_t>(y) * width + x]; }
};

// Window: the DICOM window when present, else per-image min-max. MONOCHROME1
// sources are inverted so bone is bright. Downsampling area-averages,
// upsampling is bilinear.
NormalizedImage normalize_image(const ImageRecord& record, int target_side = default_model_side);

// Full-resolution 8-bit rendition with the same window rule, no resampling.
std::vector<std::uint8_t> render_original(const ImageRecord& record);

} // namespace radmark

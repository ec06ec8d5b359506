#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/mask.hpp"

#include <span>
#include <string_view>

namespace radmark {

struct Canvas {
    int width = 0;
    int height = 0;
    Frame frame = Frame::original;
};

// All rasterizers set a pixel iff its center (x + 0.5, y + 0.5) lies in the
// shape. Inputs must carry the canvas frame. `code` only labels errors.

// Filled disk of radius_mm, an ellipse in pixels under anisotropic spacing.
// When no center falls inside but p is on the canvas, the pixel containing p
// is set. Throws ValidationError if the mask would be empty.
Mask rasterize_landmark(const PointPx& p, double radius_mm, const PixelSpacing& spacing, Canvas canvas,
                        std::string_view code = {});

// Union of capsules of radius stroke_mm / 2 around each segment. Coincident
// points degenerate to a disk. Throws ValidationError if the mask is empty.
Mask rasterize_outline(std::span<const PointPx> line, double stroke_mm, const PixelSpacing& spacing, Canvas canvas,
                       std::string_view code = {});

// Even-odd fill. Throws ValidationError for fewer than 3 vertices, zero area,
// self-intersection or an empty result.
Mask rasterize_patch(std::span<const PointPx> polygon, Canvas canvas, std::string_view code = {});

// Tight half-open bounds [min, max + 1) of the set pixels, in the mask frame.
// Throws ValidationError for an empty mask.
BBox mask_to_bbox(const DenseMask& mask);
BBox mask_to_bbox(const Mask& mask);

} // namespace radmark

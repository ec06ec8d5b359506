#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/mask.hpp"

namespace radmark {

// Nearest-neighbour resampling between frames: each destination pixel center
// is mapped through the transform and takes the source pixel it lands in.
Mask mask_to_model_frame(const Mask& original, const GeometryTransform& t, int model_width, int model_height);
Mask mask_to_original_frame(const Mask& model, const GeometryTransform& t, int original_width, int original_height);

} // namespace radmark

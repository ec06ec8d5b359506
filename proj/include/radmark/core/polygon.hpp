#pragma once

#include "radmark/core/geometry.hpp"

#include <span>

namespace radmark {

// Shoelace area; positive for counter-clockwise vertex order in a y-up frame.
double signed_area(std::span<const PointPx> vertices);

// True when two non-adjacent edges of the closed polygon touch or cross.
bool self_intersects(std::span<const PointPx> vertices);

} // namespace radmark

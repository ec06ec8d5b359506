#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/mask.hpp"
#include "radmark/labels/bundle.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace radmark {

// Line grammar (one feature per line, values printed with 6 decimals):
//   box      "k cx cy w h"          center and size over canvas width/height
//   polygon  "k x1 y1 x2 y2 ..."    outer contour vertices over width/height
// k is the registry class id. A polygon feature with several 4-connected
// components emits one line per component.
enum class LabelFormat { box, polygon };

std::string_view to_string(LabelFormat format);
std::optional<LabelFormat> parse_label_format(std::string_view text);

struct LabelExport {
    std::string text;
    std::vector<std::string> warnings;
};

LabelExport export_detection_labels(const LabelBundle& bundle, LabelFormat format);

struct BoxLabel {
    int class_index = 0;
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct NormPoint {
    double x = 0.0;
    double y = 0.0;
};

struct PolygonLabel {
    int class_index = 0;
    std::vector<NormPoint> vertices;
};

// Throw ValidationError naming the offending line.
std::vector<BoxLabel> parse_box_labels(std::string_view text);
std::vector<PolygonLabel> parse_polygon_labels(std::string_view text);

BBox box_label_to_bbox(const BoxLabel& label, int width, int height, Frame frame);

// Outer boundary of every 4-connected component, traced along pixel edges so
// vertices sit on pixel corners. Clockwise on screen (y down), collinear
// vertices removed, components in raster order of their first pixel. Filling
// a contour with the even-odd rule gives back its component with holes filled.
std::vector<std::vector<PointPx>> trace_outer_contours(const DenseMask& mask);

} // namespace radmark

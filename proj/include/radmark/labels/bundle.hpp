#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/image.hpp"
#include "radmark/core/mask.hpp"
#include "radmark/core/registry.hpp"
#include "radmark/ingest/annotations.hpp"
#include "radmark/ingest/normalize.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace radmark {

// Pixel grid that annotations are rasterized onto.
struct RasterTarget {
    int width = 0;
    int height = 0;
    Frame frame = Frame::original;
    // original -> target; identity for the original frame.
    GeometryTransform transform;
    // Spacing of the target grid.
    PixelSpacing spacing;
};

// Uncalibrated images are rasterized as if spacing were 1 mm/px, so radii and
// strokes are read as pixels.
RasterTarget original_target(int width, int height, const std::optional<PixelSpacing>& spacing);
RasterTarget model_target(int width, int height, const std::optional<PixelSpacing>& spacing, int side);

// Per-class masks and their tight boxes, in the target frame.
struct LabelBundle {
    std::string image_id;
    Split split = Split::unassigned;
    int width = 0;
    int height = 0;
    Frame frame = Frame::model;
    std::map<ClassId, Mask> masks;
    std::map<ClassId, BBox> boxes;
    // Features that could not be rasterized; the rest of the bundle is valid.
    std::vector<FeatureIssue> issues;

    bool empty() const { return masks.empty(); }
};

LabelBundle build_label_bundle(const AnnotationSet& set, const ClassRegistry& registry, const RasterTarget& target,
                               Split split = Split::unassigned);

// Throws ValidationError if a box is not the tight box of its mask or the key
// sets differ.
void check_label_bundle(const LabelBundle& bundle);

} // namespace radmark

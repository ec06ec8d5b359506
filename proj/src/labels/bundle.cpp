#include "radmark/labels/bundle.hpp"

#include "radmark/core/mask_transform.hpp"
#include "radmark/error.hpp"
#include "radmark/labels/raster.hpp"

namespace radmark {

namespace {

std::vector<PointPx> to_target(const std::vector<PointPx>& pts, const RasterTarget& t) {
    std::vector<PointPx> out;
    out.reserve(pts.size());
    for (const auto& p : pts) {
        out.push_back(t.frame == Frame::model ? to_model_frame(p, t.transform) : p);
    }
    return out;
}

} // namespace

RasterTarget original_target(int width, int height, const std::optional<PixelSpacing>& spacing) {
    return {width, height, Frame::original, GeometryTransform::identity(), spacing.value_or(PixelSpacing{})};
}

RasterTarget model_target(int width, int height, const std::optional<PixelSpacing>& spacing, int side) {
    const auto lb = compute_letterbox(width, height, side);
    return {side, side, Frame::model, lb.transform, model_frame_spacing(spacing.value_or(PixelSpacing{}), lb.transform)};
}

LabelBundle build_label_bundle(const AnnotationSet& set, const ClassRegistry& registry, const RasterTarget& target,
                               Split split) {
    LabelBundle bundle;
    bundle.image_id = set.image_id;
    bundle.split = split;
    bundle.width = target.width;
    bundle.height = target.height;
    bundle.frame = target.frame;
    const Canvas canvas{target.width, target.height, target.frame};

    for (const auto id : set.class_ids()) {
        const auto& cls = registry.at(id);
        try {
            Mask mask;
            if (auto it = set.landmarks.find(id); it != set.landmarks.end()) {
                const auto p = to_target({it->second}, target).front();
                mask = rasterize_landmark(p, cls.radius_mm, target.spacing, canvas, cls.code);
            } else if (auto it = set.outlines.find(id); it != set.outlines.end()) {
                mask = rasterize_outline(to_target(it->second.points, target), cls.stroke_mm, target.spacing, canvas,
                                         cls.code);
            } else if (auto it = set.patches.find(id); it != set.patches.end()) {
                mask = rasterize_patch(to_target(it->second.vertices, target), canvas, cls.code);
            } else {
                const auto& m = set.masks.at(id);
                mask = target.frame == Frame::model
                           ? mask_to_model_frame(m, target.transform, target.width, target.height)
                           : m;
                if (mask.width() != target.width || mask.height() != target.height) {
                    throw ValidationError("mask for '" + cls.code + "' does not match the image size");
                }
                if (mask.is_empty()) {
                    throw ValidationError("mask for '" + cls.code + "' is empty");
                }
            }
            bundle.boxes.emplace(id, mask_to_bbox(mask));
            bundle.masks.emplace(id, std::move(mask));
        } catch (const ValidationError& e) {
            bundle.issues.push_back({cls.code, e.what()});
        }
    }
    return bundle;
}

void check_label_bundle(const LabelBundle& bundle) {
    if (bundle.masks.size() != bundle.boxes.size()) {
        throw ValidationError("label bundle '" + bundle.image_id + "': mask and box sets differ");
    }
    for (const auto& [id, mask] : bundle.masks) {
        const auto it = bundle.boxes.find(id);
        if (it == bundle.boxes.end()) {
            throw ValidationError("label bundle '" + bundle.image_id + "': class " + std::to_string(index_of(id)) +
                                  " has a mask but no box");
        }
        if (!(mask_to_bbox(mask) == it->second)) {
            throw ValidationError("label bundle '" + bundle.image_id + "': box of class " +
                                  std::to_string(index_of(id)) + " is not the tight box of its mask");
        }
    }
}

} // namespace radmark

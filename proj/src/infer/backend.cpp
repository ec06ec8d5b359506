#include "radmark/infer/backend.hpp"

#include "radmark/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

namespace radmark {

std::string_view to_string(Capability c) {
    switch (c) {
    case Capability::detect: return "detect";
    case Capability::segment: return "segment";
    case Capability::both: return "both";
    }
    return "?";
}

namespace {

void check_side(const InferenceBackend& backend, const NormalizedImage& image) {
    const auto& d = backend.descriptor();
    if (image.width != d.required_input_side || image.height != d.required_input_side) {
        throw BackendError("backend '" + d.name + "' requires " + std::to_string(d.required_input_side) + "x" +
                           std::to_string(d.required_input_side) + " input, got " + std::to_string(image.width) + "x" +
                           std::to_string(image.height));
    }
}

bool supports(Capability have, Capability want) { return have == Capability::both || have == want; }

template <typename Fn>
auto guarded(const InferenceBackend& backend, const char* stage, Fn&& fn) {
    try {
        return fn();
    } catch (const BackendError&) {
        throw;
    } catch (const std::exception& e) {
        throw BackendError("backend '" + backend.descriptor().name + "' " + stage + " failed: " + e.what());
    } catch (...) {
        throw BackendError("backend '" + backend.descriptor().name + "' " + stage + " failed");
    }
}

} // namespace

std::optional<BBox> clip_box(const BBox& box, int width, int height) {
    const double x0 = std::max(box.x_min(), 0.0), y0 = std::max(box.y_min(), 0.0);
    const double x1 = std::min(box.x_max(), static_cast<double>(width));
    const double y1 = std::min(box.y_max(), static_cast<double>(height));
    if (!(x0 < x1) || !(y0 < y1)) return std::nullopt;
    return BBox(x0, y0, x1, y1, box.frame());
}

std::vector<Detection> run_detect(InferenceBackend& backend, const NormalizedImage& image) {
    check_side(backend, image);
    const auto& name = backend.descriptor().name;
    if (!supports(backend.descriptor().provides, Capability::detect)) {
        throw BackendError("backend '" + name + "' does not provide detection");
    }
    auto dets = guarded(backend, "detect", [&] { return backend.detect(image); });
    for (const auto& d : dets) {
        if (d.box.frame() != Frame::model) {
            throw BackendError("backend '" + name + "' returned a detection outside the model frame");
        }
        if (!std::isfinite(d.confidence) || d.confidence < 0.0 || d.confidence > 1.0) {
            throw BackendError("backend '" + name + "' returned confidence " + std::to_string(d.confidence) +
                               " outside [0, 1]");
        }
    }
    return dets;
}

SegmentResult run_segment(InferenceBackend& backend, const NormalizedImage& image, const BBox& prompt,
                          ClassId class_id) {
    check_side(backend, image);
    const auto& name = backend.descriptor().name;
    if (!supports(backend.descriptor().provides, Capability::segment)) {
        throw BackendError("backend '" + name + "' does not provide segmentation");
    }
    if (prompt.frame() != Frame::model) {
        throw ContractViolation("segment prompt must be in the model frame");
    }
    const auto clipped = clip_box(prompt, image.width, image.height);
    if (!clipped) {
        SegmentResult r{class_id, image.width, image.height, {}, prompt, true, {}};
        r.prob.assign(static_cast<std::size_t>(image.width) * image.height, 0.0f);
        r.warnings.push_back("prompt lies entirely outside the image");
        return r;
    }
    auto r = guarded(backend, "segment", [&] { return backend.segment(image, *clipped, class_id); });
    if (r.width != image.width || r.height != image.height ||
        r.prob.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw BackendError("backend '" + name + "' returned a probability grid that does not match the input");
    }
    for (const float p : r.prob) {
        if (!(p >= 0.0f && p <= 1.0f)) {
            throw BackendError("backend '" + name + "' returned a probability outside [0, 1]");
        }
    }
    r.class_id = class_id;
    r.prompt_box = *clipped;
    if (!(*clipped == prompt)) r.warnings.push_back("prompt clipped to the image");
    return r;
}

} // namespace radmark

#include "radmark/infer/stub.hpp"

#include "radmark/core/rng.hpp"
#include "radmark/error.hpp"
#include "radmark/kernels/kernels.hpp"

#include <cmath>
#include <mutex>

namespace radmark {

StubTruth make_stub_truth(const AnnotationSet& set, const ClassRegistry& registry, int width, int height,
                          const std::optional<PixelSpacing>& spacing, int side) {
    const auto target = model_target(width, height, spacing, side);
    auto bundle = build_label_bundle(set, registry, target);
    StubTruth truth;
    truth.issues = std::move(bundle.issues);
    for (auto& [id, mask] : bundle.masks) {
        if (const auto it = set.landmarks.find(id); it != set.landmarks.end()) {
            const auto p = to_model_frame(it->second, target.transform);
            const double r = registry.at(id).radius_mm;
            const double rx = r / target.spacing.col_mm, ry = r / target.spacing.row_mm;
            truth.boxes.emplace(id, BBox(p.x - rx, p.y - ry, p.x + rx, p.y + ry, Frame::model));
        } else {
            truth.boxes.emplace(id, bundle.boxes.at(id));
        }
        truth.masks.emplace(id, std::move(mask));
    }
    return truth;
}

StubBackend::StubBackend(StubConfig config) : config_(std::move(config)) {
    if (config_.input_side <= 0) throw ConfigError("stub input side must be positive");
    if (!(config_.center_jitter_px >= 0.0) || !(config_.scale_jitter >= 0.0)) {
        throw ConfigError("stub jitter must be non-negative");
    }
    if (!(config_.confidence_penalty >= 0.0 && config_.confidence_penalty <= 1.0)) {
        throw ConfigError("stub confidence penalty must lie in [0, 1]");
    }
    descriptor_ = {"stub", config_.input_side, Capability::both, true};
}

double StubBackend::confidence() const {
    const int active = (config_.center_jitter_px > 0.0) + (config_.scale_jitter > 0.0) + (config_.morphology != 0);
    return std::clamp(1.0 - config_.confidence_penalty * active, 0.0, 1.0);
}

void StubBackend::attach(const std::string& image_id, StubTruth truth) {
    std::unique_lock lock(mutex_);
    truths_.insert_or_assign(image_id, std::move(truth));
}

const StubTruth& StubBackend::truth_for(const std::string& image_id) const {
    std::shared_lock lock(mutex_);
    const auto it = truths_.find(image_id);
    if (it == truths_.end()) {
        throw BackendError("stub: no ground truth attached for image '" + image_id + "'");
    }
    // Entries are never erased, so the reference outlives the lock.
    return it->second;
}

std::vector<Detection> StubBackend::detect(const NormalizedImage& image) {
    const auto& truth = truth_for(image.image_id);
    const double conf = confidence();
    std::vector<Detection> out;
    for (const auto& [id, box] : truth.boxes) {
        if (config_.drop.contains(id)) continue;
        if (config_.center_jitter_px == 0.0 && config_.scale_jitter == 0.0) {
            out.push_back({id, box, conf});
            continue;
        }
        double cx = (box.x_min() + box.x_max()) / 2.0;
        double cy = (box.y_min() + box.y_max()) / 2.0;
        double hw = box.width() / 2.0, hh = box.height() / 2.0;
        auto rng = make_rng(config_.seed, image.image_id + "/" + std::to_string(index_of(id)) + "/box");
        if (config_.center_jitter_px > 0.0) {
            cx += config_.center_jitter_px * standard_normal(rng);
            cy += config_.center_jitter_px * standard_normal(rng);
        }
        if (config_.scale_jitter > 0.0) {
            const double f = std::exp(config_.scale_jitter * standard_normal(rng));
            hw *= f;
            hh *= f;
        }
        out.push_back({id, BBox(cx - hw, cy - hh, cx + hw, cy + hh, Frame::model), conf});
    }
    return out;
}

SegmentResult StubBackend::segment(const NormalizedImage& image, const BBox& prompt, ClassId class_id) {
    const auto& truth = truth_for(image.image_id);
    SegmentResult r{class_id, image.width, image.height, {}, prompt, false, {}};
    r.prob.assign(static_cast<std::size_t>(image.width) * image.height, 0.0f);
    const auto it = truth.masks.find(class_id);
    if (it == truth.masks.end()) {
        r.warnings.push_back("stub: no ground-truth mask for this class");
        return r;
    }
    auto dense = it->second.decode();
    if (dense.width() != image.width || dense.height() != image.height) {
        throw BackendError("stub: attached mask does not match the model grid");
    }
    std::vector<std::uint8_t> scratch(dense.data().size());
    const kernels::Grid g{dense.width(), dense.height()};
    for (int i = 0; i < std::abs(config_.morphology); ++i) {
        if (config_.morphology > 0) {
            kernels::omp::dilate(dense.data(), scratch, g);
        } else {
            kernels::omp::erode(dense.data(), scratch, g);
        }
        std::copy(scratch.begin(), scratch.end(), dense.data().begin());
    }
    for (std::size_t i = 0; i < r.prob.size(); ++i) r.prob[i] = dense.data()[i] ? 1.0f : 0.0f;
    return r;
}

} // namespace radmark

#include "radmark/pipeline/pipeline.hpp"

#include "radmark/core/mask_transform.hpp"
#include "radmark/error.hpp"
#include "radmark/ingest/normalize.hpp"
#include "radmark/kernels/kernels.hpp"
#include "radmark/labels/raster.hpp"

#include <algorithm>
#include <mutex>

#include <omp.h>

namespace radmark {

namespace {

// Strict "a beats b" order used by select_best_per_class.
bool better(const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.box.area() != b.box.area()) return a.box.area() > b.box.area();
    if (a.box.y_min() != b.box.y_min()) return a.box.y_min() < b.box.y_min();
    return a.box.x_min() < b.box.x_min();
}

// Forwards to a backend that cannot take concurrent calls.
class SerializedBackend final : public InferenceBackend {
  public:
    explicit SerializedBackend(InferenceBackend& inner) : inner_(inner) {}
    const BackendDescriptor& descriptor() const override { return inner_.descriptor(); }
    std::vector<Detection> detect(const NormalizedImage& image) override {
        std::lock_guard lock(mutex_);
        return inner_.detect(image);
    }
    SegmentResult segment(const NormalizedImage& image, const BBox& prompt, ClassId id) override {
        std::lock_guard lock(mutex_);
        return inner_.segment(image, prompt, id);
    }

  private:
    InferenceBackend& inner_;
    std::mutex mutex_;
};

bool can_segment(const InferenceBackend& b) { return b.descriptor().provides != Capability::detect; }

PointPx mask_centroid(const Mask& m) {
    const auto dense = m.decode();
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < dense.height(); ++y) {
        for (int x = 0; x < dense.width(); ++x) {
            if (!dense.get(x, y)) continue;
            sx += x + 0.5;
            sy += y + 0.5;
            ++n;
        }
    }
    return {sx / static_cast<double>(n), sy / static_cast<double>(n), m.frame()};
}

} // namespace

std::map<ClassId, Detection> select_best_per_class(const std::vector<Detection>& detections) {
    std::map<ClassId, Detection> best;
    for (const auto& d : detections) {
        const auto it = best.find(d.class_id);
        if (it == best.end()) {
            best.emplace(d.class_id, d);
        } else if (better(d, it->second)) {
            it->second = d;
        }
    }
    return best;
}

PointPx box_center(const BBox& b) {
    return {(b.x_min() + b.x_max()) / 2.0, (b.y_min() + b.y_max()) / 2.0, b.frame()};
}

std::optional<Mask> postprocess_mask(const SegmentResult& r, double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw ConfigError("mask threshold must lie in (0, 1)");
    }
    const int w = r.width, h = r.height;
    std::vector<std::uint8_t> bin(r.prob.size());
    kernels::omp::threshold(r.prob, bin, static_cast<float>(threshold));

    // Largest 4-connected component.
    std::vector<int> label(bin.size(), 0);
    std::vector<int> stack;
    int best_label = 0;
    std::size_t best_size = 0;
    int next = 0;
    for (int i = 0; i < w * h; ++i) {
        if (!bin[i] || label[i]) continue;
        label[i] = ++next;
        stack.push_back(i);
        std::size_t size = 0;
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            ++size;
            const int x = p % w, y = p / w;
            auto visit = [&](int q) {
                if (bin[q] && !label[q]) {
                    label[q] = next;
                    stack.push_back(q);
                }
            };
            if (x > 0) visit(p - 1);
            if (x + 1 < w) visit(p + 1);
            if (y > 0) visit(p - w);
            if (y + 1 < h) visit(p + w);
        }
        if (size > best_size) {
            best_size = size;
            best_label = next;
        }
    }
    if (best_size == 0) return std::nullopt;
    DenseMask out(w, h, Frame::model);
    for (std::size_t i = 0; i < label.size(); ++i) out.data()[i] = label[i] == best_label ? 1 : 0;
    return Mask::encode(out);
}

PredictionSet run_pipeline(const ImageRecord& record, InferenceBackend& backend, const ClassRegistry& registry,
                           const PipelineConfig& config) {
    if (!(config.confidence_threshold >= 0.0 && config.confidence_threshold <= 1.0)) {
        throw ConfigError("confidence threshold must lie in [0, 1]");
    }
    const auto image = normalize_image(record, backend.descriptor().required_input_side);
    const auto& t = image.transform;

    PredictionSet out;
    out.image_id = record.id();
    out.width = record.width();
    out.height = record.height();
    out.spacing = record.spacing();
    if (image.degenerate) out.warnings.push_back("image has zero intensity variance");
    if (!record.calibrated()) out.warnings.push_back("uncalibrated: coordinates reported in pixels");

    std::vector<Detection> accepted;
    for (auto& d : run_detect(backend, image)) {
        if (!registry.contains(d.class_id)) {
            out.warnings.push_back("detection with unknown class id " + std::to_string(index_of(d.class_id)) +
                                   " ignored");
            continue;
        }
        if (d.confidence >= config.confidence_threshold) accepted.push_back(d);
    }
    const auto best = select_best_per_class(accepted);

    for (const auto& cls : registry.classes()) {
        const auto it = best.find(cls.id);
        if (it == best.end()) {
            out.missing.insert(cls.id);
            continue;
        }
        const auto& det = it->second;
        const auto box_original = to_original_frame(det.box, t);

        if (cls.kind == FeatureKind::landmark) {
            PointPx center = box_center(det.box);
            if (config.refine_landmarks_with_masks && can_segment(backend)) {
                const auto seg = run_segment(backend, image, det.box, cls.id);
                if (const auto m = postprocess_mask(seg, config.mask_threshold)) {
                    center = mask_centroid(*m);
                } else {
                    out.warnings.push_back(cls.code + ": refinement mask empty, using the box center");
                }
            }
            out.landmarks.emplace(cls.id, LandmarkPrediction{to_original_frame(center, t), det.confidence, box_original});
            continue;
        }

        if (!can_segment(backend)) {
            out.missing.insert(cls.id);
            out.warnings.push_back(cls.code + ": backend cannot segment");
            continue;
        }
        const auto seg = run_segment(backend, image, det.box, cls.id);
        for (const auto& w : seg.warnings) out.warnings.push_back(cls.code + ": " + w);
        const auto model_mask = postprocess_mask(seg, config.mask_threshold);
        if (!model_mask) {
            out.missing.insert(cls.id);
            out.warnings.push_back(cls.code + ": mask empty after threshold");
            continue;
        }
        auto original = mask_to_original_frame(*model_mask, t, record.width(), record.height());
        if (original.is_empty()) {
            out.missing.insert(cls.id);
            out.warnings.push_back(cls.code + ": mask vanished when resampled to the original frame");
            continue;
        }
        out.masks.emplace(cls.id, MaskPrediction{std::move(original), det.confidence, box_original});
    }
    check_prediction_set(out, registry);
    return out;
}

std::vector<BatchItem> run_batch(const std::vector<std::string>& image_ids,
                                 const std::function<ImageRecord(const std::string&)>& load,
                                 InferenceBackend& backend, const ClassRegistry& registry,
                                 const PipelineConfig& config, int jobs) {
    SerializedBackend serialized(backend);
    InferenceBackend& target = backend.descriptor().thread_safe ? backend : serialized;
    std::vector<BatchItem> items(image_ids.size());
    const int n = static_cast<int>(image_ids.size());
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (int i = 0; i < n; ++i) {
        auto& item = items[i];
        item.image_id = image_ids[i];
        try {
            item.prediction = run_pipeline(load(image_ids[i]), target, registry, config);
        } catch (const Error& e) {
            item.error = e.what();
            item.error_kind = e.kind();
        } catch (const std::exception& e) {
            item.error = e.what();
            item.error_kind = ErrorKind::backend;
        }
    }
    std::sort(items.begin(), items.end(), [](const BatchItem& a, const BatchItem& b) { return a.image_id < b.image_id; });
    return items;
}

} // namespace radmark

#pragma once

#include "radmark/core/image.hpp"
#include "radmark/infer/backend.hpp"
#include "radmark/ingest/annotations.hpp"
#include "radmark/labels/bundle.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <shared_mutex>
#include <string>

namespace radmark {

// Ground truth in the model frame as the stub serves it.
struct StubTruth {
    // Landmarks: the disk's analytic box, point +/- radius per axis, so the
    // box center is the landmark. Other kinds: tight box of the mask.
    std::map<ClassId, BBox> boxes;
    std::map<ClassId, Mask> masks;
    std::vector<FeatureIssue> issues;
};

StubTruth make_stub_truth(const AnnotationSet& set, const ClassRegistry& registry, int width, int height,
                          const std::optional<PixelSpacing>& spacing, int side);

// Corruptions applied to the attached truth. Each knob is independent.
struct StubConfig {
    std::uint64_t seed = 0;
    std::set<ClassId> drop;
    // Gaussian box-center shift, sigma in model pixels per axis.
    double center_jitter_px = 0.0;
    // Box size multiplied by exp(sigma * N(0, 1)), same factor on both axes.
    double scale_jitter = 0.0;
    // > 0 dilates, < 0 erodes the served mask that many 3x3 iterations.
    int morphology = 0;
    // Subtracted from 1.0 once per active corruption.
    double confidence_penalty = 0.1;
    int input_side = default_model_side;
};

class StubBackend final : public InferenceBackend {
  public:
    explicit StubBackend(StubConfig config);

    const BackendDescriptor& descriptor() const override { return descriptor_; }
    std::vector<Detection> detect(const NormalizedImage& image) override;
    SegmentResult segment(const NormalizedImage& image, const BBox& prompt, ClassId class_id) override;

    void attach(const std::string& image_id, StubTruth truth);
    const StubConfig& config() const { return config_; }
    double confidence() const;

  private:
    const StubTruth& truth_for(const std::string& image_id) const;

    StubConfig config_;
    BackendDescriptor descriptor_;
    mutable std::shared_mutex mutex_;
    std::map<std::string, StubTruth> truths_;
};

} // namespace radmark

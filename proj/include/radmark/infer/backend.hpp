#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/registry.hpp"
#include "radmark/ingest/normalize.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace radmark {

enum class Capability { detect, segment, both };

std::string_view to_string(Capability c);

struct BackendDescriptor {
    std::string name;
    int required_input_side = default_model_side;
    Capability provides = Capability::both;
    // False: the pipeline serializes every call into the backend.
    bool thread_safe = true;
};

struct Detection {
    ClassId class_id{};
    BBox box; // model frame
    double confidence = 0.0;
};

struct SegmentResult {
    ClassId class_id{};
    int width = 0;
    int height = 0;
    // Row-major probabilities in [0, 1] on the model grid.
    std::vector<float> prob;
    // Prompt after clipping to the image, or the raw prompt if nothing remained.
    BBox prompt_box;
    // The prompt lay entirely outside the image; prob is all zero.
    bool clipped_empty = false;
    std::vector<std::string> warnings;
};

// Two-stage contract. Implementations may throw anything; callers go through
// run_detect / run_segment, which convert failures to BackendError and
// validate outputs.
class InferenceBackend {
  public:
    virtual ~InferenceBackend() = default;
    virtual const BackendDescriptor& descriptor() const = 0;
    virtual std::vector<Detection> detect(const NormalizedImage& image) = 0;
    // `prompt` has already been clipped to the image.
    virtual SegmentResult segment(const NormalizedImage& image, const BBox& prompt, ClassId class_id) = 0;
};

// Checks the image side against the descriptor, forwards, validates every
// detection (finite model-frame box, confidence in [0, 1]).
std::vector<Detection> run_detect(InferenceBackend& backend, const NormalizedImage& image);

// Clips the prompt to the image. A prompt with nothing left inside returns an
// all-zero result flagged clipped_empty without calling the backend.
SegmentResult run_segment(InferenceBackend& backend, const NormalizedImage& image, const BBox& prompt,
                          ClassId class_id);

// Intersection of the box with [0, width] x [0, height]; nullopt if empty.
std::optional<BBox> clip_box(const BBox& box, int width, int height);

} // namespace radmark

#pragma once

#include "radmark/core/image.hpp"
#include "radmark/core/registry.hpp"
#include "radmark/error.hpp"
#include "radmark/infer/backend.hpp"
#include "radmark/pipeline/predictions.hpp"

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace radmark {

struct PipelineConfig {
    double confidence_threshold = 0.25;
    double mask_threshold = 0.5;
    // Landmarks from the centroid of a box-prompted mask instead of the box
    // center. Falls back to the box center when the mask comes back empty.
    bool refine_landmarks_with_masks = false;
};

// Highest confidence per class; ties go to the larger box, then the lower
// y_min, then the lower x_min.
std::map<ClassId, Detection> select_best_per_class(const std::vector<Detection>& detections);

PointPx box_center(const BBox& box);

// Threshold at >= threshold, keep the largest 4-connected component (first
// in raster order on ties). nullopt when nothing survives the threshold.
std::optional<Mask> postprocess_mask(const SegmentResult& result, double threshold);

// normalize -> detect -> select -> landmarks from box centers, outlines and
// patches from box-prompted masks -> back to the original frame.
PredictionSet run_pipeline(const ImageRecord& record, InferenceBackend& backend, const ClassRegistry& registry,
                           const PipelineConfig& config = {});

struct BatchItem {
    std::string image_id;
    std::optional<PredictionSet> prediction;
    // Set when the image failed; other images are unaffected.
    std::string error;
    std::optional<ErrorKind> error_kind;
};

// Loads each image through `load` and runs it on `jobs` OpenMP threads (0 =
// runtime default). Backends that are not thread safe are called under a
// mutex. Results are sorted by image id.
std::vector<BatchItem> run_batch(const std::vector<std::string>& image_ids,
                                 const std::function<ImageRecord(const std::string&)>& load,
                                 InferenceBackend& backend, const ClassRegistry& registry,
                                 const PipelineConfig& config = {}, int jobs = 0);

} // namespace radmark

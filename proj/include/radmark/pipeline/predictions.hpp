#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/mask.hpp"
#include "radmark/core/registry.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace radmark {

struct LandmarkPrediction {
    PointPx point; // original frame
    double confidence = 0.0;
    // Selected detection box, original frame.
    BBox box;
};

struct MaskPrediction {
    Mask mask; // original frame
    double confidence = 0.0;
    BBox box;
};

// Pipeline output for one image. Every registry class is in exactly one of
// landmarks, masks or missing.
struct PredictionSet {
    static constexpr int schema_version = 1;

    std::string image_id;
    int width = 0;
    int height = 0;
    // Absent for uncalibrated images: coordinates stay in pixels.
    std::optional<PixelSpacing> spacing;
    std::map<ClassId, LandmarkPrediction> landmarks;
    std::map<ClassId, MaskPrediction> masks;
    std::set<ClassId> missing;
    std::vector<std::string> warnings;

    bool calibrated() const { return spacing.has_value(); }
};

// Throws ValidationError unless the completeness and kind invariants hold.
void check_prediction_set(const PredictionSet& p, const ClassRegistry& registry);

nlohmann::json predictions_to_json(const PredictionSet& p, const ClassRegistry& registry);
PredictionSet predictions_from_json(const nlohmann::json& doc, const ClassRegistry& registry);
void save_predictions(const std::filesystem::path& path, const PredictionSet& p, const ClassRegistry& registry);
PredictionSet load_predictions(const std::filesystem::path& path, const ClassRegistry& registry);

// Flattened landmark table:
//   image_id,class,x_mm,y_mm,confidence,x_px,y_px,calibrated
// x_mm and y_mm are empty for uncalibrated images.
std::string predictions_csv_header();
std::string predictions_csv_rows(const PredictionSet& p, const ClassRegistry& registry);

} // namespace radmark

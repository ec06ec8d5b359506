#pragma once

#include "radmark/core/registry.hpp"
#include "radmark/eval/metrics.hpp"
#include "radmark/ingest/annotations.hpp"
#include "radmark/pipeline/predictions.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace radmark {

// Raw per-class observations. Every aggregate in a report is recomputed from
// these lists; nothing else is stored.
struct ClassStats {
    ClassId id{};
    std::string code;
    FeatureKind kind = FeatureKind::landmark;
    Group group = Group::pelvis;
    std::size_t identified = 0;
    std::size_t total = 0;
    // Landmarks on calibrated images.
    std::vector<double> errors_mm;
    // Landmarks on uncalibrated images; excluded from mm aggregates.
    std::vector<double> errors_px;
    // Outlines and patches.
    std::vector<double> mask_iou;
    std::size_t both_empty = 0;
    // Selected detection box against the ground-truth box, all kinds.
    std::vector<double> box_iou;

    bool operator==(const ClassStats&) const = default;
};

struct EvalOptions {
    double acceptability_mm = default_acceptability_mm;
    StdMode std_mode = StdMode::population;
};

struct EvalReport {
    static constexpr int schema_version = 1;

    EvalOptions options;
    std::vector<std::string> images;
    std::size_t uncalibrated_images = 0;
    // One entry per registry class, in id order.
    std::vector<ClassStats> classes;

    bool operator==(const EvalReport& o) const {
        return options.acceptability_mm == o.options.acceptability_mm && options.std_mode == o.options.std_mode &&
               images == o.images && uncalibrated_images == o.uncalibrated_images && classes == o.classes;
    }
};

struct GroupSummary {
    Group group = Group::pelvis;
    std::size_t identified = 0;
    std::size_t total = 0;
    std::optional<double> rate;
    std::optional<Aggregate> error_mm;
    std::optional<Aggregate> mask_iou;
    std::optional<Aggregate> box_iou;
    std::optional<double> acceptability;
};

struct ReportSummary {
    GroupSummary femora;
    GroupSummary pelvis;
    GroupSummary patches_outlines;
    // Landmarks across both landmark groups.
    std::size_t landmark_identified = 0;
    std::size_t landmark_total = 0;
    std::optional<double> landmark_rate;
    std::optional<Aggregate> landmark_error_mm;
    std::optional<double> landmark_acceptability;
};

// Ground truth for one image together with the image geometry.
struct EvalCase {
    const PredictionSet* prediction = nullptr;
    const AnnotationSet* truth = nullptr;
};

// Ground-truth classes count toward totals; a class is identified when the
// prediction holds geometry for it. Predicted classes without ground truth are
// ignored. Ground-truth masks and boxes are rasterized on the original grid.
EvalReport evaluate(const std::vector<EvalCase>& cases, const ClassRegistry& registry, const EvalOptions& options = {});

GroupSummary summarize_group(const EvalReport& report, Group group);
ReportSummary summarize(const EvalReport& report);

nlohmann::json report_to_json(const EvalReport& report);
// Reads the lists back; throws ValidationError if the stored aggregates do not
// match a recomputation.
EvalReport report_from_json(const nlohmann::json& doc);

std::string report_csv(const EvalReport& report);
std::string report_markdown(const EvalReport& report);

// Percentage rounded to a whole number, e.g. 0.9306 -> "93%".
std::string format_percent(double fraction);

} // namespace radmark

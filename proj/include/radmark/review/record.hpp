#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/mask.hpp"
#include "radmark/core/registry.hpp"
#include "radmark/ingest/annotations.hpp"
#include "radmark/pipeline/predictions.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace radmark {

enum class ReviewStatus { pending, in_review, curated };
enum class CorrectionKind { accepted, moved, mask_replaced, marked_missing, added };

std::string_view to_string(ReviewStatus status);
std::optional<ReviewStatus> parse_review_status(std::string_view text);
std::string_view to_string(CorrectionKind kind);
std::optional<CorrectionKind> parse_correction_kind(std::string_view text);

// Original-frame geometry carried by moved, mask_replaced and added.
using Geometry = std::variant<PointPx, Polyline, Polygon, Mask>;

struct Correction {
    ClassId class_id{};
    CorrectionKind kind = CorrectionKind::accepted;
    std::optional<Geometry> geometry;

    bool operator==(const Correction&) const = default;
};

struct ReviewRecord {
    static constexpr int schema_version = 1;

    std::string image_id;
    // 0 until the first stored revision.
    int revision = 0;
    ReviewStatus status = ReviewStatus::pending;
    std::string reviewer;
    std::string created_at;
    std::string updated_at;
    PredictionSet prediction;
    // Latest correction per class.
    std::map<ClassId, Correction> corrections;
    // The batch that produced this revision; replays of it are no-ops.
    std::vector<Correction> last_batch;
    std::string last_action;
};

struct FieldIssue {
    // Position in the submitted batch; -1 for record-level issues.
    int index = -1;
    std::string code;
    std::string field;
    std::string reason;
};

// Checks a batch against the registry, the image bounds and the prediction.
// Empty result means the batch may be applied.
std::vector<FieldIssue> validate_corrections(const std::vector<Correction>& batch, const PredictionSet& prediction,
                                             const ClassRegistry& registry);

// Registry classes with no correction entry, in id order.
std::vector<ClassId> unresolved_classes(const ReviewRecord& record, const ClassRegistry& registry);

// Curated ground truth: accepted predictions plus corrections; marked-missing
// classes are absent. Throws ContractViolation when classes are unresolved.
AnnotationSet curated_annotations(const ReviewRecord& record, const ClassRegistry& registry);

// Throws ValidationError with the first offending field.
Correction correction_from_json(const nlohmann::json& j, const ClassRegistry& registry);
nlohmann::json correction_to_json(const Correction& c, const ClassRegistry& registry);
// Parses a batch, collecting per-entry problems instead of stopping at the
// first.
std::vector<Correction> corrections_from_json(const nlohmann::json& arr, const ClassRegistry& registry,
                                              std::vector<FieldIssue>& issues);

nlohmann::json record_to_json(const ReviewRecord& record, const ClassRegistry& registry);
// Throws ValidationError.
ReviewRecord record_from_json(const nlohmann::json& doc, const ClassRegistry& registry);

nlohmann::json issues_to_json(const std::vector<FieldIssue>& issues);

} // namespace radmark

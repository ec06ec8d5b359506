#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/mask.hpp"
#include "radmark/core/registry.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace radmark {

// Ordered points, at least two, original frame.
struct Polyline {
    std::vector<PointPx> points;
    bool operator==(const Polyline&) const = default;
};

// Implicitly closed ring of at least three vertices, original frame.
struct Polygon {
    std::vector<PointPx> vertices;
    bool operator==(const Polygon&) const = default;
};

// Ground truth for one image. A class appears in at most one container, and
// the container matches the class kind. Outline and patch classes may carry a
// raster mask instead of vector geometry (curated corrections do).
struct AnnotationSet {
    static constexpr int schema_version = 1;

    std::string image_id;
    std::map<ClassId, PointPx> landmarks;
    std::map<ClassId, Polyline> outlines;
    std::map<ClassId, Polygon> patches;
    std::map<ClassId, Mask> masks;

    bool empty() const { return landmarks.empty() && outlines.empty() && patches.empty() && masks.empty(); }
    bool has(ClassId id) const;
    std::vector<ClassId> class_ids() const;

    bool operator==(const AnnotationSet&) const = default;
};

struct FeatureIssue {
    std::string code;
    std::string reason;
};

struct AnnotationLoadResult {
    AnnotationSet set;
    // Features whose code is not in the registry.
    std::vector<FeatureIssue> rejected;
    // Features with malformed geometry; the rest of the document still loads.
    std::vector<FeatureIssue> invalid;
};

// Accepts the canonical layout (schema_version, image_id, landmarks/outlines/
// patches arrays) and the flat adapter layout ({"image_id", "features":
// {code: coordinates}}). Throws IngestionError for document-level failures.
AnnotationLoadResult parse_annotations(const nlohmann::json& doc, const ClassRegistry& registry,
                                       const std::string& source = "<memory>");
AnnotationLoadResult load_annotations(const std::filesystem::path& path, const ClassRegistry& registry);

// Canonical serialization: entries sorted by class id.
nlohmann::json annotations_to_json(const AnnotationSet& set, const ClassRegistry& registry);
void save_annotations(const std::filesystem::path& path, const AnnotationSet& set, const ClassRegistry& registry);

// Flags coordinates outside [0, width] x [0, height] and masks whose size
// differs from the image.
std::vector<FeatureIssue> validate_bounds(const AnnotationSet& set, const ClassRegistry& registry, int width,
                                          int height);

} // namespace radmark

#include "radmark/ingest/annotations.hpp"

#include "radmark/core/polygon.hpp"
#include "radmark/error.hpp"
#include "radmark/io/files.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace radmark {

bool AnnotationSet::has(ClassId id) const {
    return landmarks.contains(id) || outlines.contains(id) || patches.contains(id) || masks.contains(id);
}

std::vector<ClassId> AnnotationSet::class_ids() const {
    std::set<ClassId> ids;
    for (const auto& [id, _] : landmarks) ids.insert(id);
    for (const auto& [id, _] : outlines) ids.insert(id);
    for (const auto& [id, _] : patches) ids.insert(id);
    for (const auto& [id, _] : masks) ids.insert(id);
    return {ids.begin(), ids.end()};
}

namespace {

// Thrown for one feature; caught per entry so the document keeps loading.
struct FeatureError {
    std::string reason;
};

PointPx parse_point(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw FeatureError{"point must be an array of exactly 2 numbers"};
    }
    const PointPx p{j[0].get<double>(), j[1].get<double>(), Frame::original};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw FeatureError{"point coordinates must be finite"};
    }
    return p;
}

std::vector<PointPx> parse_points(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw FeatureError{"coordinates must be an array of points"};
    }
    std::vector<PointPx> out;
    out.reserve(j.size());
    for (const auto& p : j) out.push_back(parse_point(p));
    return out;
}

Mask parse_mask(const nlohmann::json& j) {
    if (!j.contains("width") || !j.contains("height") || !j.contains("rle")) {
        throw FeatureError{"mask needs width, height and rle"};
    }
    try {
        return Mask::from_runs(j["width"].get<int>(), j["height"].get<int>(), Frame::original,
                               j["rle"].get<std::vector<std::uint32_t>>());
    } catch (const ContractViolation& e) {
        throw FeatureError{e.what()};
    } catch (const nlohmann::json::exception& e) {
        throw FeatureError{std::string("malformed mask: ") + e.what()};
    }
}

Polyline to_polyline(std::vector<PointPx> pts) {
    if (pts.size() < 2) throw FeatureError{"polyline needs at least 2 points"};
    return Polyline{std::move(pts)};
}

Polygon to_polygon(std::vector<PointPx> pts) {
    if (pts.size() < 3) throw FeatureError{"polygon needs at least 3 vertices"};
    return Polygon{std::move(pts)};
}

class Builder {
  public:
    Builder(const ClassRegistry& registry, AnnotationLoadResult& out) : registry_(registry), out_(out) {}

    // Resolves the code; records a rejection and returns nullopt if unknown.
    std::optional<ClassId> resolve(const std::string& code) {
        const auto id = registry_.find(code);
        if (!id) out_.rejected.push_back({code, "code not in class registry"});
        return id;
    }

    void add(const std::string& code, ClassId id, const std::string& type, const nlohmann::json& entry,
             const char* coords_key) {
        try {
            const auto& cls = registry_.at(id);
            if (out_.set.has(id)) throw FeatureError{"duplicate feature"};
            const auto& coords = entry.contains(coords_key) ? entry[coords_key] : nlohmann::json();
            switch (cls.kind) {
            case FeatureKind::landmark:
                if (type != "point") throw FeatureError{"landmark geometry must be a point, got '" + type + "'"};
                out_.set.landmarks.emplace(id, parse_point(coords));
                break;
            case FeatureKind::outline:
                if (type == "polyline") {
                    out_.set.outlines.emplace(id, to_polyline(parse_points(coords)));
                } else if (type == "mask") {
                    out_.set.masks.emplace(id, parse_mask(entry));
                } else {
                    throw FeatureError{"outline geometry must be a polyline or mask, got '" + type + "'"};
                }
                break;
            case FeatureKind::patch:
                if (type == "polygon") {
                    out_.set.patches.emplace(id, to_polygon(parse_points(coords)));
                } else if (type == "mask") {
                    out_.set.masks.emplace(id, parse_mask(entry));
                } else {
                    throw FeatureError{"patch geometry must be a polygon or mask, got '" + type + "'"};
                }
                break;
            }
        } catch (const FeatureError& e) {
            out_.invalid.push_back({code, e.reason});
        }
    }

  private:
    const ClassRegistry& registry_;
    AnnotationLoadResult& out_;
};

void parse_canonical(const nlohmann::json& doc, const ClassRegistry& registry, AnnotationLoadResult& out,
                     const std::string& source) {
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
        throw IngestionError(source + ": missing integer schema_version");
    }
    if (doc["schema_version"].get<int>() != AnnotationSet::schema_version) {
        throw IngestionError(source + ": unsupported schema_version " + doc["schema_version"].dump());
    }
    Builder builder(registry, out);
    struct Section {
        const char* key;
        FeatureKind kind;
    };
    for (const Section section : {Section{"landmarks", FeatureKind::landmark}, Section{"outlines", FeatureKind::outline},
                                  Section{"patches", FeatureKind::patch}}) {
        if (!doc.contains(section.key)) continue;
        const auto& arr = doc[section.key];
        if (!arr.is_array()) {
            throw IngestionError(source + ": '" + section.key + "' must be an array");
        }
        for (const auto& entry : arr) {
            if (!entry.is_object() || !entry.contains("code") || !entry["code"].is_string()) {
                out.invalid.push_back({"", std::string("entry in '") + section.key + "' lacks a string code"});
                continue;
            }
            const auto code = entry["code"].get<std::string>();
            const auto id = builder.resolve(code);
            if (!id) continue;
            if (registry.at(*id).kind != section.kind) {
                out.invalid.push_back({code, "class kind " + std::string(to_string(registry.at(*id).kind)) +
                                                 " listed under '" + section.key + "'"});
                continue;
            }
            const auto type = entry.contains("type") && entry["type"].is_string() ? entry["type"].get<std::string>()
                                                                                  : std::string{};
            builder.add(code, *id, type, entry, "coordinates");
        }
    }
}

// Flat adapter: {"image_id": ..., "features": {"A01_r": [x, y], "O01": [[x, y], ...]}}.
// The geometry type is implied by the registry kind.
void parse_flat(const nlohmann::json& doc, const ClassRegistry& registry, AnnotationLoadResult& out,
                const std::string& source) {
    const auto& features = doc["features"];
    if (!features.is_object()) {
        throw IngestionError(source + ": 'features' must be an object");
    }
    Builder builder(registry, out);
    for (const auto& [code, coords] : features.items()) {
        const auto id = builder.resolve(code);
        if (!id) continue;
        const char* type = "point";
        switch (registry.at(*id).kind) {
        case FeatureKind::landmark: type = "point"; break;
        case FeatureKind::outline: type = "polyline"; break;
        case FeatureKind::patch: type = "polygon"; break;
        }
        builder.add(code, *id, type, nlohmann::json{{"coordinates", coords}}, "coordinates");
    }
}

nlohmann::json point_json(const PointPx& p) { return nlohmann::json::array({p.x, p.y}); }

nlohmann::json points_json(const std::vector<PointPx>& pts) {
    auto arr = nlohmann::json::array();
    for (const auto& p : pts) arr.push_back(point_json(p));
    return arr;
}

nlohmann::json mask_json(const std::string& code, const Mask& m) {
    return {{"code", code}, {"type", "mask"}, {"width", m.width()}, {"height", m.height()}, {"rle", m.runs()}};
}

} // namespace

AnnotationLoadResult parse_annotations(const nlohmann::json& doc, const ClassRegistry& registry,
                                       const std::string& source) {
    if (!doc.is_object()) {
        throw IngestionError(source + ": annotation document must be a JSON object");
    }
    if (!doc.contains("image_id") || !doc["image_id"].is_string() || doc["image_id"].get<std::string>().empty()) {
        throw IngestionError(source + ": missing image_id");
    }
    AnnotationLoadResult out;
    out.set.image_id = doc["image_id"].get<std::string>();
    if (doc.contains("features") && !doc.contains("schema_version")) {
        parse_flat(doc, registry, out, source);
    } else {
        parse_canonical(doc, registry, out, source);
    }
    return out;
}

AnnotationLoadResult load_annotations(const std::filesystem::path& path, const ClassRegistry& registry) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw IngestionError(path.string() + ": JSON parse error: " + e.what());
    } catch (const Error& e) {
        throw IngestionError(e.what());
    }
    return parse_annotations(doc, registry, path.string());
}

nlohmann::json annotations_to_json(const AnnotationSet& set, const ClassRegistry& registry) {
    auto landmarks = nlohmann::json::array();
    auto outlines = nlohmann::json::array();
    auto patches = nlohmann::json::array();
    for (const auto id : set.class_ids()) {
        const auto& cls = registry.at(id);
        if (auto it = set.landmarks.find(id); it != set.landmarks.end()) {
            landmarks.push_back({{"code", cls.code}, {"type", "point"}, {"coordinates", point_json(it->second)}});
        } else if (auto it = set.outlines.find(id); it != set.outlines.end()) {
            outlines.push_back({{"code", cls.code}, {"type", "polyline"}, {"coordinates", points_json(it->second.points)}});
        } else if (auto it = set.patches.find(id); it != set.patches.end()) {
            patches.push_back({{"code", cls.code}, {"type", "polygon"}, {"coordinates", points_json(it->second.vertices)}});
        } else if (auto it = set.masks.find(id); it != set.masks.end()) {
            (cls.kind == FeatureKind::outline ? outlines : patches).push_back(mask_json(cls.code, it->second));
        }
    }
    return {{"schema_version", AnnotationSet::schema_version},
            {"image_id", set.image_id},
            {"landmarks", std::move(landmarks)},
            {"outlines", std::move(outlines)},
            {"patches", std::move(patches)}};
}

void save_annotations(const std::filesystem::path& path, const AnnotationSet& set, const ClassRegistry& registry) {
    write_text_file_atomic(path, annotations_to_json(set, registry).dump(2) + "\n");
}

std::vector<FeatureIssue> validate_bounds(const AnnotationSet& set, const ClassRegistry& registry, int width,
                                          int height) {
    std::vector<FeatureIssue> issues;
    auto inside = [&](const PointPx& p) { return p.x >= 0.0 && p.y >= 0.0 && p.x <= width && p.y <= height; };
    for (const auto& [id, p] : set.landmarks) {
        if (!inside(p)) issues.push_back({registry.at(id).code, "landmark outside image bounds"});
    }
    for (const auto& [id, line] : set.outlines) {
        for (const auto& p : line.points) {
            if (!inside(p)) {
                issues.push_back({registry.at(id).code, "outline point outside image bounds"});
                break;
            }
        }
    }
    for (const auto& [id, poly] : set.patches) {
        bool flagged = false;
        for (const auto& p : poly.vertices) {
            if (!inside(p)) {
                issues.push_back({registry.at(id).code, "patch vertex outside image bounds"});
                flagged = true;
                break;
            }
        }
        if (!flagged && std::abs(signed_area(poly.vertices)) == 0.0) {
            issues.push_back({registry.at(id).code, "patch polygon has zero area"});
        } else if (!flagged && self_intersects(poly.vertices)) {
            issues.push_back({registry.at(id).code, "patch polygon is self-intersecting"});
        }
    }
    for (const auto& [id, m] : set.masks) {
        if (m.width() != width || m.height() != height) {
            issues.push_back({registry.at(id).code, "mask size differs from the image"});
        }
    }
    return issues;
}

} // namespace radmark

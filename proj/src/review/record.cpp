#include "radmark/review/record.hpp"

#include "radmark/error.hpp"

#include <array>
#include <cmath>
#include <set>

namespace radmark {

namespace {

constexpr std::array<std::pair<ReviewStatus, std::string_view>, 3> status_names{
    {{ReviewStatus::pending, "pending"}, {ReviewStatus::in_review, "in_review"}, {ReviewStatus::curated, "curated"}}};

constexpr std::array<std::pair<CorrectionKind, std::string_view>, 5> kind_names{{{CorrectionKind::accepted, "accepted"},
                                                                                  {CorrectionKind::moved, "moved"},
                                                                                  {CorrectionKind::mask_replaced, "mask_replaced"},
                                                                                  {CorrectionKind::marked_missing, "marked_missing"},
                                                                                  {CorrectionKind::added, "added"}}};

struct BadField {
    std::string field;
    std::string reason;
};

PointPx point_from(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw BadField{field, "expected [x, y]"};
    }
    const PointPx p{j[0].get<double>(), j[1].get<double>(), Frame::original};
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw BadField{field, "coordinates must be finite"};
    return p;
}

std::vector<PointPx> points_from(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array()) throw BadField{field, "expected an array of points"};
    std::vector<PointPx> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point_from(j[i], field + "[" + std::to_string(i) + "]"));
    return out;
}

Geometry geometry_from(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
        throw BadField{"geometry.type", "missing or not a string"};
    }
    const auto type = j["type"].get<std::string>();
    if (type == "mask") {
        try {
            return Mask::from_runs(j.at("width").get<int>(), j.at("height").get<int>(), Frame::original,
                                   j.at("rle").get<std::vector<std::uint32_t>>());
        } catch (const nlohmann::json::exception&) {
            throw BadField{"geometry", "mask needs integer width, height and rle"};
        } catch (const ContractViolation& e) {
            throw BadField{"geometry.rle", e.what()};
        }
    }
    if (!j.contains("coordinates")) throw BadField{"geometry.coordinates", "missing"};
    const auto& c = j["coordinates"];
    if (type == "point") return point_from(c, "geometry.coordinates");
    if (type == "polyline") {
        auto pts = points_from(c, "geometry.coordinates");
        if (pts.size() < 2) throw BadField{"geometry.coordinates", "polyline needs at least 2 points"};
        return Polyline{std::move(pts)};
    }
    if (type == "polygon") {
        auto pts = points_from(c, "geometry.coordinates");
        if (pts.size() < 3) throw BadField{"geometry.coordinates", "polygon needs at least 3 vertices"};
        return Polygon{std::move(pts)};
    }
    throw BadField{"geometry.type", "unknown geometry type '" + type + "'"};
}

nlohmann::json points_json(const std::vector<PointPx>& pts) {
    auto arr = nlohmann::json::array();
    for (const auto& p : pts) arr.push_back({p.x, p.y});
    return arr;
}

nlohmann::json geometry_json(const Geometry& g) {
    return std::visit(
        [](const auto& v) -> nlohmann::json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PointPx>) {
                return {{"type", "point"}, {"coordinates", {v.x, v.y}}};
            } else if constexpr (std::is_same_v<T, Polyline>) {
                return {{"type", "polyline"}, {"coordinates", points_json(v.points)}};
            } else if constexpr (std::is_same_v<T, Polygon>) {
                return {{"type", "polygon"}, {"coordinates", points_json(v.vertices)}};
            } else {
                return {{"type", "mask"}, {"width", v.width()}, {"height", v.height()}, {"rle", v.runs()}};
            }
        },
        g);
}

Correction parse_one(const nlohmann::json& j, const ClassRegistry& registry) {
    if (!j.is_object()) throw BadField{"", "correction must be an object"};
    if (!j.contains("code") || !j["code"].is_string()) throw BadField{"code", "missing or not a string"};
    const auto code = j["code"].get<std::string>();
    const auto id = registry.find(code);
    if (!id) throw BadField{"code", "not in the class registry"};
    if (!j.contains("kind") || !j["kind"].is_string()) throw BadField{"kind", "missing or not a string"};
    const auto kind = parse_correction_kind(j["kind"].get<std::string>());
    if (!kind) throw BadField{"kind", "unknown correction kind"};
    Correction c{*id, *kind, std::nullopt};
    if (j.contains("geometry") && !j["geometry"].is_null()) c.geometry = geometry_from(j["geometry"]);
    return c;
}

bool in_bounds(const PointPx& p, int w, int h) { return p.x >= 0 && p.y >= 0 && p.x <= w && p.y <= h; }

// Empty when the geometry fits the class kind and the image.
std::optional<BadField> check_geometry(const Geometry& g, FeatureKind kind, int w, int h) {
    const bool ok_kind = std::visit(
        [kind](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PointPx>) return kind == FeatureKind::landmark;
            if constexpr (std::is_same_v<T, Polyline>) return kind == FeatureKind::outline;
            if constexpr (std::is_same_v<T, Polygon>) return kind == FeatureKind::patch;
            if constexpr (std::is_same_v<T, Mask>) return kind != FeatureKind::landmark;
        },
        g);
    if (!ok_kind) return BadField{"geometry.type", "geometry does not match the class kind"};
    if (const auto* m = std::get_if<Mask>(&g)) {
        if (m->width() != w || m->height() != h) return BadField{"geometry", "mask size differs from the image"};
        return std::nullopt;
    }
    std::vector<PointPx> pts;
    if (const auto* p = std::get_if<PointPx>(&g)) pts = {*p};
    if (const auto* l = std::get_if<Polyline>(&g)) pts = l->points;
    if (const auto* q = std::get_if<Polygon>(&g)) pts = q->vertices;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!in_bounds(pts[i], w, h)) {
            return BadField{"geometry.coordinates", "point " + std::to_string(i) + " lies outside the image"};
        }
    }
    return std::nullopt;
}

bool predicted(const PredictionSet& p, ClassId id) { return p.landmarks.count(id) || p.masks.count(id); }

} // namespace

std::string_view to_string(ReviewStatus status) {
    for (const auto& [s, n] : status_names)
        if (s == status) return n;
    return "pending";
}

std::optional<ReviewStatus> parse_review_status(std::string_view text) {
    for (const auto& [s, n] : status_names)
        if (n == text) return s;
    return std::nullopt;
}

std::string_view to_string(CorrectionKind kind) {
    for (const auto& [k, n] : kind_names)
        if (k == kind) return n;
    return "accepted";
}

std::optional<CorrectionKind> parse_correction_kind(std::string_view text) {
    for (const auto& [k, n] : kind_names)
        if (n == text) return k;
    return std::nullopt;
}

std::vector<FieldIssue> validate_corrections(const std::vector<Correction>& batch, const PredictionSet& prediction,
                                             const ClassRegistry& registry) {
    std::vector<FieldIssue> issues;
    std::set<ClassId> seen;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& c = batch[i];
        const auto* cls = index_of(c.class_id) >= 0 && static_cast<std::size_t>(index_of(c.class_id)) < registry.size()
                              ? &registry.at(c.class_id)
                              : nullptr;
        auto issue = [&](std::string field, std::string reason) {
            issues.push_back({static_cast<int>(i), cls ? cls->code : std::string(), std::move(field), std::move(reason)});
        };
        if (!cls) {
            issue("code", "not in the class registry");
            continue;
        }
        if (!seen.insert(c.class_id).second) {
            issue("code", "class appears more than once in the batch");
            continue;
        }
        const bool has_pred = predicted(prediction, c.class_id);
        const bool wants_geometry = c.kind == CorrectionKind::moved || c.kind == CorrectionKind::mask_replaced ||
                                    c.kind == CorrectionKind::added;
        if (wants_geometry && !c.geometry) {
            issue("geometry", "required for " + std::string(to_string(c.kind)));
            continue;
        }
        if (!wants_geometry && c.geometry) {
            issue("geometry", "not allowed for " + std::string(to_string(c.kind)));
            continue;
        }
        switch (c.kind) {
        case CorrectionKind::accepted:
            if (!has_pred) issue("kind", "nothing predicted to accept; use added or marked_missing");
            break;
        case CorrectionKind::moved:
            if (cls->kind != FeatureKind::landmark) issue("kind", "moved applies to landmarks only");
            else if (!has_pred) issue("kind", "no predicted point to move; use added");
            else if (!std::holds_alternative<PointPx>(*c.geometry)) issue("geometry.type", "moved needs a point");
            break;
        case CorrectionKind::mask_replaced:
            if (cls->kind == FeatureKind::landmark) issue("kind", "mask_replaced applies to outlines and patches");
            else if (!has_pred) issue("kind", "no predicted mask to replace; use added");
            else if (!std::holds_alternative<Mask>(*c.geometry)) issue("geometry.type", "mask_replaced needs a mask");
            break;
        case CorrectionKind::added:
            if (has_pred) issue("kind", "class has a prediction; use moved or mask_replaced");
            break;
        case CorrectionKind::marked_missing:
            break;
        }
        if (c.geometry && (issues.empty() || issues.back().index != static_cast<int>(i))) {
            if (auto bad = check_geometry(*c.geometry, cls->kind, prediction.width, prediction.height)) {
                issue(bad->field, bad->reason);
            }
        }
    }
    return issues;
}

std::vector<ClassId> unresolved_classes(const ReviewRecord& record, const ClassRegistry& registry) {
    std::vector<ClassId> out;
    for (const auto& cls : registry.classes())
        if (!record.corrections.count(cls.id)) out.push_back(cls.id);
    return out;
}

AnnotationSet curated_annotations(const ReviewRecord& record, const ClassRegistry& registry) {
    if (!unresolved_classes(record, registry).empty()) {
        throw ContractViolation("record '" + record.image_id + "' has unresolved classes");
    }
    AnnotationSet out;
    out.image_id = record.image_id;
    const auto& p = record.prediction;
    for (const auto& [id, c] : record.corrections) {
        switch (c.kind) {
        case CorrectionKind::marked_missing:
            break;
        case CorrectionKind::accepted:
            if (auto it = p.landmarks.find(id); it != p.landmarks.end()) out.landmarks[id] = it->second.point;
            if (auto it = p.masks.find(id); it != p.masks.end()) out.masks[id] = it->second.mask;
            break;
        default:
            std::visit(
                [&out, id](const auto& v) {
                    using T = std::decay_t<decltype(v)>;
                    if constexpr (std::is_same_v<T, PointPx>) out.landmarks[id] = v;
                    if constexpr (std::is_same_v<T, Polyline>) out.outlines[id] = v;
                    if constexpr (std::is_same_v<T, Polygon>) out.patches[id] = v;
                    if constexpr (std::is_same_v<T, Mask>) out.masks[id] = v;
                },
                *c.geometry);
        }
    }
    return out;
}

Correction correction_from_json(const nlohmann::json& j, const ClassRegistry& registry) {
    try {
        return parse_one(j, registry);
    } catch (const BadField& b) {
        throw ValidationError("correction field '" + b.field + "': " + b.reason);
    }
}

nlohmann::json correction_to_json(const Correction& c, const ClassRegistry& registry) {
    nlohmann::json j{{"code", registry.at(c.class_id).code}, {"kind", to_string(c.kind)}};
    if (c.geometry) j["geometry"] = geometry_json(*c.geometry);
    return j;
}

std::vector<Correction> corrections_from_json(const nlohmann::json& arr, const ClassRegistry& registry,
                                              std::vector<FieldIssue>& issues) {
    std::vector<Correction> out;
    if (!arr.is_array()) {
        issues.push_back({-1, "", "corrections", "expected an array"});
        return out;
    }
    for (std::size_t i = 0; i < arr.size(); ++i) {
        try {
            out.push_back(parse_one(arr[i], registry));
        } catch (const BadField& b) {
            const auto code = arr[i].is_object() && arr[i].contains("code") && arr[i]["code"].is_string()
                                  ? arr[i]["code"].get<std::string>()
                                  : std::string();
            issues.push_back({static_cast<int>(i), code, b.field, b.reason});
        }
    }
    return out;
}

nlohmann::json record_to_json(const ReviewRecord& r, const ClassRegistry& registry) {
    auto corrections = nlohmann::json::array();
    for (const auto& [id, c] : r.corrections) corrections.push_back(correction_to_json(c, registry));
    auto batch = nlohmann::json::array();
    for (const auto& c : r.last_batch) batch.push_back(correction_to_json(c, registry));
    auto unresolved = nlohmann::json::array();
    for (auto id : unresolved_classes(r, registry)) unresolved.push_back(registry.at(id).code);
    return {{"schema_version", ReviewRecord::schema_version},
            {"image_id", r.image_id},
            {"revision", r.revision},
            {"status", to_string(r.status)},
            {"reviewer", r.reviewer},
            {"created_at", r.created_at},
            {"updated_at", r.updated_at},
            {"last_action", r.last_action},
            {"prediction", predictions_to_json(r.prediction, registry)},
            {"corrections", std::move(corrections)},
            {"last_batch", std::move(batch)},
            {"unresolved", std::move(unresolved)}};
}

ReviewRecord record_from_json(const nlohmann::json& doc, const ClassRegistry& registry) {
    try {
        if (doc.at("schema_version").get<int>() != ReviewRecord::schema_version) {
            throw ValidationError("review record: unsupported schema_version");
        }
        ReviewRecord r;
        r.image_id = doc.at("image_id").get<std::string>();
        r.revision = doc.at("revision").get<int>();
        const auto status = parse_review_status(doc.at("status").get<std::string>());
        if (!status) throw ValidationError("review record: unknown status");
        r.status = *status;
        r.reviewer = doc.at("reviewer").get<std::string>();
        r.created_at = doc.at("created_at").get<std::string>();
        r.updated_at = doc.at("updated_at").get<std::string>();
        r.last_action = doc.value("last_action", std::string());
        r.prediction = predictions_from_json(doc.at("prediction"), registry);
        for (const auto& j : doc.at("corrections")) {
            auto c = correction_from_json(j, registry);
            r.corrections[c.class_id] = std::move(c);
        }
        for (const auto& j : doc.at("last_batch")) r.last_batch.push_back(correction_from_json(j, registry));
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("review record: ") + e.what());
    }
}

nlohmann::json issues_to_json(const std::vector<FieldIssue>& issues) {
    auto arr = nlohmann::json::array();
    for (const auto& i : issues) {
        nlohmann::json j{{"field", i.field}, {"reason", i.reason}};
        if (i.index >= 0) j["index"] = i.index;
        if (!i.code.empty()) j["code"] = i.code;
        arr.push_back(std::move(j));
    }
    return arr;
}

} // namespace radmark

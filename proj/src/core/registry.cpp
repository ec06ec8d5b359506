#include "radmark/core/registry.hpp"

#include "radmark/error.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace radmark {

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
    case FeatureKind::landmark: return "landmark";
    case FeatureKind::outline: return "outline";
    case FeatureKind::patch: return "patch";
    }
    return "unknown";
}

std::string_view to_string(Side side) {
    switch (side) {
    case Side::left: return "left";
    case Side::right: return "right";
    case Side::none: return "none";
    }
    return "unknown";
}

std::string_view to_string(Group group) {
    switch (group) {
    case Group::femora: return "femora";
    case Group::pelvis: return "pelvis";
    case Group::patches_outlines: return "patches_outlines";
    }
    return "unknown";
}

std::optional<FeatureKind> parse_feature_kind(std::string_view text) {
    if (text == "landmark") return FeatureKind::landmark;
    if (text == "outline") return FeatureKind::outline;
    if (text == "patch") return FeatureKind::patch;
    return std::nullopt;
}

std::optional<Side> parse_side(std::string_view text) {
    if (text == "left") return Side::left;
    if (text == "right") return Side::right;
    if (text == "none") return Side::none;
    return std::nullopt;
}

std::optional<Group> parse_group(std::string_view text) {
    if (text == "femora") return Group::femora;
    if (text == "pelvis") return Group::pelvis;
    if (text == "patches_outlines") return Group::patches_outlines;
    return std::nullopt;
}

ClassRegistry::ClassRegistry(std::vector<FeatureClass> classes) : classes_(std::move(classes)) {
    if (classes_.empty()) {
        throw ConfigError("class registry is empty");
    }
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        const auto& c = classes_[i];
        if (index_of(c.id) != static_cast<int>(i)) {
            throw ConfigError("class registry: ids must be contiguous from 0 (entry '" + c.code + "')");
        }
        if (c.code.empty()) {
            throw ConfigError("class registry: entry " + std::to_string(i) + " has an empty code");
        }
        const bool landmark = c.kind == FeatureKind::landmark;
        if (landmark == (c.group == Group::patches_outlines)) {
            throw ConfigError("class registry: entry '" + c.code + "' has group " + std::string(to_string(c.group)) +
                              " which does not fit kind " + std::string(to_string(c.kind)));
        }
        if (!(c.radius_mm > 0.0) || !(c.stroke_mm > 0.0) || !std::isfinite(c.radius_mm) ||
            !std::isfinite(c.stroke_mm)) {
            throw ConfigError("class registry: entry '" + c.code + "' has a non-positive radius or stroke");
        }
        if (!by_code_.emplace(c.code, c.id).second) {
            throw ConfigError("class registry: duplicate code '" + c.code + "'");
        }
    }
}

const FeatureClass& ClassRegistry::at(ClassId id) const {
    if (!contains(id)) {
        throw ContractViolation("class id " + std::to_string(index_of(id)) + " is not in the registry");
    }
    return classes_[static_cast<std::size_t>(index_of(id))];
}

bool ClassRegistry::contains(ClassId id) const {
    return index_of(id) >= 0 && static_cast<std::size_t>(index_of(id)) < classes_.size();
}

std::optional<ClassId> ClassRegistry::find(std::string_view code) const {
    const auto it = by_code_.find(std::string(code));
    if (it == by_code_.end()) return std::nullopt;
    return it->second;
}

ClassId ClassRegistry::require(std::string_view code) const {
    if (auto id = find(code)) return *id;
    throw ValidationError("unknown class code '" + std::string(code) + "'");
}

std::vector<ClassId> ClassRegistry::ids_of_kind(FeatureKind kind) const {
    std::vector<ClassId> out;
    for (const auto& c : classes_) {
        if (c.kind == kind) out.push_back(c.id);
    }
    return out;
}

std::vector<ClassId> ClassRegistry::ids_in_group(Group group) const {
    std::vector<ClassId> out;
    for (const auto& c : classes_) {
        if (c.group == group) out.push_back(c.id);
    }
    return out;
}

namespace {

std::string entry_label(const nlohmann::json& entry, std::size_t index) {
    if (entry.is_object() && entry.contains("code") && entry["code"].is_string()) {
        return "'" + entry["code"].get<std::string>() + "'";
    }
    return "#" + std::to_string(index);
}

double positive_number(const nlohmann::json& obj, const char* key, double fallback, const std::string& label) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj[key];
    if (!v.is_number() || !(v.get<double>() > 0.0)) {
        throw ConfigError(std::string("class registry: entry ") + label + " field '" + key + "' must be a positive number");
    }
    return v.get<double>();
}

} // namespace

ClassRegistry parse_class_registry(std::string_view text, std::string_view source) {
    const std::string where(source);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("class registry " + where + ": parse error: " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("class registry " + where + ": top level must be an object");
    }
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer()) {
        throw ConfigError("class registry " + where + ": missing integer schema_version");
    }
    if (doc["schema_version"].get<int>() != ClassRegistry::schema_version) {
        throw ConfigError("class registry " + where + ": unsupported schema_version " + doc["schema_version"].dump());
    }
    if (!doc.contains("classes") || !doc["classes"].is_array()) {
        throw ConfigError("class registry " + where + ": missing 'classes' array");
    }

    double radius = default_landmark_radius_mm;
    double stroke = default_outline_stroke_mm;
    if (doc.contains("defaults")) {
        const auto& d = doc["defaults"];
        radius = positive_number(d, "landmark_radius_mm", radius, "defaults");
        stroke = positive_number(d, "outline_stroke_mm", stroke, "defaults");
    }

    std::vector<FeatureClass> classes;
    const auto& entries = doc["classes"];
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        const auto label = entry_label(e, i);
        if (!e.is_object()) {
            throw ConfigError("class registry: entry " + label + " is not an object");
        }
        for (const char* key : {"code", "kind", "side"}) {
            if (!e.contains(key) || !e[key].is_string()) {
                throw ConfigError("class registry: entry " + label + " is missing string field '" + key + "'");
            }
        }
        FeatureClass c;
        c.id = class_id(static_cast<int>(i));
        c.code = e["code"].get<std::string>();
        const auto kind_text = e["kind"].get<std::string>();
        const auto kind = parse_feature_kind(kind_text);
        if (!kind) {
            throw ConfigError("class registry: entry " + label + " has unknown kind '" + kind_text + "'");
        }
        c.kind = *kind;
        const auto side_text = e["side"].get<std::string>();
        const auto side = parse_side(side_text);
        if (!side) {
            throw ConfigError("class registry: entry " + label + " has unknown side '" + side_text + "'");
        }
        c.side = *side;
        if (c.kind == FeatureKind::landmark) {
            if (!e.contains("group") || !e["group"].is_string()) {
                throw ConfigError("class registry: landmark entry " + label + " needs a group (femora or pelvis)");
            }
        }
        if (e.contains("group")) {
            const auto group_text = e["group"].is_string() ? e["group"].get<std::string>() : std::string{};
            const auto group = parse_group(group_text);
            if (!group) {
                throw ConfigError("class registry: entry " + label + " has unknown group '" + group_text + "'");
            }
            c.group = *group;
        } else {
            c.group = Group::patches_outlines;
        }
        if (e.contains("name") && e["name"].is_string()) c.name = e["name"].get<std::string>();
        c.radius_mm = positive_number(e, "radius_mm", radius, label);
        c.stroke_mm = positive_number(e, "stroke_mm", stroke, label);
        classes.push_back(std::move(c));
    }
    return ClassRegistry(std::move(classes));
}

ClassRegistry load_class_registry(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("class registry: cannot open " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    const auto text = buffer.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
        throw ConfigError("class registry " + path.string() + ": file is empty");
    }
    return parse_class_registry(text, path.string());
}

nlohmann::json registry_to_json(const ClassRegistry& registry) {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : registry.classes()) {
        nlohmann::json e{{"code", c.code},
                         {"kind", to_string(c.kind)},
                         {"side", to_string(c.side)},
                         {"group", to_string(c.group)}};
        if (!c.name.empty()) e["name"] = c.name;
        if (c.kind == FeatureKind::landmark) e["radius_mm"] = c.radius_mm;
        if (c.kind == FeatureKind::outline) e["stroke_mm"] = c.stroke_mm;
        classes.push_back(std::move(e));
    }
    return {{"schema_version", ClassRegistry::schema_version}, {"classes", std::move(classes)}};
}

} // namespace radmark

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

namespace radmark {

// Dense index into the class registry.
enum class ClassId : std::int32_t {};

constexpr int index_of(ClassId id) { return static_cast<int>(id); }
constexpr ClassId class_id(int index) { return static_cast<ClassId>(index); }

enum class FeatureKind { landmark, outline, patch };
enum class Side { left, right, none };

// Reporting groups. Landmarks belong to femora or pelvis; every outline and
// patch belongs to patches_outlines.
enum class Group { femora, pelvis, patches_outlines };

std::string_view to_string(FeatureKind kind);
std::string_view to_string(Side side);
std::string_view to_string(Group group);

std::optional<FeatureKind> parse_feature_kind(std::string_view text);
std::optional<Side> parse_side(std::string_view text);
std::optional<Group> parse_group(std::string_view text);

inline constexpr double default_landmark_radius_mm = 2.0;
inline constexpr double default_outline_stroke_mm = 2.0;

struct FeatureClass {
    ClassId id{};
    std::string code;
    FeatureKind kind = FeatureKind::landmark;
    Side side = Side::none;
    Group group = Group::pelvis;
    std::string name;
    // Landmark disk radius; unused for other kinds.
    double radius_mm = default_landmark_radius_mm;
    // Outline stroke width; unused for other kinds.
    double stroke_mm = default_outline_stroke_mm;
};

class ClassRegistry {
  public:
    static constexpr int schema_version = 1;

    ClassRegistry() = default;

    // Validates ids (contiguous from 0), unique codes and kind/group pairing.
    explicit ClassRegistry(std::vector<FeatureClass> classes);

    std::size_t size() const { return classes_.size(); }
    bool empty() const { return classes_.empty(); }

    std::span<const FeatureClass> classes() const { return classes_; }
    const FeatureClass& at(ClassId id) const;
    bool contains(ClassId id) const;

    std::optional<ClassId> find(std::string_view code) const;
    // Throws ValidationError for an unknown code.
    ClassId require(std::string_view code) const;

    std::vector<ClassId> ids_of_kind(FeatureKind kind) const;
    std::vector<ClassId> ids_in_group(Group group) const;

  private:
    std::vector<FeatureClass> classes_;
    std::unordered_map<std::string, ClassId> by_code_;
};

ClassRegistry parse_class_registry(std::string_view text, std::string_view source = "<memory>");
ClassRegistry load_class_registry(const std::filesystem::path& path);

nlohmann::json registry_to_json(const ClassRegistry& registry);

} // namespace radmark

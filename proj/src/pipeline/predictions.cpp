#include "radmark/pipeline/predictions.hpp"

#include "radmark/error.hpp"
#include "radmark/io/files.hpp"

#include <array>
#include <cstdio>

namespace radmark {

void check_prediction_set(const PredictionSet& p, const ClassRegistry& registry) {
    std::set<ClassId> seen;
    auto claim = [&](ClassId id, const char* where) {
        if (!registry.contains(id)) {
            throw ValidationError("prediction '" + p.image_id + "': class " + std::to_string(index_of(id)) +
                                  " is not in the registry");
        }
        if (!seen.insert(id).second) {
            throw ValidationError("prediction '" + p.image_id + "': class '" + registry.at(id).code +
                                  "' appears twice (" + where + ")");
        }
    };
    for (const auto& [id, _] : p.landmarks) {
        claim(id, "landmarks");
        if (registry.at(id).kind != FeatureKind::landmark) {
            throw ValidationError("prediction '" + p.image_id + "': '" + registry.at(id).code +
                                  "' is not a landmark class");
        }
    }
    for (const auto& [id, _] : p.masks) {
        claim(id, "masks");
        if (registry.at(id).kind == FeatureKind::landmark) {
            throw ValidationError("prediction '" + p.image_id + "': landmark '" + registry.at(id).code +
                                  "' carries a mask");
        }
    }
    for (const auto id : p.missing) claim(id, "missing");
    if (seen.size() != registry.size()) {
        throw ValidationError("prediction '" + p.image_id + "': " + std::to_string(registry.size() - seen.size()) +
                              " registry classes are unaccounted for");
    }
}

namespace {

nlohmann::json box_json(const BBox& b) { return nlohmann::json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()}); }

BBox box_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) throw ValidationError("prediction box must be [x_min, y_min, x_max, y_max]");
    return BBox(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>(), Frame::original);
}

ClassId resolve(const nlohmann::json& entry, const ClassRegistry& registry) {
    return registry.require(entry.at("code").get<std::string>());
}

} // namespace

nlohmann::json predictions_to_json(const PredictionSet& p, const ClassRegistry& registry) {
    auto landmarks = nlohmann::json::array();
    for (const auto& [id, lp] : p.landmarks) {
        nlohmann::json e{{"code", registry.at(id).code},
                         {"x", lp.point.x},
                         {"y", lp.point.y},
                         {"x_mm", nullptr},
                         {"y_mm", nullptr},
                         {"confidence", lp.confidence},
                         {"box", box_json(lp.box)}};
        if (p.spacing) {
            e["x_mm"] = lp.point.x * p.spacing->col_mm;
            e["y_mm"] = lp.point.y * p.spacing->row_mm;
        }
        landmarks.push_back(std::move(e));
    }
    auto masks = nlohmann::json::array();
    for (const auto& [id, mp] : p.masks) {
        masks.push_back({{"code", registry.at(id).code},
                         {"confidence", mp.confidence},
                         {"box", box_json(mp.box)},
                         {"width", mp.mask.width()},
                         {"height", mp.mask.height()},
                         {"rle", mp.mask.runs()}});
    }
    auto missing = nlohmann::json::array();
    for (const auto id : p.missing) missing.push_back(registry.at(id).code);
    nlohmann::json spacing = nullptr;
    if (p.spacing) spacing = nlohmann::json::array({p.spacing->row_mm, p.spacing->col_mm});
    return {{"schema_version", PredictionSet::schema_version},
            {"image_id", p.image_id},
            {"width", p.width},
            {"height", p.height},
            {"calibrated", p.calibrated()},
            {"pixel_spacing", spacing},
            {"landmarks", std::move(landmarks)},
            {"masks", std::move(masks)},
            {"missing", std::move(missing)},
            {"warnings", p.warnings}};
}

PredictionSet predictions_from_json(const nlohmann::json& doc, const ClassRegistry& registry) {
    try {
        if (doc.at("schema_version").get<int>() != PredictionSet::schema_version) {
            throw ValidationError("prediction document: unsupported schema_version " + doc["schema_version"].dump());
        }
        PredictionSet p;
        p.image_id = doc.at("image_id").get<std::string>();
        p.width = doc.at("width").get<int>();
        p.height = doc.at("height").get<int>();
        if (const auto& s = doc.at("pixel_spacing"); !s.is_null()) {
            p.spacing = PixelSpacing::make(s.at(0).get<double>(), s.at(1).get<double>());
        }
        for (const auto& e : doc.at("landmarks")) {
            p.landmarks.emplace(resolve(e, registry),
                                LandmarkPrediction{{e.at("x").get<double>(), e.at("y").get<double>(), Frame::original},
                                                   e.at("confidence").get<double>(),
                                                   box_from(e.at("box"))});
        }
        for (const auto& e : doc.at("masks")) {
            p.masks.emplace(resolve(e, registry),
                            MaskPrediction{Mask::from_runs(e.at("width").get<int>(), e.at("height").get<int>(),
                                                           Frame::original,
                                                           e.at("rle").get<std::vector<std::uint32_t>>()),
                                           e.at("confidence").get<double>(), box_from(e.at("box"))});
        }
        for (const auto& code : doc.at("missing")) p.missing.insert(registry.require(code.get<std::string>()));
        if (doc.contains("warnings")) p.warnings = doc["warnings"].get<std::vector<std::string>>();
        check_prediction_set(p, registry);
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("prediction document: ") + e.what());
    } catch (const ContractViolation& e) {
        throw ValidationError(std::string("prediction document: ") + e.what());
    }
}

void save_predictions(const std::filesystem::path& path, const PredictionSet& p, const ClassRegistry& registry) {
    write_text_file_atomic(path, predictions_to_json(p, registry).dump(2) + "\n");
}

PredictionSet load_predictions(const std::filesystem::path& path, const ClassRegistry& registry) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": JSON parse error: " + e.what());
    }
    try {
        return predictions_from_json(doc, registry);
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string predictions_csv_header() { return "image_id,class,x_mm,y_mm,confidence,x_px,y_px,calibrated\n"; }

std::string predictions_csv_rows(const PredictionSet& p, const ClassRegistry& registry) {
    auto num = [](double v) {
        std::array<char, 64> buf{};
        const int n = std::snprintf(buf.data(), buf.size(), "%.4f", v);
        return std::string(buf.data(), static_cast<std::size_t>(n));
    };
    std::string out;
    for (const auto& [id, lp] : p.landmarks) {
        out += p.image_id + ',' + registry.at(id).code + ',';
        if (p.spacing) {
            out += num(lp.point.x * p.spacing->col_mm) + ',' + num(lp.point.y * p.spacing->row_mm) + ',';
        } else {
            out += ",,";
        }
        out += num(lp.confidence) + ',' + num(lp.point.x) + ',' + num(lp.point.y) + ',' +
               (p.spacing ? "true" : "false") + '\n';
    }
    return out;
}

} // namespace radmark

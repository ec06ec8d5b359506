#include "radmark/eval/report.hpp"

#include "radmark/error.hpp"
#include "radmark/labels/bundle.hpp"
#include "radmark/labels/raster.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace radmark {

namespace {

BBox landmark_box(const PointPx& p, double radius_mm, const PixelSpacing& s) {
    const double rx = radius_mm / s.col_mm, ry = radius_mm / s.row_mm;
    return BBox(p.x - rx, p.y - ry, p.x + rx, p.y + ry, p.frame);
}

} // namespace

EvalReport evaluate(const std::vector<EvalCase>& cases, const ClassRegistry& registry, const EvalOptions& options) {
    EvalReport report;
    report.options = options;
    for (const auto& c : registry.classes()) {
        report.classes.push_back({c.id, c.code, c.kind, c.group, 0, 0, {}, {}, {}, 0, {}});
    }
    for (const auto& ec : cases) {
        const auto& pred = *ec.prediction;
        const auto& truth = *ec.truth;
        if (pred.image_id != truth.image_id) {
            throw ValidationError("evaluate: prediction '" + pred.image_id + "' paired with ground truth '" +
                                  truth.image_id + "'");
        }
        report.images.push_back(pred.image_id);
        if (!pred.calibrated()) ++report.uncalibrated_images;
        const auto spacing = pred.spacing.value_or(PixelSpacing{});
        const auto gt = build_label_bundle(truth, registry, original_target(pred.width, pred.height, pred.spacing));

        for (const auto& [id, gt_point] : truth.landmarks) {
            auto& cs = report.classes[index_of(id)];
            if (!gt.masks.contains(id)) continue; // unusable ground truth
            ++cs.total;
            const auto it = pred.landmarks.find(id);
            if (it == pred.landmarks.end()) continue;
            ++cs.identified;
            const auto err = point_error(it->second.point, gt_point, pred.spacing);
            (err.calibrated ? cs.errors_mm : cs.errors_px).push_back(err.value);
            cs.box_iou.push_back(box_iou(it->second.box, landmark_box(gt_point, registry.at(id).radius_mm, spacing)));
        }
        for (const auto& [id, gt_mask] : gt.masks) {
            if (registry.at(id).kind == FeatureKind::landmark) continue;
            auto& cs = report.classes[index_of(id)];
            ++cs.total;
            const auto it = pred.masks.find(id);
            if (it == pred.masks.end()) continue;
            ++cs.identified;
            const auto iou = mask_iou(it->second.mask, gt_mask);
            cs.mask_iou.push_back(iou.value);
            if (iou.both_empty) ++cs.both_empty;
            cs.box_iou.push_back(box_iou(it->second.box, gt.boxes.at(id)));
        }
    }
    return report;
}

GroupSummary summarize_group(const EvalReport& report, Group group) {
    GroupSummary g;
    g.group = group;
    std::vector<double> errors, masks, boxes;
    for (const auto& c : report.classes) {
        if (c.group != group) continue;
        g.identified += c.identified;
        g.total += c.total;
        errors.insert(errors.end(), c.errors_mm.begin(), c.errors_mm.end());
        masks.insert(masks.end(), c.mask_iou.begin(), c.mask_iou.end());
        boxes.insert(boxes.end(), c.box_iou.begin(), c.box_iou.end());
    }
    if (g.total > 0) g.rate = detection_rate(g.identified, g.total);
    g.error_mm = aggregate(errors, report.options.std_mode);
    g.mask_iou = aggregate(masks, report.options.std_mode);
    g.box_iou = aggregate(boxes, report.options.std_mode);
    g.acceptability = acceptability(errors, report.options.acceptability_mm);
    return g;
}

ReportSummary summarize(const EvalReport& report) {
    ReportSummary s;
    s.femora = summarize_group(report, Group::femora);
    s.pelvis = summarize_group(report, Group::pelvis);
    s.patches_outlines = summarize_group(report, Group::patches_outlines);
    s.landmark_identified = s.femora.identified + s.pelvis.identified;
    s.landmark_total = s.femora.total + s.pelvis.total;
    if (s.landmark_total > 0) s.landmark_rate = detection_rate(s.landmark_identified, s.landmark_total);
    std::vector<double> errors;
    for (const auto& c : report.classes) {
        if (c.kind == FeatureKind::landmark) errors.insert(errors.end(), c.errors_mm.begin(), c.errors_mm.end());
    }
    s.landmark_error_mm = aggregate(errors, report.options.std_mode);
    s.landmark_acceptability = acceptability(errors, report.options.acceptability_mm);
    return s;
}

namespace {

nlohmann::json agg_json(const std::optional<Aggregate>& a) {
    if (!a) return nullptr;
    return {{"median", a->median}, {"mean", a->mean}, {"std", a->std}, {"count", a->count}};
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

nlohmann::json group_json(const GroupSummary& g) {
    return {{"identified", g.identified},   {"total", g.total},
            {"rate", opt_json(g.rate)},     {"error_mm", agg_json(g.error_mm)},
            {"mask_iou", agg_json(g.mask_iou)}, {"box_iou", agg_json(g.box_iou)},
            {"acceptability", opt_json(g.acceptability)}};
}

nlohmann::json summary_json(const ReportSummary& s) {
    return {{"groups",
             {{"femora", group_json(s.femora)},
              {"pelvis", group_json(s.pelvis)},
              {"patches_outlines", group_json(s.patches_outlines)}}},
            {"landmarks",
             {{"identified", s.landmark_identified},
              {"total", s.landmark_total},
              {"rate", opt_json(s.landmark_rate)},
              {"error_mm", agg_json(s.landmark_error_mm)},
              {"acceptability", opt_json(s.landmark_acceptability)}}}};
}

} // namespace

nlohmann::json report_to_json(const EvalReport& report) {
    auto classes = nlohmann::json::array();
    for (const auto& c : report.classes) {
        classes.push_back({{"code", c.code},
                           {"class_id", index_of(c.id)},
                           {"kind", to_string(c.kind)},
                           {"group", to_string(c.group)},
                           {"identified", c.identified},
                           {"total", c.total},
                           {"errors_mm", c.errors_mm},
                           {"errors_px", c.errors_px},
                           {"mask_iou", c.mask_iou},
                           {"both_empty", c.both_empty},
                           {"box_iou", c.box_iou}});
    }
    return {{"schema_version", EvalReport::schema_version},
            {"acceptability_threshold_mm", report.options.acceptability_mm},
            {"std_mode", to_string(report.options.std_mode)},
            {"images", report.images},
            {"uncalibrated_images", report.uncalibrated_images},
            {"classes", std::move(classes)},
            {"summary", summary_json(summarize(report))}};
}

EvalReport report_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("schema_version").get<int>() != EvalReport::schema_version) {
            throw ValidationError("report: unsupported schema_version");
        }
        EvalReport r;
        r.options.acceptability_mm = doc.at("acceptability_threshold_mm").get<double>();
        const auto mode = parse_std_mode(doc.at("std_mode").get<std::string>());
        if (!mode) throw ValidationError("report: unknown std_mode");
        r.options.std_mode = *mode;
        r.images = doc.at("images").get<std::vector<std::string>>();
        r.uncalibrated_images = doc.at("uncalibrated_images").get<std::size_t>();
        for (const auto& c : doc.at("classes")) {
            const auto kind = parse_feature_kind(c.at("kind").get<std::string>());
            const auto group = parse_group(c.at("group").get<std::string>());
            if (!kind || !group) throw ValidationError("report: bad kind or group");
            ClassStats cs{class_id(c.at("class_id").get<int>()),
                          c.at("code").get<std::string>(),
                          *kind,
                          *group,
                          c.at("identified").get<std::size_t>(),
                          c.at("total").get<std::size_t>(),
                          c.at("errors_mm").get<std::vector<double>>(),
                          c.at("errors_px").get<std::vector<double>>(),
                          c.at("mask_iou").get<std::vector<double>>(),
                          c.at("both_empty").get<std::size_t>(),
                          c.at("box_iou").get<std::vector<double>>()};
            if (cs.identified > cs.total) throw ValidationError("report: identified exceeds total for " + cs.code);
            r.classes.push_back(std::move(cs));
        }
        if (doc.contains("summary") && doc["summary"] != summary_json(summarize(r))) {
            throw ValidationError("report: stored summary does not match the per-class lists");
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("report: ") + e.what());
    }
}

namespace {

std::string fixed(double v, int decimals) {
    std::array<char, 64> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), "%.*f", decimals, v);
    return {buf.data(), static_cast<std::size_t>(n)};
}

std::string cell(const std::optional<Aggregate>& a, double Aggregate::*field, int decimals = 2) {
    return a ? fixed((*a).*field, decimals) : "n/a";
}

std::string csv_cell(const std::optional<Aggregate>& a, double Aggregate::*field) {
    return a ? fixed((*a).*field, 6) : "";
}

} // namespace

std::string format_percent(double fraction) { return std::to_string(std::lround(fraction * 100.0)) + "%"; }

std::string report_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "class,kind,group,identified,total,error_median_mm,error_mean_mm,error_std_mm,acceptability,"
          "mask_iou_median,mask_iou_mean,mask_iou_std,box_iou_median,box_iou_mean,box_iou_std\n";
    for (const auto& c : report.classes) {
        const auto err = aggregate(c.errors_mm, report.options.std_mode);
        const auto miou = aggregate(c.mask_iou, report.options.std_mode);
        const auto biou = aggregate(c.box_iou, report.options.std_mode);
        const auto acc = acceptability(c.errors_mm, report.options.acceptability_mm);
        os << c.code << ',' << to_string(c.kind) << ',' << to_string(c.group) << ',' << c.identified << ','
           << c.total << ',' << csv_cell(err, &Aggregate::median) << ',' << csv_cell(err, &Aggregate::mean) << ','
           << csv_cell(err, &Aggregate::std) << ',' << (acc ? fixed(*acc, 6) : "") << ','
           << csv_cell(miou, &Aggregate::median) << ',' << csv_cell(miou, &Aggregate::mean) << ','
           << csv_cell(miou, &Aggregate::std) << ',' << csv_cell(biou, &Aggregate::median) << ','
           << csv_cell(biou, &Aggregate::mean) << ',' << csv_cell(biou, &Aggregate::std) << '\n';
    }
    return os.str();
}

std::string report_markdown(const EvalReport& report) {
    const auto s = summarize(report);
    const std::array<const GroupSummary*, 3> groups{&s.femora, &s.pelvis, &s.patches_outlines};
    const std::array<std::pair<const char*, double Aggregate::*>, 3> rows{
        {{"median", &Aggregate::median}, {"mean", &Aggregate::mean}, {"st.dev", &Aggregate::std}}};
    const auto threshold = fixed(report.options.acceptability_mm, 1);

    std::ostringstream os;
    os << "# Landmarking evaluation\n\n"
       << "Images: " << report.images.size() << " (uncalibrated: " << report.uncalibrated_images << "). "
       << "Standard deviation: " << to_string(report.options.std_mode) << ".\n\n";

    os << "## Detection box IoU by group\n\n"
       << "| statistic | landmarks on femora | landmarks on pelvis | patches and outlines |\n"
       << "|---|---|---|---|\n";
    for (const auto& [name, field] : rows) {
        os << "| " << name;
        for (const auto* g : groups) os << " | " << cell(g->box_iou, field);
        os << " |\n";
    }

    os << "\n## Localisation by group\n\n"
       << "| statistic | femora error (mm) | pelvis error (mm) | patches and outlines mask IoU |\n"
       << "|---|---|---|---|\n";
    for (const auto& [name, field] : rows) {
        os << "| " << name << " | " << cell(s.femora.error_mm, field) << " | " << cell(s.pelvis.error_mm, field)
           << " | " << cell(s.patches_outlines.mask_iou, field) << " |\n";
    }

    auto rate = [](const std::optional<double>& r, std::size_t id, std::size_t total) {
        return (r ? format_percent(*r) : std::string("n/a")) + " (" + std::to_string(id) + "/" +
               std::to_string(total) + ")";
    };
    auto mm = [&](double Aggregate::*f) { return s.landmark_error_mm ? fixed((*s.landmark_error_mm).*f, 2) + " mm" : "n/a"; };
    auto iou = [&](double Aggregate::*f) { return cell(s.patches_outlines.mask_iou, f); };
    os << "\n## Summary\n\n"
       << "- Landmarks identified: " << rate(s.landmark_rate, s.landmark_identified, s.landmark_total) << "\n"
       << "- Patches and outlines identified: "
       << rate(s.patches_outlines.rate, s.patches_outlines.identified, s.patches_outlines.total) << "\n"
       << "- Landmark error, median: " << mm(&Aggregate::median) << "\n"
       << "- Landmark error, mean: " << mm(&Aggregate::mean) << "\n"
       << "- Landmark error, st.dev: " << mm(&Aggregate::std) << "\n"
       << "- Landmark errors under " << threshold << " mm: "
       << (s.landmark_acceptability ? format_percent(*s.landmark_acceptability) : std::string("n/a")) << "\n"
       << "- Mask IoU, median: " << iou(&Aggregate::median) << "\n"
       << "- Mask IoU, mean: " << iou(&Aggregate::mean) << "\n"
       << "- Mask IoU, st.dev: " << iou(&Aggregate::std) << "\n";

    os << "\n## Per-class detail\n\n"
       << "| class | group | identified | median | mean | st.dev | metric |\n"
       << "|---|---|---|---|---|---|---|\n";
    for (const auto& c : report.classes) {
        const bool landmark = c.kind == FeatureKind::landmark;
        const auto a = aggregate(landmark ? c.errors_mm : c.mask_iou, report.options.std_mode);
        os << "| " << c.code << " | " << to_string(c.group) << " | " << c.identified << "/" << c.total << " | "
           << cell(a, &Aggregate::median) << " | " << cell(a, &Aggregate::mean) << " | " << cell(a, &Aggregate::std)
           << " | " << (landmark ? "error (mm)" : "mask IoU") << " |\n";
    }
    return os.str();
}

} // namespace radmark

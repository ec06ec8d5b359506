#include "oracles/oracles.hpp"
#include "radmark/error.hpp"
#include "radmark/eval/report.hpp"
#include "radmark/infer/stub.hpp"
#include "radmark/pipeline/pipeline.hpp"
#include "radmark/synth/synth.hpp"
#include "support/helpers.hpp"
#include "support/report_fixture.hpp"

#include <doctest.h>

#include <cstdlib>
#include <functional>
#include <fstream>
#include <sstream>

using namespace radmark;

namespace {

struct Run {
    std::vector<SynthCase> cases;
    std::vector<PredictionSet> predictions;
};

Run run_stub(const ClassRegistry& reg, int n, const StubConfig& sc, const SynthConfig& syn = {}) {
    Run r;
    StubBackend stub(sc);
    for (int i = 0; i < n; ++i) {
        r.cases.push_back(synth_case(syn, reg, i));
        const auto& c = r.cases.back();
        stub.attach(c.record.id(), make_stub_truth(c.truth, reg, c.record.width(), c.record.height(),
                                                   c.record.spacing(), sc.input_side));
    }
    for (const auto& c : r.cases) r.predictions.push_back(run_pipeline(c.record, stub, reg));
    return r;
}

EvalReport evaluate_run(const Run& r, const ClassRegistry& reg, const EvalOptions& o = {}) {
    std::vector<EvalCase> cases;
    for (std::size_t i = 0; i < r.cases.size(); ++i) cases.push_back({&r.predictions[i], &r.cases[i].truth});
    return evaluate(cases, reg, o);
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

} // namespace

TEST_CASE("zero-noise chain gives zero error and unit IoU") {
    const auto reg = testing::pelvis_registry();
    const auto rep = evaluate_run(run_stub(reg, 3, StubConfig{}), reg);
    const auto s = summarize(rep);
    CHECK(s.landmark_identified == 3 * 72);
    CHECK(s.landmark_total == 3 * 72);
    CHECK(s.landmark_error_mm->mean <= 1e-9);
    CHECK(s.landmark_error_mm->std <= 1e-9);
    CHECK(*s.landmark_acceptability == 1.0);
    CHECK(s.patches_outlines.mask_iou->median == 1.0);
    CHECK(s.patches_outlines.mask_iou->mean == 1.0);
    CHECK(s.femora.box_iou->mean == 1.0);
    for (const auto& c : rep.classes) {
        CHECK(c.identified == 3);
        CHECK(c.errors_px.empty());
    }
}

TEST_CASE("dropped classes give the reference detection rates") {
    const auto reg = testing::pelvis_registry();
    StubConfig sc;
    const auto lm = reg.ids_of_kind(FeatureKind::landmark);
    for (int i = 0; i < 5; ++i) sc.drop.insert(lm[static_cast<std::size_t>(i * 13)]);
    auto po = reg.ids_of_kind(FeatureKind::outline);
    const auto patches = reg.ids_of_kind(FeatureKind::patch);
    po.insert(po.end(), patches.begin(), patches.end());
    REQUIRE(po.size() == 18);
    sc.drop.insert(po[1]);
    sc.drop.insert(po[9]);
    const auto rep = evaluate_run(run_stub(reg, 1, sc), reg);
    const auto s = summarize(rep);
    CHECK(s.landmark_identified == 67);
    CHECK(s.landmark_total == 72);
    CHECK(format_percent(*s.landmark_rate) == "93%");
    CHECK(s.patches_outlines.identified == 16);
    CHECK(format_percent(*s.patches_outlines.rate) == "89%");
    const auto md = report_markdown(rep);
    CHECK(md.find("Landmarks identified: 93% (67/72)") != std::string::npos);
    CHECK(md.find("Patches and outlines identified: 89% (16/18)") != std::string::npos);
}

TEST_CASE("summary aggregates equal an independent recomputation from the lists") {
    const auto reg = testing::pelvis_registry();
    StubConfig sc;
    sc.seed = 9;
    sc.center_jitter_px = 3;
    sc.scale_jitter = 0.1;
    sc.morphology = 1;
    for (const auto mode : {StdMode::population, StdMode::sample}) {
        const auto rep = evaluate_run(run_stub(reg, 2, sc), reg, {3.0, mode});
        const auto s = summarize(rep);
        std::vector<double> all_mm, fem_mm, iou;
        for (const auto& c : rep.classes) {
            all_mm.insert(all_mm.end(), c.errors_mm.begin(), c.errors_mm.end());
            if (c.group == Group::femora) fem_mm.insert(fem_mm.end(), c.errors_mm.begin(), c.errors_mm.end());
            iou.insert(iou.end(), c.mask_iou.begin(), c.mask_iou.end());
        }
        const bool sample = mode == StdMode::sample;
        const auto a = oracle::stats(all_mm, sample), f = oracle::stats(fem_mm, sample), m = oracle::stats(iou, sample);
        CHECK(s.landmark_error_mm->median == doctest::Approx(a.median).epsilon(1e-12));
        CHECK(s.landmark_error_mm->mean == doctest::Approx(a.mean).epsilon(1e-12));
        CHECK(s.landmark_error_mm->std == doctest::Approx(a.std).epsilon(1e-12));
        CHECK(s.femora.error_mm->mean == doctest::Approx(f.mean).epsilon(1e-12));
        CHECK(s.patches_outlines.mask_iou->std == doctest::Approx(m.std).epsilon(1e-12));
        std::size_t under = 0;
        for (double e : all_mm) under += e < 3.0;
        CHECK(*s.landmark_acceptability == doctest::Approx(double(under) / double(all_mm.size())));
        CHECK(s.landmark_error_mm->mean > 0.0);
    }
}

TEST_CASE("uncalibrated images keep pixel errors out of mm aggregates") {
    const auto reg = testing::pelvis_registry();
    SynthConfig syn;
    syn.calibrated = false;
    StubConfig sc;
    sc.center_jitter_px = 2;
    const auto rep = evaluate_run(run_stub(reg, 1, sc, syn), reg);
    CHECK(rep.uncalibrated_images == 1);
    const auto s = summarize(rep);
    CHECK_FALSE(s.landmark_error_mm.has_value());
    CHECK_FALSE(s.landmark_acceptability.has_value());
    std::size_t px = 0;
    for (const auto& c : rep.classes) {
        CHECK(c.errors_mm.empty());
        px += c.errors_px.size();
    }
    CHECK(px == 72);
    CHECK(report_markdown(rep).find("Landmark error, mean: n/a") != std::string::npos);
}

TEST_CASE("report JSON round-trips and verifies its aggregates") {
    const auto rep = testing::fixed_report();
    const auto doc = report_to_json(rep);
    CHECK(report_from_json(doc) == rep);
    CHECK(report_from_json(nlohmann::json::parse(doc.dump())) == rep);

    auto tampered = doc;
    bool changed = false;
    std::function<void(nlohmann::json&)> bump = [&](nlohmann::json& j) {
        if (changed) return;
        if (j.is_object()) {
            if (j.contains("mean") && j["mean"].is_number()) {
                j["mean"] = j["mean"].get<double>() + 0.01;
                changed = true;
                return;
            }
            for (auto& [k, v] : j.items()) bump(v);
        } else if (j.is_array()) {
            for (auto& v : j) bump(v);
        }
    };
    bump(tampered);
    REQUIRE(changed);
    CHECK_THROWS_AS(report_from_json(tampered), ValidationError);

    auto bad_version = doc;
    bad_version["schema_version"] = 99;
    CHECK_THROWS_AS(report_from_json(bad_version), ValidationError);
}

TEST_CASE("report CSV has one row per class") {
    const auto rep = testing::fixed_report();
    const auto csv = report_csv(rep);
    std::size_t lines = 0;
    for (char c : csv) lines += c == '\n';
    CHECK(lines == rep.classes.size() + 1);
    CHECK(csv.find(rep.classes.front().code) != std::string::npos);
}

TEST_CASE("markdown report matches the golden file") {
    const auto md = report_markdown(testing::fixed_report());
    const auto path = std::filesystem::path(RADMARK_GOLDEN) / "report.md";
    if (std::getenv("RADMARK_UPDATE_GOLDEN")) {
        std::ofstream(path, std::ios::binary) << md;
    }
    CHECK(md == read_file(path));
}

TEST_CASE("format_percent") {
    CHECK(format_percent(67.0 / 72.0) == "93%");
    CHECK(format_percent(16.0 / 18.0) == "89%");
    CHECK(format_percent(1.0) == "100%");
    CHECK(format_percent(0.0) == "0%");
}

#include "radmark/error.hpp"
#include "radmark/infer/stub.hpp"
#include "radmark/pipeline/pipeline.hpp"
#include "radmark/synth/synth.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

using namespace radmark;

namespace {

PredictionSet sample(const ClassRegistry& reg, bool calibrated, int drop) {
    SynthConfig sc;
    sc.calibrated = calibrated;
    const auto c = synth_case(sc, reg, 0);
    StubConfig cfg;
    cfg.seed = 1;
    cfg.center_jitter_px = 1.3;
    cfg.morphology = 1;
    for (int i = 0; i < drop; ++i) cfg.drop.insert(class_id(i * 7));
    StubBackend stub(cfg);
    stub.attach(c.record.id(), make_stub_truth(c.truth, reg, 512, 512, c.record.spacing(), 512));
    return run_pipeline(c.record, stub, reg);
}

} // namespace

TEST_CASE("prediction json round-trips exactly") {
    const auto reg = testing::pelvis_registry();
    for (bool cal : {true, false}) {
        const auto p = sample(reg, cal, 4);
        const auto doc = predictions_to_json(p, reg);
        const auto back = predictions_from_json(nlohmann::json::parse(doc.dump()), reg);
        CHECK(predictions_to_json(back, reg) == doc);
        CHECK(back.missing == p.missing);
        CHECK(back.spacing == p.spacing);
        for (const auto& [id, lp] : p.landmarks) {
            CHECK(back.landmarks.at(id).point == lp.point);
            CHECK(back.landmarks.at(id).box == lp.box);
        }
        for (const auto& [id, mp] : p.masks) CHECK(back.masks.at(id).mask == mp.mask);
        testing::TempDir dir;
        save_predictions(dir / "p.json", p, reg);
        CHECK(predictions_to_json(load_predictions(dir / "p.json", reg), reg) == doc);
    }
}

TEST_CASE("uncalibrated predictions carry null mm fields") {
    const auto reg = testing::pilot_registry();
    const auto doc = predictions_to_json(sample(reg, false, 0), reg);
    CHECK(doc["calibrated"] == false);
    CHECK(doc["pixel_spacing"].is_null());
    CHECK(doc["landmarks"][0]["x_mm"].is_null());
    const auto rows = predictions_csv_rows(sample(reg, false, 0), reg);
    CHECK(rows.find(",,") != std::string::npos);
}

TEST_CASE("csv rows") {
    const auto reg = testing::pilot_registry();
    const auto p = sample(reg, true, 1);
    CHECK(predictions_csv_header() == "image_id,class,x_mm,y_mm,confidence,x_px,y_px,calibrated\n");
    const auto rows = predictions_csv_rows(p, reg);
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 7);
    CHECK(rows.rfind("synth_0001,", 0) == 0);
}

TEST_CASE("prediction invariants are enforced") {
    const auto reg = testing::pilot_registry();
    auto p = sample(reg, true, 0);
    auto q = p;
    q.missing.insert(q.landmarks.begin()->first);
    CHECK_THROWS_AS(check_prediction_set(q, reg), ValidationError);
    q = p;
    q.landmarks.erase(q.landmarks.begin());
    CHECK_THROWS_AS(check_prediction_set(q, reg), ValidationError);
    auto doc = predictions_to_json(p, reg);
    doc["schema_version"] = 7;
    CHECK_THROWS_AS(predictions_from_json(doc, reg), ValidationError);
    doc = predictions_to_json(p, reg);
    doc["landmarks"][0]["code"] = "NOPE";
    CHECK_THROWS_AS(predictions_from_json(doc, reg), ValidationError);
}

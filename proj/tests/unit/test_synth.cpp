#include "radmark/ingest/dicom.hpp"
#include "radmark/labels/bundle.hpp"
#include "radmark/synth/synth.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

using namespace radmark;

TEST_CASE("synthetic cases annotate every class and rasterize cleanly") {
    const auto reg = testing::pelvis_registry();
    SynthConfig cfg;
    for (int i = 0; i < 20; ++i) {
        const auto c = synth_case(cfg, reg, i);
        CHECK(c.record.id() == synth_image_id(i));
        CHECK(c.truth.image_id == c.record.id());
        CHECK(c.truth.class_ids().size() == reg.size());
        CHECK(validate_bounds(c.truth, reg, c.record.width(), c.record.height()).empty());
        const auto orig = build_label_bundle(c.truth, reg, original_target(512, 512, c.record.spacing()));
        CHECK(orig.issues.empty());
        CHECK(orig.masks.size() == reg.size());
        const auto model = build_label_bundle(c.truth, reg, model_target(512, 512, c.record.spacing(), 512));
        CHECK(model.issues.empty());
    }
}

TEST_CASE("synthetic cases are deterministic and seed dependent") {
    const auto reg = testing::pelvis_registry();
    SynthConfig cfg;
    const auto a = synth_case(cfg, reg, 3), b = synth_case(cfg, reg, 3);
    CHECK(a.truth == b.truth);
    CHECK(encode_dicom(a.record) == encode_dicom(b.record));
    cfg.seed = 8;
    CHECK_FALSE(synth_case(cfg, reg, 3).truth == a.truth);
}

TEST_CASE("synthetic options") {
    const auto reg = testing::pilot_registry();
    SynthConfig cfg;
    cfg.width = 300;
    cfg.height = 700;
    cfg.calibrated = false;
    cfg.bit_depth = 16;
    const auto c = synth_case(cfg, reg, 0);
    CHECK_FALSE(c.record.calibrated());
    CHECK(c.record.height() == 700);
    CHECK(c.record.bit_depth() == 16);
    CHECK(c.truth.landmarks.size() == 8);
    // Mirrored classes sit on opposite halves; patient right is image left.
    CHECK(c.truth.landmarks.at(reg.require("F23_r")).x < 150);
    CHECK(c.truth.landmarks.at(reg.require("F23_l")).x > 150);
    cfg.width = 10;
    CHECK_THROWS(synth_case(cfg, reg, 0));
}

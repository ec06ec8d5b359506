#include "radmark/error.hpp"
#include "radmark/labels/bundle.hpp"
#include "radmark/labels/raster.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

using namespace radmark;

namespace {

AnnotationSet small_set(const ClassRegistry& reg) {
    AnnotationSet s;
    s.image_id = "b1";
    s.landmarks[reg.require("A01_r")] = {300, 400, Frame::original};
    s.landmarks[reg.require("A01_l")] = {700, 400, Frame::original};
    s.outlines[reg.require("O08")] = Polyline{{{100, 100}, {500, 150}, {900, 100}}};
    s.patches[reg.require("P02")] = Polygon{{{480, 900}, {540, 900}, {540, 960}, {480, 960}}};
    return s;
}

} // namespace

TEST_CASE("bundle in the model frame: tight boxes, one entry per feature") {
    const auto reg = testing::pelvis_registry();
    const auto set = small_set(reg);
    const auto target = model_target(1000, 1200, PixelSpacing::isotropic(0.2), 512);
    CHECK(target.frame == Frame::model);
    const auto b = build_label_bundle(set, reg, target, Split::train);
    CHECK(b.issues.empty());
    CHECK(b.masks.size() == 4);
    CHECK(b.boxes.size() == 4);
    CHECK(b.split == Split::train);
    CHECK_NOTHROW(check_label_bundle(b));
    for (const auto& [id, m] : b.masks) {
        CHECK(m.frame() == Frame::model);
        CHECK(m.width() == 512);
        CHECK(b.boxes.at(id) == mask_to_bbox(m));
    }
}

TEST_CASE("overlapping features keep independent masks") {
    const auto reg = testing::pelvis_registry();
    AnnotationSet s;
    s.image_id = "o";
    s.landmarks[reg.require("A01_r")] = {50, 50, Frame::original};
    s.landmarks[reg.require("A02_r")] = {51, 50, Frame::original};
    const auto b = build_label_bundle(s, reg, original_target(100, 100, PixelSpacing::isotropic(0.5)));
    REQUIRE(b.masks.size() == 2);
    CHECK(b.masks.begin()->second.area() == std::next(b.masks.begin())->second.area());
}

TEST_CASE("unrasterizable features become issues") {
    const auto reg = testing::pelvis_registry();
    AnnotationSet s;
    s.image_id = "i";
    s.landmarks[reg.require("A01_r")] = {-50, 20, Frame::original};
    s.landmarks[reg.require("A01_l")] = {20, 20, Frame::original};
    const auto b = build_label_bundle(s, reg, original_target(64, 64, PixelSpacing::isotropic(1.0)));
    CHECK(b.masks.size() == 1);
    REQUIRE(b.issues.size() == 1);
    CHECK(b.issues[0].code == "A01_r");
}

TEST_CASE("tampered box fails the bundle check") {
    const auto reg = testing::pelvis_registry();
    auto b = build_label_bundle(small_set(reg), reg, original_target(1000, 1200, PixelSpacing::isotropic(0.2)));
    auto& box = b.boxes.begin()->second;
    box = BBox(box.x_min(), box.y_min(), box.x_max() + 1, box.y_max(), box.frame());
    CHECK_THROWS_AS(check_label_bundle(b), ValidationError);
}

TEST_CASE("uncalibrated images rasterize radii in pixels") {
    const auto reg = testing::pelvis_registry();
    AnnotationSet s;
    s.image_id = "u";
    s.landmarks[reg.require("A01_r")] = {20, 20, Frame::original};
    const auto b = build_label_bundle(s, reg, original_target(64, 64, std::nullopt));
    CHECK(b.boxes.begin()->second == BBox(18, 18, 22, 22, Frame::original));
}

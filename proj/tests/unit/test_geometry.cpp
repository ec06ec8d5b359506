#include "radmark/core/geometry.hpp"
#include "radmark/error.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <cmath>

using namespace radmark;

TEST_CASE("to_model_frame applies scale then pad") {
    const GeometryTransform half(0.5, 0.5, 0, 0);
    const auto a = to_model_frame(PointPx{100, 200, Frame::original}, half);
    CHECK(a == PointPx{50, 100, Frame::model});

    const GeometryTransform t(0.3, 0.7, 11, 13);
    CHECK(to_model_frame(PointPx{0, 0, Frame::original}, t) == PointPx{11, 13, Frame::model});

    const GeometryTransform q(0.25, 0.25, 8, 0);
    CHECK(to_model_frame(PointPx{64, 32, Frame::original}, q) == PointPx{24, 8, Frame::model});
}

TEST_CASE("to_original_frame inverts the forward map") {
    CHECK(to_original_frame(PointPx{50, 100, Frame::model}, GeometryTransform(0.5, 0.5, 0, 0)) ==
          PointPx{100, 200, Frame::original});
    CHECK(to_original_frame(PointPx{24, 8, Frame::model}, GeometryTransform(0.25, 0.25, 8, 0)) ==
          PointPx{64, 32, Frame::original});
}

TEST_CASE("frame tags are enforced") {
    const GeometryTransform t(0.5, 0.5, 1, 1);
    CHECK_THROWS_AS(to_model_frame(PointPx{1, 1, Frame::model}, t), ContractViolation);
    CHECK_THROWS_AS(to_original_frame(PointPx{1, 1, Frame::original}, t), ContractViolation);
    CHECK_THROWS_AS(to_model_frame(BBox(0, 0, 1, 1, Frame::model), t), ContractViolation);
    CHECK_THROWS_AS(to_model_frame(PointPx{NAN, 1, Frame::original}, t), ContractViolation);
}

TEST_CASE("random transforms round-trip within 1e-9 px") {
    auto g = testing::test_rng(1);
    for (int i = 0; i < 1000; ++i) {
        const GeometryTransform t(testing::uniform(g, 0.01, 8), testing::uniform(g, 0.01, 8),
                                  testing::uniform(g, -500, 500), testing::uniform(g, -500, 500));
        const PointPx p{testing::uniform(g, -4000, 4000), testing::uniform(g, -4000, 4000), Frame::original};
        const auto back = to_original_frame(to_model_frame(p, t), t);
        CHECK(back.frame == Frame::original);
        CHECK(std::abs(back.x - p.x) <= 1e-9);
        CHECK(std::abs(back.y - p.y) <= 1e-9);
    }
}

TEST_CASE("transforms reject non-positive scales") {
    CHECK_THROWS_AS(GeometryTransform(0, 1, 0, 0), ContractViolation);
    CHECK_THROWS_AS(GeometryTransform(1, -1, 0, 0), ContractViolation);
    CHECK(GeometryTransform::identity().is_identity());
}

TEST_CASE("bbox invariants") {
    CHECK_THROWS_AS(BBox(1, 0, 1, 2, Frame::original), ContractViolation);
    CHECK_THROWS_AS(BBox(0, 3, 1, 2, Frame::original), ContractViolation);
    const BBox b(10, 20, 30, 40, Frame::original);
    CHECK(b.area() == 400);
    const auto m = to_model_frame(b, GeometryTransform(0.5, 0.25, 2, 3));
    CHECK(m == BBox(7, 8, 17, 13, Frame::model));
    CHECK(to_original_frame(m, GeometryTransform(0.5, 0.25, 2, 3)) == b);
}

TEST_CASE("box_iou") {
    const BBox a(0, 0, 10, 10, Frame::original);
    const BBox b(5, 0, 15, 10, Frame::original);
    CHECK(box_iou(a, a) == 1.0);
    CHECK(box_iou(a, b) == doctest::Approx(50.0 / 150.0));
    CHECK(box_iou(a, BBox(20, 20, 21, 21, Frame::original)) == 0.0);
    CHECK_THROWS_AS(box_iou(a, BBox(0, 0, 1, 1, Frame::model)), ContractViolation);
}

TEST_CASE("px_to_mm and displacement") {
    CHECK(px_to_mm(10, 0.2) == doctest::Approx(2.0));
    CHECK(px_to_mm(0, 0.3) == 0.0);
    CHECK_THROWS_AS(px_to_mm(1, 0), ConfigError);
    CHECK_THROWS_AS(px_to_mm(1, -0.5), ConfigError);
    CHECK(displacement_mm(3, 4, PixelSpacing::isotropic(1.0)) == doctest::Approx(5.0));
    // x uses the column spacing.
    CHECK(displacement_mm(3, 4, PixelSpacing::make(1.0, 0.5)) == doctest::Approx(std::sqrt(1.5 * 1.5 + 16)));
}

TEST_CASE("pixel spacing validation") {
    CHECK_THROWS_AS(PixelSpacing::make(0, 1), ConfigError);
    CHECK_THROWS_AS(PixelSpacing::make(1, INFINITY), ConfigError);
    const auto s = model_frame_spacing(PixelSpacing::make(0.2, 0.4), GeometryTransform(0.5, 0.25, 0, 0));
    CHECK(s.row_mm == doctest::Approx(0.8));
    CHECK(s.col_mm == doctest::Approx(0.8));
}

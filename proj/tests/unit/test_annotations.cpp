#include "radmark/error.hpp"
#include "radmark/ingest/annotations.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace radmark;
using nlohmann::json;

namespace {

json sample_doc() {
    return json::parse(R"({
      "schema_version": 1,
      "image_id": "case_001",
      "landmarks": [
        {"code": "A01_r", "type": "point", "coordinates": [812.5, 1030.0]},
        {"code": "ZZZ", "type": "point", "coordinates": [1, 2]},
        {"code": "F23_l", "type": "point", "coordinates": [5]}
      ],
      "outlines": [
        {"code": "O01_r", "type": "polyline", "coordinates": [[10, 10], [20, 12], [30, 18]]}
      ],
      "patches": [
        {"code": "P02", "type": "polygon", "coordinates": [[100, 100], [120, 100], [120, 120]]},
        {"code": "P01_r", "type": "polygon", "coordinates": [[1, 1], [2, 2]]}
      ]
    })");
}

} // namespace

TEST_CASE("canonical document loads with per-feature errors") {
    const auto reg = testing::pelvis_registry();
    const auto r = parse_annotations(sample_doc(), reg);
    CHECK(r.set.image_id == "case_001");
    const auto a01 = reg.require("A01_r");
    REQUIRE(r.set.landmarks.count(a01) == 1);
    CHECK(r.set.landmarks.at(a01) == PointPx{812.5, 1030.0, Frame::original});
    REQUIRE(r.rejected.size() == 1);
    CHECK(r.rejected[0].code == "ZZZ");
    // F23_l lacks a coordinate, P01_r has two vertices.
    CHECK(r.invalid.size() == 2);
    CHECK(r.set.outlines.size() == 1);
    CHECK(r.set.patches.size() == 1);
}

TEST_CASE("empty feature set") {
    const auto reg = testing::pelvis_registry();
    const auto r = parse_annotations(json::parse(R"({"schema_version":1,"image_id":"e"})"), reg);
    CHECK(r.set.empty());
    CHECK(r.rejected.empty());
    CHECK(r.invalid.empty());
}

TEST_CASE("kind mismatch is a per-feature error") {
    const auto reg = testing::pelvis_registry();
    const auto r = parse_annotations(json::parse(R"({"schema_version":1,"image_id":"e",
        "landmarks":[{"code":"P02","type":"point","coordinates":[1,2]}]})"),
                                     reg);
    CHECK(r.set.empty());
    CHECK(r.invalid.size() == 1);
}

TEST_CASE("document-level failures") {
    const auto reg = testing::pelvis_registry();
    CHECK_THROWS_AS(parse_annotations(json::parse(R"({"schema_version":1})"), reg), IngestionError);
    CHECK_THROWS_AS(parse_annotations(json::parse(R"({"schema_version":9,"image_id":"x"})"), reg), IngestionError);
    CHECK_THROWS_AS(parse_annotations(json::parse("[1,2]"), reg), IngestionError);
    testing::TempDir dir;
    std::ofstream(dir / "bad.json") << "{not json";
    CHECK_THROWS_AS(load_annotations(dir / "bad.json", reg), IngestionError);
}

TEST_CASE("flat adapter layout") {
    const auto reg = testing::pelvis_registry();
    const auto r = parse_annotations(json::parse(R"({"image_id":"flat","features":{
        "A01_r":[3,4], "O08":[[1,1],[2,2]], "P02":[[0,0],[4,0],[4,4],[0,4]], "nope":[1,1]}})"),
                                     reg);
    CHECK(r.set.landmarks.size() == 1);
    CHECK(r.set.outlines.size() == 1);
    CHECK(r.set.patches.size() == 1);
    CHECK(r.rejected.size() == 1);
}

TEST_CASE("serialize then parse gives an equal set") {
    const auto reg = testing::pelvis_registry();
    auto g = testing::test_rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        AnnotationSet set;
        set.image_id = "rt_" + std::to_string(trial);
        for (const auto& c : reg.classes()) {
            if (testing::uniform(g, 0, 1) < 0.3) continue;
            auto pt = [&] { return PointPx{testing::uniform(g, 0, 3000), testing::uniform(g, 0, 3000), Frame::original}; };
            switch (c.kind) {
            case FeatureKind::landmark: set.landmarks[c.id] = pt(); break;
            case FeatureKind::outline: set.outlines[c.id] = Polyline{{pt(), pt(), pt()}}; break;
            case FeatureKind::patch:
                if (trial % 2) {
                    set.patches[c.id] = Polygon{{pt(), pt(), pt(), pt()}};
                } else {
                    DenseMask m(7, 5, Frame::original);
                    m.set(testing::uniform_int(g, 0, 6), testing::uniform_int(g, 0, 4));
                    set.masks[c.id] = Mask::encode(m);
                }
                break;
            }
        }
        const auto doc = annotations_to_json(set, reg);
        const auto back = parse_annotations(json::parse(doc.dump()), reg);
        CHECK(back.invalid.empty());
        CHECK(back.set == set);
        CHECK(annotations_to_json(back.set, reg).dump() == doc.dump());
    }
}

TEST_CASE("save and load through a file") {
    const auto reg = testing::pelvis_registry();
    testing::TempDir dir;
    const auto set = parse_annotations(sample_doc(), reg).set;
    save_annotations(dir / "a.json", set, reg);
    CHECK(load_annotations(dir / "a.json", reg).set == set);
}

TEST_CASE("bounds validation") {
    const auto reg = testing::pelvis_registry();
    AnnotationSet set;
    set.image_id = "b";
    set.landmarks[reg.require("A01_r")] = {50, 50, Frame::original};
    set.landmarks[reg.require("A01_l")] = {150, 50, Frame::original};
    set.patches[reg.require("P02")] = Polygon{{{0, 0, Frame::original}, {10, 10, Frame::original}, {0, 10, Frame::original}, {10, 0, Frame::original}}};
    const auto issues = validate_bounds(set, reg, 100, 100);
    REQUIRE(issues.size() == 2);
    CHECK(issues[0].code == "A01_l");
    CHECK(issues[1].code == "P02");
}

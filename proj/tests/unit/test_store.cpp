#include "radmark/error.hpp"
#include "radmark/ingest/store.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

using namespace radmark;

TEST_CASE("data store create, add, reopen") {
    testing::TempDir dir;
    const auto reg = testing::pilot_registry();
    {
        auto store = DataStore::create(dir / "ds", reg);
        AnnotationSet truth;
        truth.image_id = "img-1";
        truth.landmarks[reg.require("A01_r")] = {3, 4, Frame::original};
        store.add(ImageRecord("img-1", 16, 8, 12, std::vector<std::int32_t>(128, 5), PixelSpacing::isotropic(0.5)), &truth);
        store.add(ImageRecord("img-0", 4, 4, 8, std::vector<std::int32_t>(16, 1), std::nullopt), nullptr);
        store.save_index();
    }
    const auto store = DataStore::open(dir / "ds");
    CHECK(store.registry().size() == reg.size());
    CHECK(store.ids() == std::vector<std::string>{"img-0", "img-1"});
    REQUIRE(store.find("img-1") != nullptr);
    CHECK(store.find("img-1")->calibrated);
    CHECK(store.find("img-1")->has_annotations);
    CHECK_FALSE(store.find("img-0")->has_annotations);
    CHECK(store.load_record("img-1").width() == 16);
    CHECK(store.load_truth("img-1").landmarks.size() == 1);
    CHECK_THROWS_AS(store.load_truth("img-0"), IngestionError);
    CHECK(store.find("nope") == nullptr);
}

TEST_CASE("image id rules") {
    CHECK(valid_image_id("synth_0001"));
    CHECK(valid_image_id("a.b-c"));
    CHECK_FALSE(valid_image_id(""));
    CHECK_FALSE(valid_image_id(".hidden"));
    CHECK_FALSE(valid_image_id("../etc"));
    CHECK_FALSE(valid_image_id("a/b"));
    CHECK_FALSE(valid_image_id(std::string(200, 'a')));
}

TEST_CASE("opening a missing store fails") {
    testing::TempDir dir;
    CHECK_THROWS_AS(DataStore::open(dir / "nothing"), ConfigError);
}

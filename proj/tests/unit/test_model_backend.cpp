#include "radmark/error.hpp"
#include "radmark/infer/model_backend.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

using namespace radmark;

namespace {

const std::filesystem::path models = std::filesystem::path(RADMARK_TEST_DATA) / "models";

NormalizedImage zeros(int side) {
    NormalizedImage n;
    n.image_id = "z";
    n.width = n.height = side;
    n.intensities.assign(static_cast<std::size_t>(side) * side, 0);
    return n;
}

BackendDescriptor desc(int side) { return {"onnx", side, Capability::both, true}; }

} // namespace

TEST_CASE("missing model file names the path") {
    try {
        load_model_backend(models / "nope.onnx", models / "segmenter_64.onnx", desc(64));
        FAIL("expected a load error");
    } catch (const BackendError& e) {
        CHECK(std::string(e.what()).find("nope.onnx") != std::string::npos);
    }
}

#ifdef RADMARK_TEST_ONNX

TEST_CASE("side mismatch is rejected at load") {
    CHECK(model_backend_available());
    CHECK_THROWS_AS(load_model_backend(models / "detector_128.onnx", models / "segmenter_64.onnx", desc(64)),
                    BackendError);
    CHECK_THROWS_AS(load_model_backend(models / "detector_64.onnx", models / "segmenter_64.onnx", desc(128)),
                    BackendError);
}

TEST_CASE("toy models: smoke inference on a zero image") {
    auto backend = load_model_backend(models / "detector_64.onnx", models / "segmenter_64.onnx", desc(64));
    CHECK_FALSE(backend->descriptor().thread_safe);
    const auto dets = run_detect(*backend, zeros(64));
    // Three real rows; the padding row is dropped.
    REQUIRE(dets.size() == 3);
    CHECK(index_of(dets[0].class_id) == 2);
    CHECK(dets[0].confidence == doctest::Approx(0.9));
    CHECK(dets[0].box.x_min() == doctest::Approx(16));
    CHECK(dets[0].box.x_max() == doctest::Approx(32));
    CHECK(index_of(dets[2].class_id) == 0);
    CHECK(dets[2].box.y_max() == doctest::Approx(0.3 * 64));

    const auto r = run_segment(*backend, zeros(64), BBox(8, 8, 24, 40, Frame::model), class_id(1));
    REQUIRE(r.prob.size() == 64u * 64u);
    CHECK(r.prob[static_cast<std::size_t>(20) * 64 + 16] > 0.9f);
    CHECK(r.prob[static_cast<std::size_t>(50) * 64 + 50] < 0.1f);
}

TEST_CASE("detector-only descriptor") {
    auto backend = load_model_backend(models / "detector_64.onnx", {}, {"det", 64, Capability::detect, true});
    CHECK(run_detect(*backend, zeros(64)).size() == 3);
}

#else

TEST_CASE("adapter disabled in this build") {
    CHECK_FALSE(model_backend_available());
}

#endif

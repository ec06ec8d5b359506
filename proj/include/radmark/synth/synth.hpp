#pragma once

#include "radmark/core/image.hpp"
#include "radmark/core/registry.hpp"
#include "radmark/ingest/annotations.hpp"

#include <cstdint>
#include <string>

namespace radmark {

// Schematic AP pelvis: femoral heads and shafts, a pelvic ring, a calibration
// ball, with every registry class placed at a jittered canonical position.
// Patient right is on the image left.
struct SynthConfig {
    int count = 20;
    std::uint64_t seed = 7;
    int width = 512;
    int height = 512;
    double spacing_mm = 0.5;
    bool calibrated = true;
    int bit_depth = 12;
    // Per-feature positional jitter, fraction of the image size.
    double feature_jitter = 0.004;
};

struct SynthCase {
    ImageRecord record;
    AnnotationSet truth;
};

std::string synth_image_id(int index);

// Case `index` (0-based) depends only on the config and the index.
SynthCase synth_case(const SynthConfig& config, const ClassRegistry& registry, int index);

} // namespace radmark

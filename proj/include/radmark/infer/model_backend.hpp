#pragma once

#include "radmark/infer/backend.hpp"

#include <filesystem>
#include <memory>

namespace radmark {

// Executes exported ONNX networks through OpenCV DNN.
//
// Detector:  input  "image" float [1, 1, S, S], intensities / 255
//            output [1, N, 6] rows (x1, y1, x2, y2, confidence, class) in
//            model pixels; rows with confidence 0 are padding.
// Segmenter: inputs "image" as above and "box" float [1, 4] (x1, y1, x2, y2
//            in model pixels); output [1, 1, S, S] probabilities.
//
// Either path may be empty when the descriptor does not provide that stage.
// A probe pass on a zero image at load time rejects models whose input side
// disagrees with the descriptor. Throws BackendError naming the path.
// Builds without OpenCV DNN always throw BackendError.
std::unique_ptr<InferenceBackend> load_model_backend(const std::filesystem::path& detector_path,
                                                     const std::filesystem::path& segmenter_path,
                                                     BackendDescriptor descriptor);

bool model_backend_available();

} // namespace radmark

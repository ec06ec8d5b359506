#pragma once

#include "radmark/core/registry.hpp"
#include "radmark/ingest/normalize.hpp"
#include "radmark/labels/bundle.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace radmark {

// Detector/segmenter training tree:
//   dataset.yaml
//   images/<split>/<id>.png      model-frame 8-bit input
//   labels/<split>/<id>.txt      box format
//   polygons/<split>/<id>.txt    polygon format
// Returns export warnings. Throws ServiceError on I/O failure.
std::vector<std::string> write_dataset_entry(const std::filesystem::path& root, const NormalizedImage& image,
                                             const LabelBundle& bundle);

// Class names plus an augmentation stanza for the external training stack.
// Reflection is disabled because it would swap left/right classes.
std::string dataset_yaml(const ClassRegistry& registry, int model_side);
void write_dataset_yaml(const std::filesystem::path& root, const ClassRegistry& registry, int model_side);

} // namespace radmark

#pragma once

#include "radmark/core/image.hpp"
#include "radmark/core/registry.hpp"
#include "radmark/ingest/annotations.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace radmark {

// Canonical on-disk dataset:
//   <root>/registry.json
//   <root>/index.json              image list, schema_version 1
//   <root>/images/<id>.dcm
//   <root>/annotations/<id>.json   canonical annotation layout
//   <root>/split.txt               optional split manifest
struct StoreEntry {
    std::string image_id;
    int width = 0;
    int height = 0;
    bool calibrated = false;
    bool has_annotations = false;
};

class DataStore {
  public:
    // Throws ConfigError if the root, index or registry is unusable.
    static DataStore open(const std::filesystem::path& root);
    // Creates the directory tree and writes the registry and an empty index.
    static DataStore create(const std::filesystem::path& root, const ClassRegistry& registry);

    const std::filesystem::path& root() const { return root_; }
    const ClassRegistry& registry() const { return registry_; }
    // Sorted by image id.
    const std::vector<StoreEntry>& entries() const { return entries_; }
    std::vector<std::string> ids() const;
    const StoreEntry* find(const std::string& id) const;

    std::filesystem::path dicom_path(const std::string& id) const;
    std::filesystem::path annotation_path(const std::string& id) const;
    std::filesystem::path split_path() const { return root_ / "split.txt"; }

    // Writes the DICOM file and, when given, the annotations; the index is
    // updated in memory until save_index.
    void add(const ImageRecord& record, const AnnotationSet* truth);
    void save_index() const;

    ImageRecord load_record(const std::string& id) const;
    // Throws IngestionError when the image has no annotations.
    AnnotationSet load_truth(const std::string& id) const;

  private:
    DataStore(std::filesystem::path root, ClassRegistry registry) : root_(std::move(root)), registry_(std::move(registry)) {}

    std::filesystem::path root_;
    ClassRegistry registry_;
    std::vector<StoreEntry> entries_;
};

// Image ids become file names, so they are restricted to [A-Za-z0-9._-] and
// must not start with a dot.
bool valid_image_id(const std::string& id);

} // namespace radmark

#include "radmark/ingest/store.hpp"

#include "radmark/error.hpp"
#include "radmark/ingest/dicom.hpp"
#include "radmark/io/files.hpp"

#include <algorithm>

namespace radmark {

bool valid_image_id(const std::string& id) {
    if (id.empty() || id.size() > 128 || id[0] == '.') return false;
    return std::all_of(id.begin(), id.end(), [](char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' || c == '_' ||
               c == '-';
    });
}

DataStore DataStore::open(const std::filesystem::path& root) {
    if (!std::filesystem::is_directory(root)) {
        throw ConfigError("data store not found: " + root.string());
    }
    DataStore store(root, load_class_registry(root / "registry.json"));
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(root / "index.json"));
        if (doc.at("schema_version").get<int>() != 1) throw ConfigError("unsupported index schema_version");
        for (const auto& e : doc.at("images")) {
            store.entries_.push_back({e.at("image_id").get<std::string>(), e.at("width").get<int>(),
                                      e.at("height").get<int>(), e.at("calibrated").get<bool>(),
                                      e.at("has_annotations").get<bool>()});
        }
        std::sort(store.entries_.begin(), store.entries_.end(),
                  [](const StoreEntry& a, const StoreEntry& b) { return a.image_id < b.image_id; });
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError((root / "index.json").string() + ": " + e.what());
    }
    return store;
}

DataStore DataStore::create(const std::filesystem::path& root, const ClassRegistry& registry) {
    std::error_code ec;
    for (const auto& dir : {root, root / "images", root / "annotations"}) {
        std::filesystem::create_directories(dir, ec);
        if (ec) throw ConfigError(dir.string() + ": " + ec.message());
    }
    write_text_file_atomic(root / "registry.json", registry_to_json(registry).dump(2) + "\n");
    DataStore store(root, registry);
    store.save_index();
    return store;
}

std::vector<std::string> DataStore::ids() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.push_back(e.image_id);
    return out;
}

const StoreEntry* DataStore::find(const std::string& id) const {
    const auto it = std::find_if(entries_.begin(), entries_.end(), [&](const StoreEntry& e) { return e.image_id == id; });
    return it == entries_.end() ? nullptr : &*it;
}

std::filesystem::path DataStore::dicom_path(const std::string& id) const { return root_ / "images" / (id + ".dcm"); }

std::filesystem::path DataStore::annotation_path(const std::string& id) const {
    return root_ / "annotations" / (id + ".json");
}

void DataStore::add(const ImageRecord& record, const AnnotationSet* truth) {
    if (!valid_image_id(record.id())) {
        throw ValidationError("image id '" + record.id() + "' is not usable as a file name");
    }
    if (find(record.id())) {
        throw ValidationError("image id '" + record.id() + "' already in the store");
    }
    write_file_atomic(dicom_path(record.id()), encode_dicom(record));
    if (truth) save_annotations(annotation_path(record.id()), *truth, registry_);
    StoreEntry entry{record.id(), record.width(), record.height(), record.calibrated(), truth != nullptr};
    const auto pos = std::lower_bound(entries_.begin(), entries_.end(), entry.image_id,
                                      [](const StoreEntry& e, const std::string& id) { return e.image_id < id; });
    entries_.insert(pos, std::move(entry));
}

void DataStore::save_index() const {
    auto images = nlohmann::json::array();
    for (const auto& e : entries_) {
        images.push_back({{"image_id", e.image_id},
                          {"width", e.width},
                          {"height", e.height},
                          {"calibrated", e.calibrated},
                          {"has_annotations", e.has_annotations}});
    }
    write_text_file_atomic(root_ / "index.json",
                           nlohmann::json{{"schema_version", 1}, {"images", std::move(images)}}.dump(2) + "\n");
}

ImageRecord DataStore::load_record(const std::string& id) const {
    if (!find(id)) throw ValidationError("unknown image '" + id + "'");
    return load_dicom(dicom_path(id), id).record;
}

AnnotationSet DataStore::load_truth(const std::string& id) const {
    const auto* e = find(id);
    if (!e) throw ValidationError("unknown image '" + id + "'");
    if (!e->has_annotations) throw IngestionError("image '" + id + "' has no annotations");
    auto result = load_annotations(annotation_path(id), registry_);
    return std::move(result.set);
}

} // namespace radmark

#include "radmark/review/store.hpp"

#include "radmark/error.hpp"
#include "radmark/io/files.hpp"
#include "radmark/ingest/store.hpp"

#include <algorithm>
#include <cstdio>

namespace radmark {

namespace {

constexpr int index_schema_version = 1;

std::optional<int> revision_of(const std::filesystem::path& file) {
    // Exactly rev-NNNNNN.json; temporaries carry a further suffix.
    const auto name = file.filename().string();
    if (name.size() != 15 || name.rfind("rev-", 0) != 0 || name.substr(10) != ".json") return std::nullopt;
    int rev = 0;
    for (std::size_t i = 4; i < 10; ++i) {
        if (name[i] < '0' || name[i] > '9') return std::nullopt;
        rev = rev * 10 + (name[i] - '0');
    }
    if (rev <= 0) return std::nullopt;
    return rev;
}

} // namespace

ReviewStore::ReviewStore(std::filesystem::path dir, const ClassRegistry& registry)
    : dir_(std::move(dir)), registry_(registry) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw ServiceError(dir_.string() + ": " + ec.message());
    rescan();
}

std::filesystem::path ReviewStore::revision_path(const std::string& image_id, int revision) const {
    char name[32];
    std::snprintf(name, sizeof name, "rev-%06d.json", revision);
    return dir_ / image_id / name;
}

std::vector<int> ReviewStore::revisions(const std::string& image_id) const {
    std::vector<int> out;
    std::error_code ec;
    const auto d = dir_ / image_id;
    if (!valid_image_id(image_id) || !std::filesystem::is_directory(d, ec)) return out;
    for (const auto& e : std::filesystem::directory_iterator(d, ec)) {
        if (auto r = revision_of(e.path())) out.push_back(*r);
    }
    std::sort(out.begin(), out.end());
    return out;
}

ReviewRecord ReviewStore::load_revision(const std::string& image_id, int revision) const {
    if (!valid_image_id(image_id)) throw ServiceError("invalid image id '" + image_id + "'");
    const auto path = revision_path(image_id, revision);
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    auto r = record_from_json(doc, registry_);
    if (r.image_id != image_id || r.revision != revision) {
        throw ValidationError(path.string() + ": file name does not match its content");
    }
    return r;
}

void ReviewStore::rescan() {
    std::map<std::string, std::pair<int, std::string>> indexed;
    const auto index_path = dir_ / "index.json";
    std::error_code ec;
    if (std::filesystem::exists(index_path, ec)) {
        try {
            const auto doc = nlohmann::json::parse(read_text_file(index_path));
            for (const auto& [id, e] : doc.at("images").items()) {
                indexed[id] = {e.at("revision").get<int>(), e.at("status").get<std::string>()};
            }
        } catch (const std::exception&) {
            // A damaged index is rebuilt from the revision files.
            indexed.clear();
            ++rescan_.repaired;
        }
    }
    for (const auto& e : std::filesystem::directory_iterator(dir_, ec)) {
        if (!e.is_directory()) continue;
        const auto id = e.path().filename().string();
        if (!valid_image_id(id)) continue;
        auto revs = revisions(id);
        for (auto it = revs.rbegin(); it != revs.rend(); ++it) {
            try {
                cache_[id] = load_revision(id, *it);
                break;
            } catch (const Error&) {
                rescan_.unreadable.push_back(revision_path(id, *it).string());
            }
        }
    }
    rescan_.images = cache_.size();
    for (const auto& [id, r] : cache_) {
        auto it = indexed.find(id);
        if (it == indexed.end() || it->second.first != r.revision || it->second.second != to_string(r.status)) {
            ++rescan_.repaired;
        }
    }
    for (const auto& [id, _] : indexed)
        if (!cache_.count(id)) ++rescan_.repaired;
    if (rescan_.repaired > 0 || !std::filesystem::exists(index_path, ec)) write_index();
}

void ReviewStore::write_index() const {
    std::lock_guard lock(index_mutex_);
    nlohmann::json images = nlohmann::json::object();
    {
        std::shared_lock cache(cache_mutex_);
        for (const auto& [id, r] : cache_) images[id] = {{"revision", r.revision}, {"status", to_string(r.status)}};
    }
    const nlohmann::json doc{{"schema_version", index_schema_version}, {"images", std::move(images)}};
    write_text_file_atomic(dir_ / "index.json", doc.dump(2) + "\n");
}

std::mutex& ReviewStore::image_lock(const std::string& image_id) {
    std::lock_guard lock(locks_mutex_);
    auto& m = locks_[image_id];
    if (!m) m = std::make_unique<std::mutex>();
    return *m;
}

std::optional<ReviewRecord> ReviewStore::latest(const std::string& image_id) const {
    std::shared_lock lock(cache_mutex_);
    auto it = cache_.find(image_id);
    if (it == cache_.end()) return std::nullopt;
    return it->second;
}

std::optional<ReviewStatus> ReviewStore::status(const std::string& image_id) const {
    std::shared_lock lock(cache_mutex_);
    auto it = cache_.find(image_id);
    if (it == cache_.end()) return std::nullopt;
    return it->second.status;
}

std::optional<ReviewRecord> ReviewStore::update(const std::string& image_id, const Mutation& fn) {
    if (!valid_image_id(image_id)) throw ServiceError("invalid image id '" + image_id + "'");
    std::lock_guard lock(image_lock(image_id));
    auto next = fn(latest(image_id));
    if (!next) return std::nullopt;
    const auto current = latest(image_id);
    const int expected = current ? current->revision + 1 : 1;
    if (next->image_id != image_id || next->revision != expected) {
        throw ContractViolation("review store: record for '" + image_id + "' must carry revision " +
                                std::to_string(expected));
    }
    const auto path = revision_path(image_id, next->revision);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw ServiceError(path.parent_path().string() + ": " + ec.message());
    // Append-only: a revision file is never replaced.
    if (std::filesystem::exists(path, ec)) throw ServiceError(path.string() + ": revision already exists");
    write_text_file_atomic(path, record_to_json(*next, registry_).dump(2) + "\n");
    sync_directory(path.parent_path());
    if (after_revision_write) after_revision_write();
    {
        std::unique_lock cache(cache_mutex_);
        cache_[image_id] = *next;
    }
    write_index();
    return next;
}

std::vector<ReviewRecord> ReviewStore::snapshot() const {
    std::shared_lock lock(cache_mutex_);
    std::vector<ReviewRecord> out;
    out.reserve(cache_.size());
    for (const auto& [_, r] : cache_) out.push_back(r);
    return out;
}

} // namespace radmark

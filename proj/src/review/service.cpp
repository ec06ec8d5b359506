#include "radmark/review/service.hpp"

#include "radmark/error.hpp"
#include "radmark/io/files.hpp"
#include "radmark/io/png.hpp"
#include "radmark/ingest/normalize.hpp"
#include "radmark/labels/bundle.hpp"
#include "radmark/labels/dataset.hpp"
#include "radmark/labels/split.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>

#include <unistd.h>

namespace radmark {

namespace {

ApiResponse json_response(int status, const nlohmann::json& body) { return {status, body.dump(), "application/json"}; }

ApiResponse error_response(int status, std::string_view kind, const std::string& message,
                           nlohmann::json extra = nlohmann::json::object()) {
    extra["error"] = kind;
    extra["message"] = message;
    return json_response(status, extra);
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct BadRequest {
    std::string message;
};

nlohmann::json parse_body(std::string_view body) {
    try {
        auto doc = nlohmann::json::parse(body);
        if (!doc.is_object()) throw BadRequest{"request body must be a JSON object"};
        return doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw BadRequest{std::string("malformed JSON: ") + e.what()};
    }
}

int base_revision_of(const nlohmann::json& doc) {
    if (!doc.contains("base_revision") || !doc["base_revision"].is_number_integer()) {
        throw BadRequest{"base_revision must be an integer"};
    }
    return doc["base_revision"].get<int>();
}

std::string reviewer_of(const nlohmann::json& doc) {
    if (!doc.contains("reviewer")) return {};
    if (!doc["reviewer"].is_string()) throw BadRequest{"reviewer must be a string"};
    return doc["reviewer"].get<std::string>();
}

// Raised inside a store mutation to abort it with an HTTP answer.
struct Abort {
    ApiResponse response;
};

nlohmann::json unresolved_codes(const ReviewRecord& r, const ClassRegistry& registry) {
    auto arr = nlohmann::json::array();
    for (auto id : unresolved_classes(r, registry)) arr.push_back(registry.at(id).code);
    return arr;
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

template <typename T> T config_value(const nlohmann::json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string("service config: '") + key + "' has the wrong type");
    }
}

} // namespace

ServiceConfig service_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("service config must be a JSON object");
    static const std::set<std::string> known{"host",  "port",      "data_root",     "registry",   "pool_dir",
                                             "token", "page_size", "max_page_size", "model_side", "threads"};
    for (const auto& [k, _] : doc.items())
        if (!known.count(k)) throw ConfigError("service config: unknown key '" + k + "'");
    ServiceConfig c;
    if (doc.contains("host")) c.host = config_value<std::string>(doc, "host");
    if (doc.contains("port")) c.port = config_value<int>(doc, "port");
    if (doc.contains("data_root")) c.data_root = config_value<std::string>(doc, "data_root");
    if (doc.contains("registry")) c.registry = config_value<std::string>(doc, "registry");
    if (doc.contains("pool_dir")) c.pool_dir = config_value<std::string>(doc, "pool_dir");
    if (doc.contains("token")) c.token = config_value<std::string>(doc, "token");
    if (doc.contains("page_size")) c.page_size = config_value<std::size_t>(doc, "page_size");
    if (doc.contains("max_page_size")) c.max_page_size = config_value<std::size_t>(doc, "max_page_size");
    if (doc.contains("model_side")) c.model_side = config_value<int>(doc, "model_side");
    if (doc.contains("threads")) c.threads = config_value<int>(doc, "threads");
    if (c.port < 0 || c.port > 65535) throw ConfigError("service config: port out of range");
    if (c.page_size == 0 || c.page_size > c.max_page_size) throw ConfigError("service config: bad page_size");
    if (c.threads < 1) throw ConfigError("service config: threads must be >= 1");
    return c;
}

ServiceConfig load_service_config(const std::filesystem::path& path) {
    try {
        return service_config_from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

void apply_env_overrides(ServiceConfig& config, const EnvLookup& env) {
    if (const char* v = env("RADMARK_PORT")) {
        char* end = nullptr;
        const long port = std::strtol(v, &end, 10);
        if (!*v || *end || port < 0 || port > 65535) throw ConfigError("RADMARK_PORT: not a port number");
        config.port = static_cast<int>(port);
    }
    if (const char* v = env("RADMARK_DATA_ROOT")) config.data_root = v;
    if (const char* v = env("RADMARK_REGISTRY")) config.registry = std::filesystem::path(v);
    if (const char* v = env("RADMARK_TOKEN")) config.token = std::string(v);
}

ReviewService::ReviewService(ServiceConfig config)
    : clock(utc_now), config_(std::move(config)), data_(DataStore::open(config_.data_root)),
      registry_(config_.registry ? load_class_registry(*config_.registry) : data_.registry()) {
    if (registry_.size() != data_.registry().size()) {
        throw ConfigError("registry override does not match the data store registry");
    }
    for (const auto& c : registry_.classes()) {
        if (data_.registry().at(c.id).code != c.code) {
            throw ConfigError("registry override does not match the data store registry at '" + c.code + "'");
        }
    }
    store_ = std::make_unique<ReviewStore>(config_.data_root / "review", registry_);
}

std::filesystem::path ReviewService::pool_dir() const {
    return config_.pool_dir ? *config_.pool_dir : config_.data_root / "pool";
}

std::filesystem::path ReviewService::predictions_path(const std::string& image_id) const {
    return config_.data_root / "predictions" / (image_id + ".json");
}

bool ReviewService::authorized(const std::optional<std::string>& token) const {
    return !config_.token || (token && *token == *config_.token);
}

std::optional<PredictionSet> ReviewService::load_prediction(const std::string& image_id) const {
    const auto path = predictions_path(image_id);
    std::error_code ec;
    if (!std::filesystem::exists(path, ec)) return std::nullopt;
    return load_predictions(path, registry_);
}

ReviewRecord ReviewService::current_or_pending(const std::string& image_id, const std::optional<ReviewRecord>& stored,
                                               const PredictionSet& prediction) const {
    if (stored) return *stored;
    ReviewRecord r;
    r.image_id = image_id;
    r.prediction = prediction;
    return r;
}

ApiResponse ReviewService::get_registry() const { return json_response(200, registry_to_json(registry_)); }

ApiResponse ReviewService::list_images(std::size_t page, std::optional<std::size_t> page_size) const {
    const std::size_t size = page_size.value_or(config_.page_size);
    if (page == 0 || size == 0 || size > config_.max_page_size) {
        return error_response(400, "bad_request", "page must be >= 1 and page_size in 1.." +
                                                      std::to_string(config_.max_page_size));
    }
    const auto& entries = data_.entries();
    auto images = nlohmann::json::array();
    const std::size_t begin = std::min(entries.size(), (page - 1) * size);
    const std::size_t end = std::min(entries.size(), begin + size);
    for (std::size_t i = begin; i < end; ++i) {
        const auto& id = entries[i].image_id;
        const auto stored = store_->latest(id);
        std::error_code ec;
        images.push_back({{"image_id", id},
                          {"status", to_string(stored ? stored->status : ReviewStatus::pending)},
                          {"revision", stored ? stored->revision : 0},
                          {"has_predictions", std::filesystem::exists(predictions_path(id), ec)}});
    }
    return json_response(200, {{"page", page}, {"page_size", size}, {"total", entries.size()}, {"images", images}});
}

ApiResponse ReviewService::render(const std::string& image_id, std::string_view frame) const {
    if (!data_.find(image_id)) return error_response(404, "not_found", "unknown image '" + image_id + "'");
    const auto record = data_.load_record(image_id);
    if (frame == "original") {
        return {200, [&] {
                    const auto px = render_original(record);
                    const auto png = encode_png_gray8(record.width(), record.height(), px);
                    return std::string(png.begin(), png.end());
                }(),
                "image/png"};
    }
    if (frame == "model") {
        const auto n = normalize_image(record, config_.model_side);
        const auto png = encode_png_gray8(n.width, n.height, n.intensities);
        return {200, std::string(png.begin(), png.end()), "image/png"};
    }
    return error_response(400, "bad_request", "frame must be 'original' or 'model'");
}

ApiResponse ReviewService::predictions(const std::string& image_id) const {
    if (!data_.find(image_id)) return error_response(404, "not_found", "unknown image '" + image_id + "'");
    const auto p = load_prediction(image_id);
    if (!p) return error_response(404, "not_found", "no predictions for '" + image_id + "'");
    return json_response(200, predictions_to_json(*p, registry_));
}

ApiResponse ReviewService::record(const std::string& image_id) const {
    if (!data_.find(image_id)) return error_response(404, "not_found", "unknown image '" + image_id + "'");
    const auto stored = store_->latest(image_id);
    if (stored) return json_response(200, record_to_json(*stored, registry_));
    const auto p = load_prediction(image_id);
    if (!p) return error_response(404, "not_found", "no predictions for '" + image_id + "'");
    return json_response(200, record_to_json(current_or_pending(image_id, std::nullopt, *p), registry_));
}

ApiResponse ReviewService::revision(const std::string& image_id, int rev) const {
    if (!data_.find(image_id)) return error_response(404, "not_found", "unknown image '" + image_id + "'");
    const auto revs = store_->revisions(image_id);
    if (!std::binary_search(revs.begin(), revs.end(), rev)) {
        return error_response(404, "not_found", "no revision " + std::to_string(rev));
    }
    return json_response(200, record_to_json(store_->load_revision(image_id, rev), registry_));
}

ApiResponse ReviewService::post_corrections(const std::string& image_id, std::string_view body) {
    if (!data_.find(image_id)) return error_response(404, "not_found", "unknown image '" + image_id + "'");
    try {
        const auto doc = parse_body(body);
        const int base = base_revision_of(doc);
        const auto reviewer = reviewer_of(doc);
        if (!doc.contains("corrections")) throw BadRequest{"corrections missing"};
        std::vector<FieldIssue> issues;
        const auto batch = corrections_from_json(doc["corrections"], registry_, issues);
        if (!issues.empty()) {
            return error_response(422, "validation", "invalid corrections", {{"issues", issues_to_json(issues)}});
        }
        if (batch.empty()) {
            return error_response(422, "validation", "empty correction batch",
                                  {{"issues", issues_to_json({{-1, "", "corrections", "at least one correction"}})}});
        }
        bool replayed = false;
        const auto stored = store_->update(image_id, [&](const std::optional<ReviewRecord>& cur) -> std::optional<ReviewRecord> {
            std::optional<PredictionSet> pred;
            if (!cur) {
                pred = load_prediction(image_id);
                if (!pred) throw Abort{error_response(404, "not_found", "no predictions for '" + image_id + "'")};
            }
            auto r = current_or_pending(image_id, cur, cur ? cur->prediction : *pred);
            if (cur && base == r.revision - 1 && r.last_action == "corrections" && r.last_batch == batch) {
                replayed = true;
                return std::nullopt;
            }
            if (base != r.revision) {
                throw Abort{error_response(409, "conflict", "stale revision", {{"current_revision", r.revision}})};
            }
            const auto bad = validate_corrections(batch, r.prediction, registry_);
            if (!bad.empty()) {
                throw Abort{error_response(422, "validation", "invalid corrections", {{"issues", issues_to_json(bad)}})};
            }
            const auto now = clock();
            if (r.revision == 0) r.created_at = now;
            r.updated_at = now;
            r.revision += 1;
            r.status = ReviewStatus::in_review;
            if (!reviewer.empty()) r.reviewer = reviewer;
            for (const auto& c : batch) r.corrections[c.class_id] = c;
            r.last_batch = batch;
            r.last_action = "corrections";
            return r;
        });
        const auto r = stored ? *stored : *store_->latest(image_id);
        return json_response(200, {{"image_id", image_id},
                                   {"revision", r.revision},
                                   {"status", to_string(r.status)},
                                   {"replayed", replayed},
                                   {"unresolved", unresolved_codes(r, registry_)}});
    } catch (const Abort& a) {
        return a.response;
    } catch (const BadRequest& b) {
        return error_response(400, "bad_request", b.message);
    } catch (const Error& e) {
        return error_response(500, to_string(e.kind()), e.what());
    }
}

ApiResponse ReviewService::finalize(const std::string& image_id, std::string_view body) {
    if (!data_.find(image_id)) return error_response(404, "not_found", "unknown image '" + image_id + "'");
    try {
        const auto doc = parse_body(body);
        const int base = base_revision_of(doc);
        const auto reviewer = reviewer_of(doc);
        bool replayed = false;
        const auto stored = store_->update(image_id, [&](const std::optional<ReviewRecord>& cur) -> std::optional<ReviewRecord> {
            std::optional<PredictionSet> pred;
            if (!cur) {
                pred = load_prediction(image_id);
                if (!pred) throw Abort{error_response(404, "not_found", "no predictions for '" + image_id + "'")};
            }
            auto r = current_or_pending(image_id, cur, cur ? cur->prediction : *pred);
            if (cur && r.status == ReviewStatus::curated && base == r.revision - 1 && r.last_action == "finalize") {
                replayed = true;
                return std::nullopt;
            }
            if (base != r.revision) {
                throw Abort{error_response(409, "conflict", "stale revision", {{"current_revision", r.revision}})};
            }
            const auto missing = unresolved_codes(r, registry_);
            if (!missing.empty()) {
                throw Abort{error_response(422, "unresolved", "every class must be accepted, corrected or marked missing",
                                           {{"unresolved", missing}})};
            }
            const auto now = clock();
            if (r.revision == 0) r.created_at = now;
            r.updated_at = now;
            r.revision += 1;
            r.status = ReviewStatus::curated;
            if (!reviewer.empty()) r.reviewer = reviewer;
            r.last_batch.clear();
            r.last_action = "finalize";
            return r;
        });
        const auto r = stored ? *stored : *store_->latest(image_id);
        return json_response(200, {{"image_id", image_id},
                                   {"revision", r.revision},
                                   {"status", to_string(r.status)},
                                   {"replayed", replayed}});
    } catch (const Abort& a) {
        return a.response;
    } catch (const BadRequest& b) {
        return error_response(400, "bad_request", b.message);
    } catch (const Error& e) {
        return error_response(500, to_string(e.kind()), e.what());
    }
}

ApiResponse ReviewService::export_training_pool() {
    std::lock_guard lock(export_mutex_);
    try {
        auto records = store_->snapshot();
        std::erase_if(records, [](const ReviewRecord& r) { return r.status != ReviewStatus::curated; });
        return json_response(200, write_training_pool(records, data_, registry_, pool_dir(), config_.model_side));
    } catch (const Error& e) {
        return error_response(500, to_string(e.kind()), e.what());
    }
}

nlohmann::json write_training_pool(const std::vector<ReviewRecord>& records, const DataStore& data,
                                   const ClassRegistry& registry, const std::filesystem::path& pool_dir,
                                   int model_side) {
    std::vector<const ReviewRecord*> sorted;
    for (const auto& r : records) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) { return a->image_id < b->image_id; });

    std::optional<SplitAssignment> split;
    std::error_code ec;
    if (std::filesystem::exists(data.split_path(), ec)) split = load_split_manifest(data.split_path());

    // Built beside the target and swapped in, so readers never see a mix.
    const auto staging = pool_dir.parent_path() / (pool_dir.filename().string() + ".staging-" + std::to_string(::getpid()));
    std::filesystem::remove_all(staging, ec);
    std::filesystem::create_directories(staging / "annotations", ec);
    if (ec) throw ServiceError(staging.string() + ": " + ec.message());

    auto entries = nlohmann::json::array();
    for (const auto* r : sorted) {
        const auto set = curated_annotations(*r, registry);
        save_annotations(staging / "annotations" / (r->image_id + ".json"), set, registry);
        const auto image = data.load_record(r->image_id);
        Split s = split ? split->split_of(r->image_id) : Split::train;
        if (s == Split::unassigned) s = Split::train;
        const auto normalized = normalize_image(image, model_side);
        const auto bundle = build_label_bundle(
            set, registry, model_target(image.width(), image.height(), image.spacing(), model_side), s);
        auto warnings = write_dataset_entry(staging, normalized, bundle);
        for (const auto& issue : bundle.issues) warnings.push_back(issue.code + ": " + issue.reason);
        entries.push_back({{"image_id", r->image_id},
                           {"revision", r->revision},
                           {"reviewer", r->reviewer},
                           {"split", to_string(s)},
                           {"warnings", warnings}});
    }
    if (!sorted.empty()) write_dataset_yaml(staging, registry, model_side);

    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::recursive_directory_iterator(staging, ec))
        if (e.is_regular_file()) files.push_back(std::filesystem::relative(e.path(), staging));
    std::sort(files.begin(), files.end());
    auto listing = nlohmann::json::array();
    for (const auto& f : files) {
        const auto bytes = read_text_file(staging / f);
        listing.push_back({{"path", f.generic_string()}, {"bytes", bytes.size()}, {"fnv1a64", hex64(fnv1a64(bytes))}});
    }
    const nlohmann::json manifest{{"schema_version", 1},
                                  {"model_side", model_side},
                                  {"records", std::move(entries)},
                                  {"files", std::move(listing)}};
    write_text_file_atomic(staging / "manifest.json", manifest.dump(2) + "\n");

    const auto retired = pool_dir.parent_path() / (pool_dir.filename().string() + ".old-" + std::to_string(::getpid()));
    std::filesystem::remove_all(retired, ec);
    if (std::filesystem::exists(pool_dir, ec)) std::filesystem::rename(pool_dir, retired, ec);
    if (ec) throw ServiceError(pool_dir.string() + ": " + ec.message());
    std::filesystem::rename(staging, pool_dir, ec);
    if (ec) throw ServiceError(pool_dir.string() + ": " + ec.message());
    std::filesystem::remove_all(retired, ec);
    sync_directory(pool_dir.parent_path());
    return manifest;
}

} // namespace radmark

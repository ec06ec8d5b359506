#pragma once

#include "radmark/core/registry.hpp"
#include "radmark/ingest/store.hpp"
#include "radmark/review/store.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace radmark {

struct ServiceConfig {
    std::string host = "127.0.0.1";
    // 0 binds an ephemeral port.
    int port = 8080;
    std::filesystem::path data_root;
    // Defaults to the data store's registry.
    std::optional<std::filesystem::path> registry;
    // Defaults to <data_root>/pool.
    std::optional<std::filesystem::path> pool_dir;
    // When set, every /api request must send it in X-Radmark-Token.
    std::optional<std::string> token;
    std::size_t page_size = 50;
    std::size_t max_page_size = 500;
    int model_side = 512;
    int threads = 4;
};

// Throws ConfigError on unknown keys or wrong types.
ServiceConfig service_config_from_json(const nlohmann::json& doc);
ServiceConfig load_service_config(const std::filesystem::path& path);
// RADMARK_PORT, RADMARK_DATA_ROOT, RADMARK_REGISTRY, RADMARK_TOKEN.
using EnvLookup = std::function<const char*(const char*)>;
void apply_env_overrides(ServiceConfig& config, const EnvLookup& env);

struct ApiResponse {
    int status = 200;
    std::string body;
    std::string content_type = "application/json";

    nlohmann::json json() const { return nlohmann::json::parse(body); }
};

// Data root layout used by the service:
//   <root>/...                    data store (images, annotations, registry)
//   <root>/predictions/<id>.json  pipeline output per image
//   <root>/review/                revision store
//   <root>/pool/                  training pool written by export
// Handlers are transport independent and safe to call concurrently.
class ReviewService {
  public:
    explicit ReviewService(ServiceConfig config);

    const ServiceConfig& config() const { return config_; }
    const ClassRegistry& registry() const { return registry_; }
    ReviewStore& store() { return *store_; }
    std::filesystem::path pool_dir() const;
    std::filesystem::path predictions_path(const std::string& image_id) const;

    bool authorized(const std::optional<std::string>& token) const;

    ApiResponse get_registry() const;
    // page is 1-based.
    ApiResponse list_images(std::size_t page, std::optional<std::size_t> page_size) const;
    ApiResponse render(const std::string& image_id, std::string_view frame) const;
    ApiResponse predictions(const std::string& image_id) const;
    ApiResponse record(const std::string& image_id) const;
    ApiResponse revision(const std::string& image_id, int revision) const;
    // Body: {"base_revision": n, "reviewer": "...", "corrections": [...]}.
    ApiResponse post_corrections(const std::string& image_id, std::string_view body);
    // Body: {"base_revision": n, "reviewer": "..."}.
    ApiResponse finalize(const std::string& image_id, std::string_view body);
    ApiResponse export_training_pool();

    // ISO-8601 UTC; replaceable for tests.
    std::function<std::string()> clock;

  private:
    std::optional<PredictionSet> load_prediction(const std::string& image_id) const;
    ReviewRecord current_or_pending(const std::string& image_id, const std::optional<ReviewRecord>& stored,
                                    const PredictionSet& prediction) const;

    ServiceConfig config_;
    DataStore data_;
    ClassRegistry registry_;
    std::unique_ptr<ReviewStore> store_;
    std::mutex export_mutex_;
};

// Writes curated annotations, regenerated label files and manifest.json into
// pool_dir, replacing its previous content. Output bytes depend only on the
// records, the images and the registry.
nlohmann::json write_training_pool(const std::vector<ReviewRecord>& records, const DataStore& data,
                                   const ClassRegistry& registry, const std::filesystem::path& pool_dir,
                                   int model_side);

// HTTP binding of ReviewService under /api.
class ReviewServer {
  public:
    explicit ReviewServer(ReviewService& service);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    // Binds and returns the port; throws ServiceError if binding fails.
    int bind();
    // Blocks until stop().
    void listen();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace radmark

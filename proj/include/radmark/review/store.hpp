#pragma once

#include "radmark/core/registry.hpp"
#include "radmark/review/record.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace radmark {

// Append-only revision store:
//   <dir>/<image_id>/rev-000001.json   full record after each change
//   <dir>/index.json                   latest revision and status per image
// Revision files are the source of truth; the index is a cache rebuilt by
// rescan when it disagrees.
class ReviewStore {
  public:
    struct RescanReport {
        std::size_t images = 0;
        // Index entries that disagreed with the revision files.
        std::size_t repaired = 0;
        // Revision files that failed to parse.
        std::vector<std::string> unreadable;
    };

    ReviewStore(std::filesystem::path dir, const ClassRegistry& registry);

    const std::filesystem::path& dir() const { return dir_; }
    const RescanReport& rescan_report() const { return rescan_; }

    std::optional<ReviewRecord> latest(const std::string& image_id) const;
    std::optional<ReviewStatus> status(const std::string& image_id) const;
    std::vector<int> revisions(const std::string& image_id) const;
    ReviewRecord load_revision(const std::string& image_id, int revision) const;

    using Mutation = std::function<std::optional<ReviewRecord>(const std::optional<ReviewRecord>& current)>;
    // Runs fn under the image's write lock. A returned record must carry the
    // next revision number; it is persisted before it becomes visible.
    // Exceptions from fn propagate with the store unchanged.
    std::optional<ReviewRecord> update(const std::string& image_id, const Mutation& fn);

    // Latest record of every image, taken under one lock.
    std::vector<ReviewRecord> snapshot() const;

    // Test hook: runs after a revision file lands and before the index update.
    std::function<void()> after_revision_write;

  private:
    std::filesystem::path revision_path(const std::string& image_id, int revision) const;
    void rescan();
    void write_index() const;
    std::mutex& image_lock(const std::string& image_id);

    std::filesystem::path dir_;
    const ClassRegistry& registry_;
    RescanReport rescan_;

    mutable std::shared_mutex cache_mutex_;
    std::map<std::string, ReviewRecord> cache_;

    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;

    mutable std::mutex index_mutex_;
};

} // namespace radmark

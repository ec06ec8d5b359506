#pragma once

#include "radmark/core/registry.hpp"

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace testing {

inline radmark::ClassRegistry pelvis_registry() {
    return radmark::load_class_registry(std::filesystem::path(RADMARK_DATA_DIR) / "pelvis_registry.json");
}

inline radmark::ClassRegistry pilot_registry() {
    return radmark::load_class_registry(std::filesystem::path(RADMARK_DATA_DIR) / "pilot_registry.json");
}

// Removed on destruction.
class TempDir {
  public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("radmark_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

// Test-local generator; the library's own streams are not used to build
// fixtures so a library RNG bug cannot hide itself.
inline std::mt19937_64 test_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline double uniform(std::mt19937_64& g, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(g);
}

inline int uniform_int(std::mt19937_64& g, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(g); }

} // namespace testing

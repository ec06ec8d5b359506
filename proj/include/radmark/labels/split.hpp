#pragma once

#include "radmark/core/image.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace radmark {

struct SplitCounts {
    std::size_t train = 80;
    std::size_t val = 5;
    std::size_t test = 15;

    std::size_t total() const { return train + val + test; }
    bool operator==(const SplitCounts&) const = default;
};

// Parses "train,val,test", e.g. "80,5,15". Throws ConfigError.
SplitCounts parse_split_counts(std::string_view text);

struct SplitAssignment {
    std::uint64_t seed = 0;
    SplitCounts counts;
    // Document order of the input ids.
    std::vector<std::pair<std::string, Split>> entries;

    Split split_of(std::string_view id) const;
    std::vector<std::string> ids_in(Split split) const;
    bool operator==(const SplitAssignment&) const = default;
};

// Shuffles document order with the seed, then deals train, val, test in that
// order. Throws ConfigError if the counts do not sum to the number of ids or
// ids repeat.
SplitAssignment split_dataset(const std::vector<std::string>& ids, SplitCounts counts, std::uint64_t seed);

// Manifest text:
//   # radmark split manifest v1
//   # seed 42
//   # counts train=80 val=5 test=15
//   <image_id> <split>
std::string format_split_manifest(const SplitAssignment& assignment);
SplitAssignment parse_split_manifest(std::string_view text);
SplitAssignment load_split_manifest(const std::filesystem::path& path);

} // namespace radmark

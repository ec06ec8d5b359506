#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace radmark {

using Rng = std::mt19937_64;

// Splittable seeding: every stochastic unit of work derives its own stream
// from the run seed and a stable key, so results do not depend on the order
// or thread in which work items execute.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

inline Rng make_rng(std::uint64_t seed, std::string_view key) { return Rng(derive_seed(seed, key)); }

// Distribution helpers with fixed algorithms. The <random> distributions are
// implementation-defined, which would make seeded output differ between
// standard libraries.
double uniform01(Rng& rng);
// Unbiased integer in [0, n). n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);
double standard_normal(Rng& rng);

template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        std::swap(items[i - 1], items[uniform_index(rng, i)]);
    }
}

} // namespace radmark

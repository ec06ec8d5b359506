#include "radmark/core/mask.hpp"

#include "radmark/error.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace radmark {

DenseMask::DenseMask(int width, int height, Frame frame) : width_(width), height_(height), frame_(frame) {
    if (width <= 0 || height <= 0) {
        throw ContractViolation("mask dimensions must be positive");
    }
    pixels_.assign(static_cast<std::size_t>(width) * height, 0);
}

std::size_t DenseMask::area() const {
    return static_cast<std::size_t>(std::count(pixels_.begin(), pixels_.end(), std::uint8_t{1}));
}

bool DenseMask::is_empty() const {
    return std::none_of(pixels_.begin(), pixels_.end(), [](std::uint8_t v) { return v != 0; });
}

namespace {

constexpr std::uint64_t ones = 0x0101010101010101ULL;
constexpr std::uint64_t highs = 0x8080808080808080ULL;

bool has_zero_byte(std::uint64_t v) { return ((v - ones) & ~v & highs) != 0; }

// First index >= pos whose occupancy differs from `foreground`. Scans eight
// bytes at a time over uniform stretches.
std::size_t next_change(std::span<const std::uint8_t> px, std::size_t pos, bool foreground) {
    const std::size_t n = px.size();
    while (pos + 8 <= n) {
        std::uint64_t word;
        std::memcpy(&word, px.data() + pos, sizeof word);
        const bool uniform = foreground ? !has_zero_byte(word) : word == 0;
        if (!uniform) break;
        pos += 8;
    }
    while (pos < n && (px[pos] != 0) == foreground) ++pos;
    return pos;
}

} // namespace

Mask Mask::encode(const DenseMask& dense) {
    Mask m;
    m.width_ = dense.width();
    m.height_ = dense.height();
    m.frame_ = dense.frame();

    const auto px = dense.data();
    const std::size_t n = px.size();
    std::size_t pos = 0;
    bool foreground = false;
    while (pos < n) {
        const std::size_t end = next_change(px, pos, foreground);
        m.runs_.push_back(static_cast<std::uint32_t>(end - pos));
        pos = end;
        foreground = !foreground;
    }
    return m;
}

Mask Mask::from_runs(int width, int height, Frame frame, std::vector<std::uint32_t> runs) {
    if (width <= 0 || height <= 0) {
        throw ContractViolation("rle mask: dimensions must be positive");
    }
    if (runs.empty()) {
        throw ContractViolation("rle mask: no runs");
    }
    for (std::size_t i = 1; i < runs.size(); ++i) {
        if (runs[i] == 0) {
            throw ContractViolation("rle mask: zero-length run after the first");
        }
    }
    const auto total = std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
    if (total != static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height)) {
        throw ContractViolation("rle mask: runs do not sum to width * height");
    }
    Mask m;
    m.width_ = width;
    m.height_ = height;
    m.frame_ = frame;
    m.runs_ = std::move(runs);
    return m;
}

DenseMask Mask::decode() const {
    DenseMask dense(width_, height_, frame_);
    auto px = dense.data();
    std::size_t pos = 0;
    for (std::size_t i = 0; i < runs_.size(); ++i) {
        if (i % 2 == 1) {
            std::fill_n(px.begin() + static_cast<std::ptrdiff_t>(pos), runs_[i], std::uint8_t{1});
        }
        pos += runs_[i];
    }
    return dense;
}

std::size_t Mask::area() const {
    std::size_t total = 0;
    for (std::size_t i = 1; i < runs_.size(); i += 2) {
        total += runs_[i];
    }
    return total;
}

} // namespace radmark

#pragma once

#include "radmark/core/geometry.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace radmark {

// Row-major binary occupancy grid used for computation.
class DenseMask {
  public:
    DenseMask() = default;
    DenseMask(int width, int height, Frame frame);

    int width() const { return width_; }
    int height() const { return height_; }
    Frame frame() const { return frame_; }

    bool get(int x, int y) const { return pixels_[index(x, y)] != 0; }
    void set(int x, int y, bool value = true) { pixels_[index(x, y)] = value ? 1 : 0; }
    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    std::span<std::uint8_t> data() { return pixels_; }
    std::span<const std::uint8_t> data() const { return pixels_; }

    std::size_t area() const;
    bool is_empty() const;

    bool operator==(const DenseMask&) const = default;

  private:
    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

    int width_ = 0;
    int height_ = 0;
    Frame frame_ = Frame::original;
    std::vector<std::uint8_t> pixels_;
};

// Run-length encoded mask, the at-rest representation.
//
// Runs alternate background/foreground starting with background. Only the
// first run may have zero length, and the runs sum to width * height.
class Mask {
  public:
    Mask() = default;

    static Mask encode(const DenseMask& dense);
    static Mask from_runs(int width, int height, Frame frame, std::vector<std::uint32_t> runs);

    DenseMask decode() const;

    int width() const { return width_; }
    int height() const { return height_; }
    Frame frame() const { return frame_; }
    const std::vector<std::uint32_t>& runs() const { return runs_; }

    std::size_t area() const;
    bool is_empty() const { return area() == 0; }

    bool operator==(const Mask&) const = default;

  private:
    int width_ = 0;
    int height_ = 0;
    Frame frame_ = Frame::original;
    std::vector<std::uint32_t> runs_;
};

} // namespace radmark

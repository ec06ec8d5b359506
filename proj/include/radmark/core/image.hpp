#pragma once

#include "radmark/core/geometry.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace radmark {

enum class Split { train, val, test, unassigned };

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view text);

struct IntensityWindow {
    double center = 0.0;
    double width = 1.0;

    bool operator==(const IntensityWindow&) const = default;
};

// Display metadata carried over from the source file.
struct DisplayHints {
    std::optional<IntensityWindow> window;
    // MONOCHROME1: low stored values render bright.
    bool inverted = false;

    bool operator==(const DisplayHints&) const = default;
};

// One radiograph. Immutable once constructed.
class ImageRecord {
  public:
    ImageRecord(std::string id, int width, int height, int bit_depth, std::vector<std::int32_t> pixels,
                std::optional<PixelSpacing> spacing, DisplayHints hints = {}, Split split = Split::unassigned);

    const std::string& id() const { return id_; }
    int width() const { return width_; }
    int height() const { return height_; }
    int bit_depth() const { return bit_depth_; }
    const std::vector<std::int32_t>& pixels() const { return pixels_; }
    std::int32_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

    // Absent when the source carried no pixel spacing.
    const std::optional<PixelSpacing>& spacing() const { return spacing_; }
    bool calibrated() const { return spacing_.has_value(); }

    const DisplayHints& hints() const { return hints_; }
    Split split() const { return split_; }

    ImageRecord with_split(Split split) const;

  private:
    std::string id_;
    int width_;
    int height_;
    int bit_depth_;
    std::vector<std::int32_t> pixels_;
    std::optional<PixelSpacing> spacing_;
    DisplayHints hints_;
    Split split_;
};

} // namespace radmark

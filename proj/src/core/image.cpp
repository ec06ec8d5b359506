#include "radmark/core/image.hpp"

#include "radmark/error.hpp"

namespace radmark {

std::string_view to_string(Split split) {
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

std::optional<Split> parse_split(std::string_view text) {
    if (text == "train") return Split::train;
    if (text == "val") return Split::val;
    if (text == "test") return Split::test;
    if (text == "unassigned") return Split::unassigned;
    return std::nullopt;
}

ImageRecord::ImageRecord(std::string id, int width, int height, int bit_depth, std::vector<std::int32_t> pixels,
                         std::optional<PixelSpacing> spacing, DisplayHints hints, Split split)
    : id_(std::move(id)), width_(width), height_(height), bit_depth_(bit_depth), pixels_(std::move(pixels)),
      spacing_(spacing), hints_(hints), split_(split) {
    if (width_ <= 0 || height_ <= 0) {
        throw ContractViolation("image record '" + id_ + "': dimensions must be positive");
    }
    if (pixels_.size() != static_cast<std::size_t>(width_) * height_) {
        throw ContractViolation("image record '" + id_ + "': pixel count does not match width * height");
    }
    if (bit_depth_ < 1 || bit_depth_ > 16) {
        throw ContractViolation("image record '" + id_ + "': bit depth must be in 1..16");
    }
    if (spacing_) {
        // Re-validate; throws ConfigError on bad values.
        spacing_ = PixelSpacing::make(spacing_->row_mm, spacing_->col_mm);
    }
}

ImageRecord ImageRecord::with_split(Split split) const {
    ImageRecord copy = *this;
    copy.split_ = split;
    return copy;
}

} // namespace radmark

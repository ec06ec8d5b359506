#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace radmark {

struct Gray8Image {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
};

// Lossless 8-bit grayscale PNG, row-major input.
std::vector<std::uint8_t> encode_png_gray8(int width, int height, std::span<const std::uint8_t> pixels);
Gray8Image decode_png_gray8(std::span<const std::uint8_t> bytes);
void write_png_gray8(const std::filesystem::path& path, int width, int height, std::span<const std::uint8_t> pixels);

} // namespace radmark

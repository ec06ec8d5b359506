#include "radmark/io/png.hpp"

#include "radmark/error.hpp"
#include "radmark/io/files.hpp"

#include <cstring>

#include <png.h>

namespace radmark {

std::vector<std::uint8_t> encode_png_gray8(int width, int height, std::span<const std::uint8_t> pixels) {
    if (width <= 0 || height <= 0 || pixels.size() != static_cast<std::size_t>(width) * height) {
        throw ContractViolation("encode_png_gray8: pixel buffer does not match dimensions");
    }
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = PNG_FORMAT_GRAY;

    png_alloc_size_t size = 0;
    if (!png_image_write_to_memory(&image, nullptr, &size, 0, pixels.data(), 0, nullptr)) {
        throw ServiceError(std::string("PNG encode failed: ") + image.message);
    }
    std::vector<std::uint8_t> out(size);
    if (!png_image_write_to_memory(&image, out.data(), &size, 0, pixels.data(), 0, nullptr)) {
        throw ServiceError(std::string("PNG encode failed: ") + image.message);
    }
    out.resize(size);
    return out;
}

Gray8Image decode_png_gray8(std::span<const std::uint8_t> bytes) {
    png_image image;
    std::memset(&image, 0, sizeof image);
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw IngestionError(std::string("PNG decode failed: ") + image.message);
    }
    image.format = PNG_FORMAT_GRAY;
    Gray8Image out{static_cast<int>(image.width), static_cast<int>(image.height), {}};
    out.pixels.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
        png_image_free(&image);
        throw IngestionError(std::string("PNG decode failed: ") + image.message);
    }
    return out;
}

void write_png_gray8(const std::filesystem::path& path, int width, int height, std::span<const std::uint8_t> pixels) {
    write_file_atomic(path, encode_png_gray8(width, height, pixels));
}

} // namespace radmark

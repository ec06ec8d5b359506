#pragma once

#include "radmark/core/image.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace radmark {

struct DicomLoadResult {
    ImageRecord record;
    // Non-fatal findings, e.g. a missing PixelSpacing attribute.
    std::vector<std::string> warnings;
};

// Reads a single-frame grayscale DICOM file with an uncompressed transfer
// syntax (implicit or explicit VR little endian). The record id defaults to
// the file stem. Throws IngestionError naming the path on corrupt input.
DicomLoadResult load_dicom(const std::filesystem::path& path, std::string id = {});
DicomLoadResult parse_dicom(std::span<const std::uint8_t> bytes, const std::string& id, const std::string& source);

// Writes the record as explicit VR little endian DX. Used by the synthetic
// data generator; output is byte-identical for identical records.
std::vector<std::uint8_t> encode_dicom(const ImageRecord& record);
void write_dicom(const std::filesystem::path& path, const ImageRecord& record);

} // namespace radmark

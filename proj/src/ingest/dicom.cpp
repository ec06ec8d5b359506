#include "radmark/ingest/dicom.hpp"

#include "radmark/core/rng.hpp"
#include "radmark/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <string_view>

namespace radmark {

namespace {

constexpr std::string_view implicit_le_uid = "1.2.840.10008.1.2";
constexpr std::string_view explicit_le_uid = "1.2.840.10008.1.2.1";
constexpr std::string_view dx_presentation_uid = "1.2.840.10008.5.1.4.1.1.1.1";

constexpr std::uint32_t tag(std::uint16_t group, std::uint16_t element) {
    return (static_cast<std::uint32_t>(group) << 16) | element;
}

constexpr std::uint32_t transfer_syntax_tag = tag(0x0002, 0x0010);
constexpr std::uint32_t samples_per_pixel_tag = tag(0x0028, 0x0002);
constexpr std::uint32_t photometric_tag = tag(0x0028, 0x0004);
constexpr std::uint32_t frames_tag = tag(0x0028, 0x0008);
constexpr std::uint32_t rows_tag = tag(0x0028, 0x0010);
constexpr std::uint32_t columns_tag = tag(0x0028, 0x0011);
constexpr std::uint32_t pixel_spacing_tag = tag(0x0028, 0x0030);
constexpr std::uint32_t bits_allocated_tag = tag(0x0028, 0x0100);
constexpr std::uint32_t bits_stored_tag = tag(0x0028, 0x0101);
constexpr std::uint32_t pixel_representation_tag = tag(0x0028, 0x0103);
constexpr std::uint32_t window_center_tag = tag(0x0028, 0x1050);
constexpr std::uint32_t window_width_tag = tag(0x0028, 0x1051);
constexpr std::uint32_t pixel_data_tag = tag(0x7FE0, 0x0010);
constexpr std::uint32_t item_tag = tag(0xFFFE, 0xE000);
constexpr std::uint32_t item_delimiter_tag = tag(0xFFFE, 0xE00D);
constexpr std::uint32_t sequence_delimiter_tag = tag(0xFFFE, 0xE0DD);
constexpr std::uint32_t undefined_length = 0xFFFFFFFFu;

class Cursor {
  public:
    Cursor(std::span<const std::uint8_t> bytes, const std::string& source) : bytes_(bytes), source_(source) {}

    bool at_end() const { return pos_ >= bytes_.size(); }
    std::size_t pos() const { return pos_; }
    void seek(std::size_t pos) { pos_ = pos; }

    std::uint16_t u16() {
        const auto b = take(2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }

    std::uint32_t u32() {
        const auto b = take(4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > bytes_.size() - pos_) {
            throw IngestionError(source_ + ": truncated DICOM data at offset " + std::to_string(pos_));
        }
        auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    const std::string& source() const { return source_; }

  private:
    std::span<const std::uint8_t> bytes_;
    const std::string& source_;
    std::size_t pos_ = 0;
};

struct Element {
    std::uint32_t tag = 0;
    std::array<char, 2> vr{'U', 'N'};
    std::span<const std::uint8_t> value;
    bool undefined_item = false;
};

bool has_long_length(std::array<char, 2> vr) {
    static constexpr std::array<std::string_view, 13> long_vrs{"OB", "OW", "OF", "SQ", "UT", "UN", "OD",
                                                               "OL", "OV", "UC", "UR", "SV", "UV"};
    const std::string_view v(vr.data(), 2);
    return std::find(long_vrs.begin(), long_vrs.end(), v) != long_vrs.end();
}

void skip_sequence(Cursor& c, bool explicit_vr);

// Reads one data element header and value. Undefined-length sequences are
// skipped; the returned value is then empty.
Element read_element(Cursor& c, bool explicit_vr) {
    Element e;
    const std::uint16_t group = c.u16();
    const std::uint16_t element = c.u16();
    e.tag = tag(group, element);

    std::uint32_t length = 0;
    bool nested_explicit = explicit_vr;
    if (group == 0xFFFE) {
        // Item and delimiter tags never carry a VR.
        length = c.u32();
        if (length == undefined_length) {
            e.undefined_item = true;
            return e;
        }
        e.value = c.take(length);
        return e;
    } else if (explicit_vr) {
        const auto vr = c.take(2);
        e.vr = {static_cast<char>(vr[0]), static_cast<char>(vr[1])};
        if (has_long_length(e.vr)) {
            c.take(2);
            length = c.u32();
        } else {
            length = c.u16();
        }
        // An undefined-length UN element holds an implicit VR sequence.
        if (e.vr[0] == 'U' && e.vr[1] == 'N') nested_explicit = false;
    } else {
        length = c.u32();
    }

    if (length == undefined_length) {
        if (e.tag == pixel_data_tag) {
            throw IngestionError(c.source() + ": encapsulated (compressed) pixel data is not supported");
        }
        skip_sequence(c, nested_explicit);
        return e;
    }
    e.value = c.take(length);
    return e;
}

void skip_sequence(Cursor& c, bool explicit_vr) {
    for (;;) {
        const auto item = read_element(c, explicit_vr);
        if (item.tag == sequence_delimiter_tag) return;
        if (item.tag != item_tag) {
            throw IngestionError(c.source() + ": malformed sequence item");
        }
        // Defined-length items were consumed whole by read_element.
        if (item.undefined_item) {
            for (;;) {
                const auto nested = read_element(c, explicit_vr);
                if (nested.tag == item_delimiter_tag) break;
            }
        }
    }
}

std::string_view as_text(std::span<const std::uint8_t> v) {
    std::string_view s(reinterpret_cast<const char*>(v.data()), v.size());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\0')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    return s;
}

std::vector<double> decimal_values(std::span<const std::uint8_t> v, const std::string& source, const char* what) {
    std::vector<double> out;
    auto text = as_text(v);
    while (!text.empty()) {
        const auto sep = text.find('\\');
        auto token = text.substr(0, sep);
        while (!token.empty() && token.front() == ' ') token.remove_prefix(1);
        while (!token.empty() && token.back() == ' ') token.remove_suffix(1);
        if (!token.empty() && token.front() == '+') token.remove_prefix(1);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc{} || ptr != token.data() + token.size()) {
            throw IngestionError(source + ": malformed " + what + " value '" + std::string(token) + "'");
        }
        out.push_back(value);
        if (sep == std::string_view::npos) break;
        text.remove_prefix(sep + 1);
    }
    return out;
}

std::uint16_t us_value(const std::map<std::uint32_t, Element>& elements, std::uint32_t t, const std::string& source,
                       const char* what) {
    const auto it = elements.find(t);
    if (it == elements.end() || it->second.value.size() < 2) {
        throw IngestionError(source + ": missing " + what);
    }
    const auto v = it->second.value;
    return static_cast<std::uint16_t>(v[0] | (v[1] << 8));
}

std::optional<std::uint16_t> optional_us(const std::map<std::uint32_t, Element>& elements, std::uint32_t t) {
    const auto it = elements.find(t);
    if (it == elements.end() || it->second.value.size() < 2) return std::nullopt;
    const auto v = it->second.value;
    return static_cast<std::uint16_t>(v[0] | (v[1] << 8));
}

} // namespace

DicomLoadResult parse_dicom(std::span<const std::uint8_t> bytes, const std::string& id, const std::string& source) {
    Cursor c(bytes, source);
    bool explicit_vr = false;

    if (bytes.size() >= 132 && std::memcmp(bytes.data() + 128, "DICM", 4) == 0) {
        c.seek(132);
        std::string transfer_syntax;
        while (!c.at_end()) {
            const auto start = c.pos();
            if (c.u16() != 0x0002) {
                c.seek(start);
                break;
            }
            c.seek(start);
            const auto e = read_element(c, true);
            if (e.tag == transfer_syntax_tag) transfer_syntax = std::string(as_text(e.value));
        }
        if (transfer_syntax == explicit_le_uid) {
            explicit_vr = true;
        } else if (transfer_syntax == implicit_le_uid) {
            explicit_vr = false;
        } else if (transfer_syntax.empty()) {
            throw IngestionError(source + ": file meta information lacks a transfer syntax");
        } else {
            throw IngestionError(source + ": unsupported transfer syntax " + transfer_syntax);
        }
    } else {
        // Headerless dataset: only accept implicit VR little endian that starts
        // in a plausible group.
        if (bytes.size() < 8 || bytes[0] != 0x08 || bytes[1] != 0x00) {
            throw IngestionError(source + ": not a DICOM file");
        }
    }

    std::map<std::uint32_t, Element> elements;
    while (!c.at_end()) {
        auto e = read_element(c, explicit_vr);
        elements[e.tag] = e;
    }

    if (!elements.contains(pixel_data_tag)) {
        throw IngestionError(source + ": missing pixel data");
    }
    if (auto spp = optional_us(elements, samples_per_pixel_tag); spp && *spp != 1) {
        throw IngestionError(source + ": only single-sample grayscale images are supported");
    }
    std::string photometric = "MONOCHROME2";
    if (auto it = elements.find(photometric_tag); it != elements.end()) {
        photometric = std::string(as_text(it->second.value));
    }
    if (photometric != "MONOCHROME1" && photometric != "MONOCHROME2") {
        throw IngestionError(source + ": unsupported photometric interpretation " + photometric);
    }
    if (auto it = elements.find(frames_tag); it != elements.end()) {
        const auto frames = decimal_values(it->second.value, source, "NumberOfFrames");
        if (!frames.empty() && frames[0] > 1.0) {
            throw IngestionError(source + ": multi-frame images are not supported");
        }
    }

    const int rows = us_value(elements, rows_tag, source, "Rows");
    const int cols = us_value(elements, columns_tag, source, "Columns");
    const int bits_allocated = us_value(elements, bits_allocated_tag, source, "BitsAllocated");
    const int bits_stored = optional_us(elements, bits_stored_tag).value_or(static_cast<std::uint16_t>(bits_allocated));
    const bool is_signed = optional_us(elements, pixel_representation_tag).value_or(0) == 1;
    if (rows <= 0 || cols <= 0) {
        throw IngestionError(source + ": image has zero rows or columns");
    }
    if (bits_allocated != 8 && bits_allocated != 16) {
        throw IngestionError(source + ": unsupported BitsAllocated " + std::to_string(bits_allocated));
    }
    if (bits_stored < 1 || bits_stored > bits_allocated) {
        throw IngestionError(source + ": inconsistent BitsStored " + std::to_string(bits_stored));
    }

    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    const std::size_t bytes_per_pixel = bits_allocated / 8;
    const auto data = elements[pixel_data_tag].value;
    if (data.size() < count * bytes_per_pixel) {
        throw IngestionError(source + ": pixel data is shorter than Rows * Columns (truncated file?)");
    }

    std::vector<std::int32_t> pixels(count);
    const std::uint32_t value_mask = bits_stored >= 32 ? 0xFFFFFFFFu : ((1u << bits_stored) - 1u);
    const std::uint32_t sign_bit = 1u << (bits_stored - 1);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t raw = bytes_per_pixel == 1 ? data[i] : static_cast<std::uint32_t>(data[2 * i] | (data[2 * i + 1] << 8));
        raw &= value_mask;
        std::int32_t v = static_cast<std::int32_t>(raw);
        if (is_signed && (raw & sign_bit)) v -= static_cast<std::int32_t>(value_mask) + 1;
        pixels[i] = v;
    }

    std::vector<std::string> warnings;
    std::optional<PixelSpacing> spacing;
    if (auto it = elements.find(pixel_spacing_tag); it != elements.end() && !as_text(it->second.value).empty()) {
        const auto values = decimal_values(it->second.value, source, "PixelSpacing");
        if (values.size() != 2 || !(values[0] > 0.0) || !(values[1] > 0.0)) {
            warnings.push_back(source + ": invalid PixelSpacing; image treated as uncalibrated");
        } else {
            spacing = PixelSpacing::make(values[0], values[1]);
        }
    } else {
        warnings.push_back(source + ": no PixelSpacing attribute; image is uncalibrated");
    }

    DisplayHints hints;
    hints.inverted = photometric == "MONOCHROME1";
    const auto center_it = elements.find(window_center_tag);
    const auto width_it = elements.find(window_width_tag);
    if (center_it != elements.end() && width_it != elements.end()) {
        const auto centers = decimal_values(center_it->second.value, source, "WindowCenter");
        const auto widths = decimal_values(width_it->second.value, source, "WindowWidth");
        if (!centers.empty() && !widths.empty() && widths[0] >= 1.0) {
            hints.window = IntensityWindow{centers[0], widths[0]};
        }
    }

    return {ImageRecord(id, cols, rows, bits_stored, std::move(pixels), spacing, hints), std::move(warnings)};
}

DicomLoadResult load_dicom(const std::filesystem::path& path, std::string id) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IngestionError(path.string() + ": cannot open file");
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (id.empty()) id = path.stem().string();
    return parse_dicom(bytes, id, path.string());
}

namespace {

class Encoder {
  public:
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v & 0xFF));
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
    }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
    }

    void element(std::uint32_t t, std::string_view vr, std::span<const std::uint8_t> value) {
        u16(static_cast<std::uint16_t>(t >> 16));
        u16(static_cast<std::uint16_t>(t & 0xFFFF));
        out_.push_back(static_cast<std::uint8_t>(vr[0]));
        out_.push_back(static_cast<std::uint8_t>(vr[1]));
        const std::array<char, 2> v{vr[0], vr[1]};
        if (has_long_length(v)) {
            u16(0);
            u32(static_cast<std::uint32_t>(value.size()));
        } else {
            u16(static_cast<std::uint16_t>(value.size()));
        }
        out_.insert(out_.end(), value.begin(), value.end());
    }

    void text(std::uint32_t t, std::string_view vr, std::string value) {
        if (value.size() % 2 == 1) value.push_back(vr == "UI" ? '\0' : ' ');
        element(t, vr, std::span(reinterpret_cast<const std::uint8_t*>(value.data()), value.size()));
    }

    void us(std::uint32_t t, std::uint16_t v) {
        const std::array<std::uint8_t, 2> b{static_cast<std::uint8_t>(v & 0xFF), static_cast<std::uint8_t>(v >> 8)};
        element(t, "US", b);
    }

    std::vector<std::uint8_t>& bytes() { return out_; }

  private:
    std::vector<std::uint8_t> out_;
};

std::string decimal_string(double v) {
    std::array<char, 32> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    std::string s(buf.data(), ptr);
    if (s.size() > 16) {
        std::snprintf(buf.data(), buf.size(), "%.10g", v);
        s = buf.data();
    }
    return s;
}

} // namespace

std::vector<std::uint8_t> encode_dicom(const ImageRecord& record) {
    const int bits = record.bit_depth();
    const int allocated = bits <= 8 ? 8 : 16;
    for (const auto v : record.pixels()) {
        if (v < 0 || v >= (1 << bits)) {
            throw ContractViolation("encode_dicom: pixel value outside the unsigned " + std::to_string(bits) + "-bit range");
        }
    }
    const std::string instance_uid = "2.25." + std::to_string(derive_seed(0x5241444d41524bULL, record.id()));

    Encoder meta;
    meta.element(tag(0x0002, 0x0001), "OB", std::array<std::uint8_t, 2>{0, 1});
    meta.text(tag(0x0002, 0x0002), "UI", std::string(dx_presentation_uid));
    meta.text(tag(0x0002, 0x0003), "UI", instance_uid);
    meta.text(tag(0x0002, 0x0010), "UI", std::string(explicit_le_uid));
    meta.text(tag(0x0002, 0x0012), "UI", "2.25.1234567890");

    Encoder ds;
    ds.text(tag(0x0008, 0x0016), "UI", std::string(dx_presentation_uid));
    ds.text(tag(0x0008, 0x0018), "UI", instance_uid);
    ds.text(tag(0x0008, 0x0060), "CS", "DX");
    ds.text(tag(0x0010, 0x0020), "LO", record.id());
    ds.us(samples_per_pixel_tag, 1);
    ds.text(photometric_tag, "CS", record.hints().inverted ? "MONOCHROME1" : "MONOCHROME2");
    ds.us(rows_tag, static_cast<std::uint16_t>(record.height()));
    ds.us(columns_tag, static_cast<std::uint16_t>(record.width()));
    if (record.spacing()) {
        ds.text(pixel_spacing_tag, "DS",
                decimal_string(record.spacing()->row_mm) + "\\" + decimal_string(record.spacing()->col_mm));
    }
    ds.us(bits_allocated_tag, static_cast<std::uint16_t>(allocated));
    ds.us(bits_stored_tag, static_cast<std::uint16_t>(bits));
    ds.us(tag(0x0028, 0x0102), static_cast<std::uint16_t>(bits - 1));
    ds.us(pixel_representation_tag, 0);
    if (record.hints().window) {
        ds.text(window_center_tag, "DS", decimal_string(record.hints().window->center));
        ds.text(window_width_tag, "DS", decimal_string(record.hints().window->width));
    }
    std::vector<std::uint8_t> pixel_bytes;
    pixel_bytes.reserve(record.pixels().size() * (allocated / 8) + 1);
    for (const auto v : record.pixels()) {
        pixel_bytes.push_back(static_cast<std::uint8_t>(v & 0xFF));
        if (allocated == 16) pixel_bytes.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    }
    if (pixel_bytes.size() % 2 == 1) pixel_bytes.push_back(0);
    ds.element(pixel_data_tag, allocated == 8 ? "OB" : "OW", pixel_bytes);

    static constexpr std::array<std::uint8_t, 4> magic{'D', 'I', 'C', 'M'};
    std::vector<std::uint8_t> out;
    out.reserve(132 + meta.bytes().size() + ds.bytes().size() + 12);
    out.resize(128, 0);
    out.insert(out.end(), magic.begin(), magic.end());
    Encoder group_length;
    const auto meta_len = static_cast<std::uint32_t>(meta.bytes().size());
    group_length.element(tag(0x0002, 0x0000), "UL",
                         std::array<std::uint8_t, 4>{static_cast<std::uint8_t>(meta_len & 0xFF),
                                                     static_cast<std::uint8_t>((meta_len >> 8) & 0xFF),
                                                     static_cast<std::uint8_t>((meta_len >> 16) & 0xFF),
                                                     static_cast<std::uint8_t>((meta_len >> 24) & 0xFF)});
    out.insert(out.end(), group_length.bytes().begin(), group_length.bytes().end());
    out.insert(out.end(), meta.bytes().begin(), meta.bytes().end());
    out.insert(out.end(), ds.bytes().begin(), ds.bytes().end());
    return out;
}

void write_dicom(const std::filesystem::path& path, const ImageRecord& record) {
    const auto bytes = encode_dicom(record);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IngestionError(path.string() + ": cannot open for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw IngestionError(path.string() + ": write failed");
    }
}

} // namespace radmark

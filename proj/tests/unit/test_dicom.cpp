#include "radmark/error.hpp"
#include "radmark/ingest/dicom.hpp"
#include "support/helpers.hpp"

#include <doctest.h>

#include <fstream>

using namespace radmark;

namespace {

const std::filesystem::path data_dir(RADMARK_TEST_DATA);

ImageRecord make_record(int w, int h, int bits, std::optional<PixelSpacing> spacing) {
    std::vector<std::int32_t> px(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < px.size(); ++i) px[i] = static_cast<std::int32_t>((i * 2654435761u) % (1u << bits));
    return ImageRecord("rt", w, h, bits, std::move(px), spacing);
}

} // namespace

TEST_CASE("write-then-read round-trip of a 512x512 image with spacing 0.2") {
    testing::TempDir dir;
    const auto rec = make_record(512, 512, 12, PixelSpacing::isotropic(0.2));
    write_dicom(dir / "a.dcm", rec);
    const auto loaded = load_dicom(dir / "a.dcm");
    CHECK(loaded.warnings.empty());
    CHECK(loaded.record.id() == "a");
    CHECK(loaded.record.width() == 512);
    CHECK(loaded.record.height() == 512);
    CHECK(loaded.record.bit_depth() == 12);
    REQUIRE(loaded.record.spacing().has_value());
    CHECK(*loaded.record.spacing() == PixelSpacing::isotropic(0.2));
    CHECK(loaded.record.pixels() == rec.pixels());
}

TEST_CASE("anisotropic spacing and 16-bit data survive the round-trip") {
    const auto rec = make_record(33, 17, 16, PixelSpacing::make(0.3, 0.15));
    const auto bytes = encode_dicom(rec);
    const auto loaded = parse_dicom(bytes, "rt", "<memory>");
    REQUIRE(loaded.record.spacing().has_value());
    CHECK(loaded.record.spacing()->row_mm == 0.3);
    CHECK(loaded.record.spacing()->col_mm == 0.15);
    CHECK(loaded.record.pixels() == rec.pixels());
    CHECK(encode_dicom(loaded.record.with_split(Split::unassigned)) == bytes);
}

TEST_CASE("missing PixelSpacing gives an uncalibrated record and a warning") {
    const auto rec = make_record(8, 8, 8, std::nullopt);
    const auto loaded = parse_dicom(encode_dicom(rec), "x", "<memory>");
    CHECK_FALSE(loaded.record.calibrated());
    CHECK(loaded.warnings.size() == 1);
}

TEST_CASE("truncated and non-DICOM input") {
    const auto bytes = encode_dicom(make_record(64, 64, 12, PixelSpacing::isotropic(0.5)));
    for (std::size_t cut : {std::size_t{10}, std::size_t{140}, bytes.size() / 2, bytes.size() - 1}) {
        std::vector<std::uint8_t> head(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
        CHECK_THROWS_AS(parse_dicom(head, "x", "trunc.dcm"), IngestionError);
    }
    testing::TempDir dir;
    std::ofstream(dir / "junk.dcm") << "not a dicom file at all";
    try {
        load_dicom(dir / "junk.dcm");
        FAIL("expected ingestion error");
    } catch (const IngestionError& e) {
        CHECK(std::string(e.what()).find("junk.dcm") != std::string::npos);
    }
    CHECK_THROWS_AS(load_dicom(dir / "absent.dcm"), IngestionError);
}

// Files written by an independent DICOM toolkit.
TEST_CASE("third-party fixtures") {
    const auto with = load_dicom(data_dir / "gdcm_spacing.dcm");
    CHECK(with.record.calibrated());
    CHECK(with.warnings.empty());
    const auto without = load_dicom(data_dir / "gdcm_no_spacing.dcm");
    CHECK_FALSE(without.record.calibrated());
    CHECK_FALSE(without.warnings.empty());
    CHECK(with.record.width() == without.record.width());
    CHECK(with.record.pixels() == without.record.pixels());
    CHECK(with.record.width() == 8);
    CHECK(with.record.height() == 4);
    CHECK(with.record.bit_depth() == 12);
    CHECK(*with.record.spacing() == PixelSpacing::make(0.2, 0.3));
    CHECK(with.record.pixels().front() == 0);
    CHECK(with.record.pixels().back() == 3100);
}

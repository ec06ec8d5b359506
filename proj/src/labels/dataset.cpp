#include "radmark/labels/dataset.hpp"

#include "radmark/error.hpp"
#include "radmark/io/files.hpp"
#include "radmark/io/png.hpp"
#include "radmark/labels/export.hpp"

#include <sstream>

namespace radmark {

std::vector<std::string> write_dataset_entry(const std::filesystem::path& root, const NormalizedImage& image,
                                             const LabelBundle& bundle) {
    if (bundle.frame != Frame::model || bundle.width != image.width || bundle.height != image.height) {
        throw ContractViolation("dataset entry '" + bundle.image_id + "': bundle is not on the model canvas");
    }
    const std::string split(to_string(bundle.split));
    const auto images = root / "images" / split;
    const auto labels = root / "labels" / split;
    const auto polygons = root / "polygons" / split;
    std::error_code ec;
    for (const auto& dir : {images, labels, polygons}) {
        std::filesystem::create_directories(dir, ec);
        if (ec) throw ServiceError(dir.string() + ": " + ec.message());
    }
    write_png_gray8(images / (bundle.image_id + ".png"), image.width, image.height, image.intensities);
    auto boxes = export_detection_labels(bundle, LabelFormat::box);
    auto polys = export_detection_labels(bundle, LabelFormat::polygon);
    write_text_file_atomic(labels / (bundle.image_id + ".txt"), boxes.text);
    write_text_file_atomic(polygons / (bundle.image_id + ".txt"), polys.text);
    boxes.warnings.insert(boxes.warnings.end(), polys.warnings.begin(), polys.warnings.end());
    return boxes.warnings;
}

std::string dataset_yaml(const ClassRegistry& registry, int model_side) {
    std::ostringstream os;
    os << "# Generated by radmark labels\n"
       << "path: .\n"
       << "train: images/train\n"
       << "val: images/val\n"
       << "test: images/test\n"
       << "imgsz: " << model_side << "\n"
       << "nc: " << registry.size() << "\n"
       << "names:\n";
    for (const auto& c : registry.classes()) {
        os << "  " << index_of(c.id) << ": \"" << c.code << "\"\n";
    }
    os << "augmentation:\n"
       << "  hsv_v: 0.4       # brightness\n"
       << "  contrast: 0.3\n"
       << "  translate: 0.1\n"
       << "  scale: 0.2\n"
       << "  degrees: 10.0\n"
       << "  shear: 0.0\n"
       << "  fliplr: 0.0      # left/right classes must not swap\n"
       << "  flipud: 0.0\n"
       << "  mosaic: 0.0\n";
    return os.str();
}

void write_dataset_yaml(const std::filesystem::path& root, const ClassRegistry& registry, int model_side) {
    std::error_code ec;
    std::filesystem::create_directories(root, ec);
    if (ec) throw ServiceError(root.string() + ": " + ec.message());
    write_text_file_atomic(root / "dataset.yaml", dataset_yaml(registry, model_side));
}

} // namespace radmark

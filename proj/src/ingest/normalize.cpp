#include "radmark/ingest/normalize.hpp"

#include "radmark/error.hpp"
#include "radmark/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace radmark {

namespace {

struct WindowChoice {
    kernels::Window window;
    bool degenerate = false;
};

WindowChoice choose_window(const ImageRecord& record) {
    const auto range = kernels::omp::intensity_range(record.pixels());
    if (range.min == range.max) {
        return {{}, true};
    }
    kernels::Window w{static_cast<double>(range.min), static_cast<double>(range.max), record.hints().inverted};
    if (const auto& dw = record.hints().window; dw && dw->width > 0.0) {
        w.low = dw->center - dw->width / 2.0;
        w.high = dw->center + dw->width / 2.0;
    }
    return {w, false};
}

} // namespace

Letterbox compute_letterbox(int width, int height, int side) {
    if (side <= 0) {
        throw ConfigError("target side must be positive, got " + std::to_string(side));
    }
    if (width <= 0 || height <= 0) {
        throw ContractViolation("letterbox of an empty image");
    }
    const double scale = static_cast<double>(side) / std::max(width, height);
    const int content_w = std::clamp(static_cast<int>(std::lround(width * scale)), 1, side);
    const int content_h = std::clamp(static_cast<int>(std::lround(height * scale)), 1, side);
    const int pad_x = (side - content_w) / 2;
    const int pad_y = (side - content_h) / 2;
    Letterbox lb;
    lb.transform = GeometryTransform(static_cast<double>(content_w) / width, static_cast<double>(content_h) / height,
                                     pad_x, pad_y);
    lb.side = side;
    lb.content_x0 = pad_x;
    lb.content_y0 = pad_y;
    lb.content_x1 = pad_x + content_w;
    lb.content_y1 = pad_y + content_h;
    return lb;
}

NormalizedImage normalize_image(const ImageRecord& record, int target_side) {
    const auto lb = compute_letterbox(record.width(), record.height(), target_side);
    NormalizedImage out;
    out.image_id = record.id();
    out.width = target_side;
    out.height = target_side;
    out.transform = lb.transform;
    out.intensities.assign(static_cast<std::size_t>(target_side) * target_side, 0);

    const auto choice = choose_window(record);
    if (choice.degenerate) {
        out.degenerate = true;
        return out;
    }
    const auto& t = lb.transform;
    const kernels::AxisMap model_to_original{1.0 / t.scale_x(), 1.0 / t.scale_y(), -t.pad_x() / t.scale_x(),
                                             -t.pad_y() / t.scale_y()};
    kernels::omp::resample_intensity(record.pixels(), {record.width(), record.height()}, out.intensities,
                                     {target_side, target_side}, model_to_original,
                                     {lb.content_x0, lb.content_y0, lb.content_x1, lb.content_y1}, choice.window);
    return out;
}

std::vector<std::uint8_t> render_original(const ImageRecord& record) {
    std::vector<std::uint8_t> out(record.pixels().size(), 0);
    const auto choice = choose_window(record);
    if (choice.degenerate) return out;
    const kernels::Grid g{record.width(), record.height()};
    kernels::omp::resample_intensity(record.pixels(), g, out, g, {}, {0, 0, g.width, g.height}, choice.window);
    return out;
}

} // namespace radmark

#include "radmark/core/mask_transform.hpp"

#include "radmark/error.hpp"
#include "radmark/kernels/kernels.hpp"

#include <string>

namespace radmark {

namespace {

void require_frame(const Mask& m, Frame expected) {
    if (m.frame() != expected) {
        throw ContractViolation("mask in " + std::string(to_string(m.frame())) + " frame, expected " +
                                std::string(to_string(expected)));
    }
}

Mask resample(const Mask& src, Frame dst_frame, int w, int h, kernels::AxisMap map) {
    const auto dense = src.decode();
    DenseMask out(w, h, dst_frame);
    kernels::omp::resample_nearest(dense.data(), {src.width(), src.height()}, out.data(), {w, h}, map);
    return Mask::encode(out);
}

} // namespace

Mask mask_to_model_frame(const Mask& original, const GeometryTransform& t, int model_width, int model_height) {
    require_frame(original, Frame::original);
    return resample(original, Frame::model, model_width, model_height,
                    {1.0 / t.scale_x(), 1.0 / t.scale_y(), -t.pad_x() / t.scale_x(), -t.pad_y() / t.scale_y()});
}

Mask mask_to_original_frame(const Mask& model, const GeometryTransform& t, int original_width, int original_height) {
    require_frame(model, Frame::model);
    return resample(model, Frame::original, original_width, original_height,
                    {t.scale_x(), t.scale_y(), t.pad_x(), t.pad_y()});
}

} // namespace radmark

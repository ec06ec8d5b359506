#include "radmark/core/geometry.hpp"

#include "radmark/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace radmark {

namespace {

void require_frame(Frame actual, Frame expected, const char* what) {
    if (actual != expected) {
        std::ostringstream os;
        os << what << ": expected " << to_string(expected) << " frame, got " << to_string(actual);
        throw ContractViolation(os.str());
    }
}

void require_finite(const PointPx& p, const char* what) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ContractViolation(std::string(what) + ": non-finite point");
    }
}

} // namespace

std::string_view to_string(Frame frame) {
    return frame == Frame::original ? "original" : "model";
}

BBox::BBox(double x_min, double y_min, double x_max, double y_max, Frame frame)
    : x_min_(x_min), y_min_(y_min), x_max_(x_max), y_max_(y_max), frame_(frame) {
    if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) && std::isfinite(y_max))) {
        throw ContractViolation("bbox: non-finite coordinate");
    }
    if (!(x_min < x_max) || !(y_min < y_max)) {
        std::ostringstream os;
        os << "bbox: degenerate box (" << x_min << ", " << y_min << ", " << x_max << ", " << y_max << ")";
        throw ContractViolation(os.str());
    }
}

double box_iou(const BBox& a, const BBox& b) {
    require_frame(b.frame(), a.frame(), "box_iou");
    const double ix = std::max(0.0, std::min(a.x_max(), b.x_max()) - std::max(a.x_min(), b.x_min()));
    const double iy = std::max(0.0, std::min(a.y_max(), b.y_max()) - std::max(a.y_min(), b.y_min()));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

PixelSpacing PixelSpacing::make(double row_mm, double col_mm) {
    if (!(std::isfinite(row_mm) && std::isfinite(col_mm)) || row_mm <= 0.0 || col_mm <= 0.0) {
        std::ostringstream os;
        os << "pixel spacing must be finite and positive, got (" << row_mm << ", " << col_mm << ")";
        throw ConfigError(os.str());
    }
    return PixelSpacing{row_mm, col_mm};
}

GeometryTransform::GeometryTransform(double scale_x, double scale_y, double pad_x, double pad_y)
    : scale_x_(scale_x), scale_y_(scale_y), pad_x_(pad_x), pad_y_(pad_y) {
    if (!(std::isfinite(scale_x) && std::isfinite(scale_y) && scale_x > 0.0 && scale_y > 0.0)) {
        throw ContractViolation("geometry transform: scales must be finite and positive");
    }
    if (!(std::isfinite(pad_x) && std::isfinite(pad_y))) {
        throw ContractViolation("geometry transform: non-finite padding");
    }
}

bool GeometryTransform::is_identity() const {
    return scale_x_ == 1.0 && scale_y_ == 1.0 && pad_x_ == 0.0 && pad_y_ == 0.0;
}

PointPx to_model_frame(const PointPx& p, const GeometryTransform& t) {
    require_frame(p.frame, Frame::original, "to_model_frame");
    require_finite(p, "to_model_frame");
    return {p.x * t.scale_x() + t.pad_x(), p.y * t.scale_y() + t.pad_y(), Frame::model};
}

PointPx to_original_frame(const PointPx& p, const GeometryTransform& t) {
    require_frame(p.frame, Frame::model, "to_original_frame");
    require_finite(p, "to_original_frame");
    return {(p.x - t.pad_x()) / t.scale_x(), (p.y - t.pad_y()) / t.scale_y(), Frame::original};
}

BBox to_model_frame(const BBox& b, const GeometryTransform& t) {
    require_frame(b.frame(), Frame::original, "to_model_frame");
    const auto lo = to_model_frame(PointPx{b.x_min(), b.y_min(), Frame::original}, t);
    const auto hi = to_model_frame(PointPx{b.x_max(), b.y_max(), Frame::original}, t);
    return BBox(lo.x, lo.y, hi.x, hi.y, Frame::model);
}

BBox to_original_frame(const BBox& b, const GeometryTransform& t) {
    require_frame(b.frame(), Frame::model, "to_original_frame");
    const auto lo = to_original_frame(PointPx{b.x_min(), b.y_min(), Frame::model}, t);
    const auto hi = to_original_frame(PointPx{b.x_max(), b.y_max(), Frame::model}, t);
    return BBox(lo.x, lo.y, hi.x, hi.y, Frame::original);
}

PixelSpacing model_frame_spacing(const PixelSpacing& original, const GeometryTransform& t) {
    return PixelSpacing::make(original.row_mm / t.scale_y(), original.col_mm / t.scale_x());
}

double px_to_mm(double distance_px, double spacing_mm) {
    if (!std::isfinite(spacing_mm) || spacing_mm <= 0.0) {
        throw ConfigError("px_to_mm: spacing must be finite and positive");
    }
    return distance_px * spacing_mm;
}

double displacement_mm(double dx_px, double dy_px, const PixelSpacing& spacing) {
    return std::hypot(px_to_mm(dx_px, spacing.col_mm), px_to_mm(dy_px, spacing.row_mm));
}

} // namespace radmark

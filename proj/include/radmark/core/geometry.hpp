#pragma once

#include <string_view>

namespace radmark {

// Every geometric value records the pixel grid it lives on. Operations check
// the tag and refuse to reinterpret values silently.
enum class Frame : unsigned char { original, model };

std::string_view to_string(Frame frame);

struct PointPx {
    double x = 0.0;
    double y = 0.0;
    Frame frame = Frame::original;

    bool operator==(const PointPx&) const = default;
};

// Axis-aligned box with x_min < x_max and y_min < y_max.
class BBox {
  public:
    BBox(double x_min, double y_min, double x_max, double y_max, Frame frame);

    double x_min() const { return x_min_; }
    double y_min() const { return y_min_; }
    double x_max() const { return x_max_; }
    double y_max() const { return y_max_; }
    Frame frame() const { return frame_; }

    double width() const { return x_max_ - x_min_; }
    double height() const { return y_max_ - y_min_; }
    double area() const { return width() * height(); }

    bool operator==(const BBox&) const = default;

  private:
    double x_min_;
    double y_min_;
    double x_max_;
    double y_max_;
    Frame frame_;
};

// Intersection-over-union of two boxes in the same frame.
double box_iou(const BBox& a, const BBox& b);

// Millimetres per pixel. Rows advance along y, columns along x.
struct PixelSpacing {
    double row_mm = 1.0;
    double col_mm = 1.0;

    // Throws ConfigError unless both components are finite and > 0.
    static PixelSpacing make(double row_mm, double col_mm);
    static PixelSpacing isotropic(double mm) { return make(mm, mm); }

    bool operator==(const PixelSpacing&) const = default;
};

// model = original * scale + pad, per axis.
class GeometryTransform {
  public:
    GeometryTransform() = default;
    GeometryTransform(double scale_x, double scale_y, double pad_x, double pad_y);

    static GeometryTransform identity() { return {}; }

    double scale_x() const { return scale_x_; }
    double scale_y() const { return scale_y_; }
    double pad_x() const { return pad_x_; }
    double pad_y() const { return pad_y_; }

    bool is_identity() const;

    bool operator==(const GeometryTransform&) const = default;

  private:
    double scale_x_ = 1.0;
    double scale_y_ = 1.0;
    double pad_x_ = 0.0;
    double pad_y_ = 0.0;
};

PointPx to_model_frame(const PointPx& p, const GeometryTransform& t);
PointPx to_original_frame(const PointPx& p, const GeometryTransform& t);
BBox to_model_frame(const BBox& b, const GeometryTransform& t);
BBox to_original_frame(const BBox& b, const GeometryTransform& t);

// Spacing of the model grid: one model pixel covers 1/scale original pixels.
PixelSpacing model_frame_spacing(const PixelSpacing& original, const GeometryTransform& t);

double px_to_mm(double distance_px, double spacing_mm);

// Euclidean length of a pixel displacement, scaled per axis before the norm.
double displacement_mm(double dx_px, double dy_px, const PixelSpacing& spacing);

} // namespace radmark

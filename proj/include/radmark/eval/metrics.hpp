#pragma once

#include "radmark/core/geometry.hpp"
#include "radmark/core/mask.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

namespace radmark {

// Euclidean norm of the per-axis mm displacement. Both points must be in the
// original frame.
double point_error_mm(const PointPx& pred, const PointPx& gt, const PixelSpacing& spacing);

struct PointError {
    double value = 0.0;
    // False: value is in pixels and must stay out of mm aggregates.
    bool calibrated = true;
};

PointError point_error(const PointPx& pred, const PointPx& gt, const std::optional<PixelSpacing>& spacing);

struct IouResult {
    double value = 0.0;
    // Both masks empty; value is defined as 1.
    bool both_empty = false;
};

// Throws ContractViolation on a size or frame mismatch.
IouResult mask_iou(const Mask& a, const Mask& b);

enum class StdMode { population, sample };

std::string_view to_string(StdMode mode);
std::optional<StdMode> parse_std_mode(std::string_view text);

struct Aggregate {
    double median = 0.0;
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
    bool operator==(const Aggregate&) const = default;
};

// nullopt for an empty list. Median averages the two middle values for even
// counts. Sample std of a single value is 0.
std::optional<Aggregate> aggregate(std::span<const double> values, StdMode mode = StdMode::population);

// identified / total. Throws ContractViolation when total is 0.
double detection_rate(std::size_t identified, std::size_t total);

inline constexpr double default_acceptability_mm = 3.0;

// Fraction of errors strictly below the threshold; nullopt for no errors.
std::optional<double> acceptability(std::span<const double> errors_mm,
                                    double threshold_mm = default_acceptability_mm);

} // namespace radmark

#include "radmark/eval/metrics.hpp"

#include "radmark/error.hpp"
#include "radmark/kernels/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace radmark {

namespace {

void require_original(const PointPx& p, const char* which) {
    if (p.frame != Frame::original) {
        throw ContractViolation(std::string("point error: ") + which + " point is not in the original frame");
    }
}

} // namespace

double point_error_mm(const PointPx& pred, const PointPx& gt, const PixelSpacing& spacing) {
    require_original(pred, "predicted");
    require_original(gt, "ground-truth");
    return displacement_mm(pred.x - gt.x, pred.y - gt.y, spacing);
}

PointError point_error(const PointPx& pred, const PointPx& gt, const std::optional<PixelSpacing>& spacing) {
    if (spacing) return {point_error_mm(pred, gt, *spacing), true};
    require_original(pred, "predicted");
    require_original(gt, "ground-truth");
    return {std::hypot(pred.x - gt.x, pred.y - gt.y), false};
}

IouResult mask_iou(const Mask& a, const Mask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw ContractViolation("iou: mask sizes differ");
    }
    if (a.frame() != b.frame()) {
        throw ContractViolation("iou: mask frames differ");
    }
    const auto da = a.decode(), db = b.decode();
    const auto o = kernels::omp::overlap(da.data(), db.data());
    if (o.union_count == 0) return {1.0, true};
    return {static_cast<double>(o.intersection) / static_cast<double>(o.union_count), false};
}

std::string_view to_string(StdMode mode) { return mode == StdMode::population ? "population" : "sample"; }

std::optional<StdMode> parse_std_mode(std::string_view text) {
    if (text == "population") return StdMode::population;
    if (text == "sample") return StdMode::sample;
    return std::nullopt;
}

std::optional<Aggregate> aggregate(std::span<const double> values, StdMode mode) {
    if (values.empty()) return std::nullopt;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    Aggregate a;
    a.count = n;
    a.median = n % 2 == 1 ? sorted[n / 2] : (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
    double sum = 0.0;
    for (const double v : values) sum += v;
    a.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (const double v : values) ss += (v - a.mean) * (v - a.mean);
    const double denom = mode == StdMode::population ? static_cast<double>(n) : static_cast<double>(n - 1);
    a.std = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
    return a;
}

double detection_rate(std::size_t identified, std::size_t total) {
    if (total == 0) throw ContractViolation("detection rate over zero classes");
    if (identified > total) throw ContractViolation("detection rate: identified exceeds total");
    return static_cast<double>(identified) / static_cast<double>(total);
}

std::optional<double> acceptability(std::span<const double> errors_mm, double threshold_mm) {
    if (errors_mm.empty()) return std::nullopt;
    const auto below = std::count_if(errors_mm.begin(), errors_mm.end(), [&](double e) { return e < threshold_mm; });
    return static_cast<double>(below) / static_cast<double>(errors_mm.size());
}

} // namespace radmark

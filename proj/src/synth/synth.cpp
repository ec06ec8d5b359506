#include "radmark/synth/synth.hpp"

#include "radmark/core/rng.hpp"
#include "radmark/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace radmark {

namespace {

constexpr double pi = std::numbers::pi;

struct Uv {
    double u = 0.0;
    double v = 0.0;
};

// Code without the laterality suffix, so both sides share a canonical spot.
std::string base_code(const std::string& code) {
    if (code.size() > 2 && (code.ends_with("_r") || code.ends_with("_l"))) return code.substr(0, code.size() - 2);
    return code;
}

// Two stable uniforms per code, independent of the run seed.
Uv code_hash(const std::string& base) {
    auto rng = make_rng(0x5eedca11ULL, base);
    const double a = uniform01(rng);
    const double b = uniform01(rng);
    return {a, b};
}

constexpr Uv femoral_head{0.30, 0.62};
constexpr double head_radius = 0.065;
constexpr Uv ball{0.50, 0.84};
constexpr double ball_radius = 0.035;

// Canonical landmark position for the right side.
Uv landmark_position(const FeatureClass& c) {
    const auto base = base_code(c.code);
    if (base == "F23") return femoral_head;
    if (base == "F24") return {0.36, 0.67};
    if (base == "A01") return {0.33, 0.548};
    if (base == "A02") return {0.245, 0.548};
    const auto h = code_hash(base);
    if (c.group == Group::femora) return {0.16 + 0.28 * h.u, 0.56 + 0.34 * h.v};
    return {0.10 + 0.34 * h.u, 0.12 + 0.40 * h.v};
}

struct Affine {
    double scale = 1.0;
    double du = 0.0;
    double dv = 0.0;
    Uv apply(Uv p) const { return {0.5 + (p.u - 0.5) * scale + du, 0.5 + (p.v - 0.5) * scale + dv}; }
};

class Placer {
  public:
    Placer(const SynthConfig& cfg, Affine aff, Rng& rng) : cfg_(cfg), aff_(aff), rng_(rng) {}

    PointPx point(Uv p, Side side, bool jitter = true) {
        if (side == Side::left) p.u = 1.0 - p.u;
        p = aff_.apply(p);
        if (jitter) {
            p.u += cfg_.feature_jitter * standard_normal(rng_);
            p.v += cfg_.feature_jitter * standard_normal(rng_);
        }
        p.u = std::clamp(p.u, 0.04, 0.96);
        p.v = std::clamp(p.v, 0.04, 0.96);
        return {p.u * cfg_.width, p.v * cfg_.height, Frame::original};
    }

    double scale() const { return aff_.scale; }

  private:
    const SynthConfig& cfg_;
    Affine aff_;
    Rng& rng_;
};

std::vector<PointPx> outline_points(const FeatureClass& c, Placer& placer) {
    const auto base = base_code(c.code);
    std::vector<PointPx> pts;
    if (c.side == Side::none) {
        // Arc across the pelvic inlet.
        for (int i = 0; i < 7; ++i) {
            const double a = pi * (0.15 + 0.7 * i / 6.0);
            pts.push_back(placer.point({0.5 + 0.16 * std::cos(a), 0.30 + 0.12 * std::sin(a)}, Side::none, false));
        }
        return pts;
    }
    const auto h = code_hash(base);
    const Uv center{0.16 + 0.24 * h.u, 0.18 + 0.62 * h.v};
    const double radius = 0.04 + 0.05 * h.v;
    const double a0 = 2.0 * pi * h.u;
    for (int i = 0; i < 5; ++i) {
        const double a = a0 + 0.8 * pi * i / 4.0;
        pts.push_back(placer.point({center.u + radius * std::cos(a), center.v + radius * std::sin(a)}, c.side, false));
    }
    return pts;
}

std::vector<PointPx> patch_vertices(const FeatureClass& c, Placer& placer) {
    const auto base = base_code(c.code);
    std::vector<PointPx> pts;
    if (base == "P02") {
        for (int i = 0; i < 16; ++i) {
            const double a = 2.0 * pi * i / 16.0;
            pts.push_back(placer.point({ball.u + ball_radius * std::cos(a), ball.v + ball_radius * std::sin(a)},
                                       Side::none, false));
        }
        return pts;
    }
    if (base == "P01") {
        // Cortex of the proximal shaft, a slanted convex quadrilateral.
        for (const Uv p : {Uv{0.27, 0.74}, Uv{0.35, 0.73}, Uv{0.36, 0.94}, Uv{0.29, 0.95}}) {
            pts.push_back(placer.point(p, c.side, false));
        }
        return pts;
    }
    const auto h = code_hash(base);
    const Uv center{0.15 + 0.25 * h.u, 0.20 + 0.60 * h.v};
    for (int i = 0; i < 10; ++i) {
        const double a = 2.0 * pi * i / 10.0;
        pts.push_back(placer.point({center.u + 0.03 * std::cos(a), center.v + 0.02 * std::sin(a)}, c.side, false));
    }
    return pts;
}

double inside_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
    const double dx = (x - cx) / rx, dy = (y - cy) / ry;
    return dx * dx + dy * dy;
}

std::vector<std::int32_t> render(const SynthConfig& cfg, const Affine& aff, Rng& rng) {
    const int w = cfg.width, h = cfg.height;
    const std::int32_t max_value = (1 << cfg.bit_depth) - 1;
    const double s = aff.scale;
    auto to_px = [&](Uv p) { return Uv{aff.apply(p).u * w, aff.apply(p).v * h}; };
    const auto head_r = to_px(femoral_head);
    const auto head_l = to_px({1.0 - femoral_head.u, femoral_head.v});
    const auto ring = to_px({0.5, 0.42});
    const auto ball_c = to_px(ball);
    const double unit = std::min(w, h);
    const double intensity_scale = max_value / 4095.0;

    std::vector<std::int32_t> pixels(static_cast<std::size_t>(w) * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double px = x + 0.5, py = y + 0.5;
            double v = 300.0;
            if (inside_ellipse(px, py, w * 0.5, h * 0.55, w * 0.46 * s, h * 0.48 * s) <= 1.0) v = 900.0;
            const double r = inside_ellipse(px, py, ring.u, ring.v, unit * 0.30 * s, unit * 0.24 * s);
            if (r <= 1.0 && r >= 0.55) v = 1600.0;
            for (const auto& head : {head_r, head_l}) {
                if (inside_ellipse(px, py, head.u, head.v, unit * head_radius * s, unit * head_radius * s) <= 1.0) {
                    v = 2200.0;
                }
                if (std::abs(px - head.u - (head.u < w * 0.5 ? 0.03 : -0.03) * unit) < unit * 0.035 * s &&
                    py > head.v && py < h * 0.98) {
                    v = std::max(v, 2000.0);
                }
            }
            if (inside_ellipse(px, py, ball_c.u, ball_c.v, unit * ball_radius * s, unit * ball_radius * s) <= 1.0) {
                v = 3500.0;
            }
            v = v * intensity_scale + 25.0 * intensity_scale * standard_normal(rng);
            pixels[static_cast<std::size_t>(y) * w + x] =
                static_cast<std::int32_t>(std::clamp(std::lround(v), 0L, static_cast<long>(max_value)));
        }
    }
    return pixels;
}

} // namespace

std::string synth_image_id(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "synth_%04d", index + 1);
    return buf;
}

SynthCase synth_case(const SynthConfig& cfg, const ClassRegistry& registry, int index) {
    if (cfg.width < 64 || cfg.height < 64) throw ConfigError("synth: images must be at least 64x64");
    if (cfg.bit_depth < 8 || cfg.bit_depth > 16) throw ConfigError("synth: bit depth must be 8..16");
    if (!(cfg.spacing_mm > 0.0)) throw ConfigError("synth: spacing must be positive");
    const auto id = synth_image_id(index);
    auto rng = make_rng(cfg.seed, id);
    const Affine aff{1.0 + 0.03 * (2.0 * uniform01(rng) - 1.0), 0.02 * (2.0 * uniform01(rng) - 1.0),
                     0.02 * (2.0 * uniform01(rng) - 1.0)};

    AnnotationSet truth;
    truth.image_id = id;
    Placer placer(cfg, aff, rng);
    for (const auto& c : registry.classes()) {
        switch (c.kind) {
        case FeatureKind::landmark: truth.landmarks.emplace(c.id, placer.point(landmark_position(c), c.side)); break;
        case FeatureKind::outline: truth.outlines.emplace(c.id, Polyline{outline_points(c, placer)}); break;
        case FeatureKind::patch: truth.patches.emplace(c.id, Polygon{patch_vertices(c, placer)}); break;
        }
    }
    auto pixels = render(cfg, aff, rng);
    std::optional<PixelSpacing> spacing;
    if (cfg.calibrated) spacing = PixelSpacing::isotropic(cfg.spacing_mm);
    return {ImageRecord(id, cfg.width, cfg.height, cfg.bit_depth, std::move(pixels), spacing), std::move(truth)};
}

} // namespace radmark

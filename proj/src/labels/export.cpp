#include "radmark/labels/export.hpp"

#include "radmark/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace radmark {

std::string_view to_string(LabelFormat format) {
    switch (format) {
    case LabelFormat::box: return "box";
    case LabelFormat::polygon: return "polygon";
    }
    return "?";
}

std::optional<LabelFormat> parse_label_format(std::string_view text) {
    if (text == "box" || text == "center-normalized-box") return LabelFormat::box;
    if (text == "polygon") return LabelFormat::polygon;
    return std::nullopt;
}

namespace {

void append_fixed(std::string& out, double v) {
    std::array<char, 32> buf{};
    const int n = std::snprintf(buf.data(), buf.size(), " %.6f", v);
    out.append(buf.data(), static_cast<std::size_t>(n));
}

double clamp_unit(double v, bool& clamped) {
    if (v < 0.0 || v > 1.0) {
        clamped = true;
        return std::clamp(v, 0.0, 1.0);
    }
    return v;
}

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        const std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

template <typename T>
T parse_number(std::string_view tok, int line_no) {
    T v{};
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
        throw ValidationError("label line " + std::to_string(line_no) + ": bad number '" + std::string(tok) + "'");
    }
    return v;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        ++line_no;
        const auto toks = split_ws(text.substr(pos, end - pos));
        if (!toks.empty()) fn(toks, line_no);
        pos = end + 1;
    }
}

int parse_class(std::string_view tok, int line_no) {
    const int k = parse_number<int>(tok, line_no);
    if (k < 0) {
        throw ValidationError("label line " + std::to_string(line_no) + ": negative class id");
    }
    return k;
}

} // namespace

LabelExport export_detection_labels(const LabelBundle& bundle, LabelFormat format) {
    check_label_bundle(bundle);
    LabelExport out;
    const double w = bundle.width, h = bundle.height;
    for (const auto& [id, mask] : bundle.masks) {
        const int k = index_of(id);
        bool clamped = false;
        if (format == LabelFormat::box) {
            const auto& b = bundle.boxes.at(id);
            const double x0 = clamp_unit(b.x_min() / w, clamped), x1 = clamp_unit(b.x_max() / w, clamped);
            const double y0 = clamp_unit(b.y_min() / h, clamped), y1 = clamp_unit(b.y_max() / h, clamped);
            out.text += std::to_string(k);
            append_fixed(out.text, (x0 + x1) / 2.0);
            append_fixed(out.text, (y0 + y1) / 2.0);
            append_fixed(out.text, x1 - x0);
            append_fixed(out.text, y1 - y0);
            out.text += '\n';
        } else {
            for (const auto& contour : trace_outer_contours(mask.decode())) {
                out.text += std::to_string(k);
                for (const auto& p : contour) {
                    append_fixed(out.text, clamp_unit(p.x / w, clamped));
                    append_fixed(out.text, clamp_unit(p.y / h, clamped));
                }
                out.text += '\n';
            }
        }
        if (clamped) {
            out.warnings.push_back(bundle.image_id + ": class " + std::to_string(k) +
                                   " extended outside the canvas and was clamped");
        }
    }
    return out;
}

std::vector<BoxLabel> parse_box_labels(std::string_view text) {
    std::vector<BoxLabel> out;
    for_each_line(text, [&](const std::vector<std::string_view>& t, int n) {
        if (t.size() != 5) {
            throw ValidationError("label line " + std::to_string(n) + ": expected 5 fields, got " +
                                  std::to_string(t.size()));
        }
        out.push_back({parse_class(t[0], n), parse_number<double>(t[1], n), parse_number<double>(t[2], n),
                       parse_number<double>(t[3], n), parse_number<double>(t[4], n)});
    });
    return out;
}

std::vector<PolygonLabel> parse_polygon_labels(std::string_view text) {
    std::vector<PolygonLabel> out;
    for_each_line(text, [&](const std::vector<std::string_view>& t, int n) {
        if (t.size() < 7 || t.size() % 2 == 0) {
            throw ValidationError("label line " + std::to_string(n) + ": expected a class and at least 3 x y pairs");
        }
        PolygonLabel label{parse_class(t[0], n), {}};
        for (std::size_t i = 1; i < t.size(); i += 2) {
            label.vertices.push_back({parse_number<double>(t[i], n), parse_number<double>(t[i + 1], n)});
        }
        out.push_back(std::move(label));
    });
    return out;
}

BBox box_label_to_bbox(const BoxLabel& l, int width, int height, Frame frame) {
    return BBox((l.cx - l.w / 2.0) * width, (l.cy - l.h / 2.0) * height, (l.cx + l.w / 2.0) * width,
                (l.cy + l.h / 2.0) * height, frame);
}

namespace {

// 4-connected component labels, 0 = background, components numbered in raster order.
std::vector<int> label_components(const DenseMask& m, int& count) {
    const int w = m.width(), h = m.height();
    std::vector<int> labels(static_cast<std::size_t>(w) * h, 0);
    std::vector<int> stack;
    count = 0;
    for (int i = 0; i < w * h; ++i) {
        if (m.data()[i] == 0 || labels[i] != 0) continue;
        labels[i] = ++count;
        stack.push_back(i);
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int x = p % w, y = p / w;
            const std::array<std::pair<int, int>, 4> nbrs{{{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}}};
            for (const auto& [nx, ny] : nbrs) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const int q = ny * w + nx;
                if (m.data()[q] != 0 && labels[q] == 0) {
                    labels[q] = count;
                    stack.push_back(q);
                }
            }
        }
    }
    return labels;
}

} // namespace

std::vector<std::vector<PointPx>> trace_outer_contours(const DenseMask& mask) {
    const int w = mask.width(), h = mask.height();
    int count = 0;
    const auto labels = label_components(mask, count);
    std::vector<std::vector<PointPx>> contours;
    std::vector<bool> done(static_cast<std::size_t>(count) + 1, false);

    for (int start = 0; start < w * h; ++start) {
        const int comp = labels[start];
        if (comp == 0 || done[comp]) continue;
        done[comp] = true;
        auto in = [&](int x, int y) {
            return x >= 0 && y >= 0 && x < w && y < h && labels[static_cast<std::size_t>(y) * w + x] == comp;
        };
        // Directions clockwise on screen: east, south, west, north. The
        // component lies to the right of the direction of travel.
        constexpr std::array<int, 4> dx{1, 0, -1, 0};
        constexpr std::array<int, 4> dy{0, 1, 0, -1};
        // Is the edge leaving corner (cx, cy) in direction d a boundary edge?
        auto boundary = [&](int cx, int cy, int d) {
            switch (d) {
            case 0: return in(cx, cy) && !in(cx, cy - 1);         // top edge of (cx, cy)
            case 1: return in(cx - 1, cy) && !in(cx, cy);         // right edge of (cx-1, cy)
            case 2: return in(cx - 1, cy - 1) && !in(cx - 1, cy); // bottom edge of (cx-1, cy-1)
            default: return in(cx, cy - 1) && !in(cx - 1, cy - 1); // left edge of (cx, cy-1)
            }
        };
        const int sx = start % w, sy = start / w;
        int cx = sx, cy = sy, dir = 0;
        std::vector<PointPx> contour;
        do {
            contour.push_back({static_cast<double>(cx), static_cast<double>(cy), mask.frame()});
            cx += dx[dir];
            cy += dy[dir];
            // Prefer right turn, then straight, then left: diagonal contacts stay separated.
            bool moved = false;
            for (const int turn : {1, 0, 3}) {
                const int nd = (dir + turn) % 4;
                if (boundary(cx, cy, nd)) {
                    dir = nd;
                    moved = true;
                    break;
                }
            }
            if (!moved) {
                throw ContractViolation("contour tracing lost the boundary");
            }
        } while (cx != sx || cy != sy || dir != 0);

        // Drop vertices where the direction does not change.
        std::vector<PointPx> simplified;
        const std::size_t n = contour.size();
        for (std::size_t i = 0; i < n; ++i) {
            const auto& prev = contour[(i + n - 1) % n];
            const auto& cur = contour[i];
            const auto& next = contour[(i + 1) % n];
            const double cross = (cur.x - prev.x) * (next.y - cur.y) - (cur.y - prev.y) * (next.x - cur.x);
            if (cross != 0.0) simplified.push_back(cur);
        }
        contours.push_back(std::move(simplified));
    }
    return contours;
}

} // namespace radmark

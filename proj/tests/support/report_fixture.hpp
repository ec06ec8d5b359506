#pragma once

#include "radmark/eval/report.hpp"
#include "support/helpers.hpp"

#include <vector>

namespace testing {

// Fixed observations over the full registry; every value is exact in binary.
inline radmark::EvalReport fixed_report() {
    const auto reg = pelvis_registry();
    radmark::EvalReport rep;
    rep.images = {"img_a", "img_b", "img_c", "img_d"};
    rep.uncalibrated_images = 1;
    for (const auto& cls : reg.classes()) {
        radmark::ClassStats s;
        s.id = cls.id;
        s.code = cls.code;
        s.kind = cls.kind;
        s.group = cls.group;
        s.total = 4;
        if (cls.kind == radmark::FeatureKind::landmark) {
            s.identified = 3;
            s.errors_mm = {0.5 + (radmark::index_of(cls.id) % 8) * 0.25, 1.5, 3.25};
            s.errors_px = {2.0};
        } else {
            s.identified = radmark::index_of(cls.id) % 2 ? 4 : 2;
            s.mask_iou = {0.75, 0.875};
            if (s.identified == 4) s.mask_iou.insert(s.mask_iou.end(), {0.5, 1.0});
        }
        s.box_iou = std::vector<double>(s.identified, 0.625 + 0.0625 * ((radmark::index_of(cls.id) % 8) / 8.0));
        rep.classes.push_back(s);
    }
    return rep;
}

} // namespace testing

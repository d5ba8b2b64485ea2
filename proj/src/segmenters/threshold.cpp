#include <algorithm>
#include <cmath>

#include "scefis/error.hpp"
#include "scefis/segmenters.hpp"

namespace scefis {

std::string to_string(SegmenterKind k) {
    switch (k) {
        case SegmenterKind::Threshold: return "thr";
        case SegmenterKind::RegionGrow: return "rg";
        case SegmenterKind::Srm: return "srm";
    }
    return "unknown";
}

SegmenterKind segmenter_kind_from_string(const std::string& s) {
    if (s == "thr" || s == "threshold") return SegmenterKind::Threshold;
    if (s == "rg" || s == "region_grow") return SegmenterKind::RegionGrow;
    if (s == "srm") return SegmenterKind::Srm;
    throw ContractViolation("unknown segmenter kind: " + s);
}

SegmenterSpec SegmenterSpec::defaults(SegmenterKind kind) {
    SegmenterSpec s;
    s.kind = kind;
    switch (kind) {
        case SegmenterKind::Threshold:
            for (int i = 0; i <= 255; ++i) s.grid.push_back(i / 255.0);
            s.default_value = 128 / 255.0;
            break;
        case SegmenterKind::RegionGrow:
            for (int i = 1; i <= 50; ++i) s.grid.push_back(i / 100.0);
            s.default_value = 17 / 100.0;
            break;
        case SegmenterKind::Srm:
            for (int q = 1; q <= 256; q *= 2) s.grid.push_back(q);
            s.default_value = 32;
            break;
    }
    return s;
}

void SegmenterSpec::validate() const {
    require(!grid.empty(), "SegmenterSpec: empty grid");
    for (std::size_t i = 1; i < grid.size(); ++i) require(grid[i] > grid[i - 1], "SegmenterSpec: grid not increasing");
    require(std::find(grid.begin(), grid.end(), default_value) != grid.end(), "SegmenterSpec: default not in grid");
    if (kind == SegmenterKind::Threshold || kind == SegmenterKind::RegionGrow)
        require(grid.front() >= 0.0 && grid.back() <= 1.0, "SegmenterSpec: grid must lie in [0,1]");
    if (kind == SegmenterKind::Srm) require(grid.front() >= 1.0, "SegmenterSpec: SRM scales must be >= 1");
}

double SegmenterSpec::snap(double v) const {
    require(!grid.empty(), "SegmenterSpec::snap: empty grid");
    auto it = std::lower_bound(grid.begin(), grid.end(), v);
    if (it == grid.begin()) return grid.front();
    if (it == grid.end()) return grid.back();
    const double above = *it;
    const double below = *(it - 1);
    return (above - v) < (v - below) ? above : below;
}

BinaryMask threshold_pixels(const GrayImage& img, double t, Polarity polarity) {
    require(t >= 0.0 && t <= 1.0, "threshold_segment: level must lie in [0,1]");
    BinaryMask m(img.width(), img.height());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) m.set(i, polarity == Polarity::Dark ? px[i] <= t : px[i] >= t);
    return m;
}

BinaryMask threshold_segment(const GrayImage& img, double t, Polarity polarity, bool keep_all_components) {
    BinaryMask m = threshold_pixels(img, t, polarity);
    return keep_all_components ? m : largest_component(m);
}

}  // namespace scefis

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

namespace scefis {

Dataset make_synthetic_dataset(const SyntheticOptions& opts) {
    require(opts.count >= 2, "synthetic: need at least two images");
    require(opts.width >= 32 && opts.height >= 32, "synthetic: images must be at least 32x32");
    const int w = opts.width;
    const int h = opts.height;
    std::mt19937_64 rng(opts.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset ds;
    ds.name = "synthetic";
    for (int n = 0; n < opts.count; ++n) {
        const double lesion = 0.10 + 0.35 * unit(rng);
        const double contrast = opts.contrast + opts.contrast_jitter * (2.0 * unit(rng) - 1.0);
        const double background = lesion + contrast;
        const double rx = 0.12 * w + 0.10 * w * unit(rng);
        const double ry = 0.12 * h + 0.10 * h * unit(rng);
        const double cx = w / 2.0 + (w / 2.0 - rx - 4.0) * (2.0 * unit(rng) - 1.0) * 0.6;
        const double cy = h / 2.0 + (h / 2.0 - ry - 4.0) * (2.0 * unit(rng) - 1.0) * 0.6;

        std::vector<double> noise(static_cast<std::size_t>(w) * h);
        for (auto& v : noise) v = gauss(rng);

        std::vector<double> px(noise.size());
        std::vector<std::uint8_t> gold(noise.size());
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double dx = (x - cx) / rx;
                const double dy = (y - cy) / ry;
                const bool inside = dx * dx + dy * dy <= 1.0;
                // 3x3 box-smoothed noise gives the speckle some spatial correlation.
                double sm = 0.0;
                for (int oy = -1; oy <= 1; ++oy)
                    for (int ox = -1; ox <= 1; ++ox) {
                        const int xx = std::clamp(x + ox, 0, w - 1);
                        const int yy = std::clamp(y + oy, 0, h - 1);
                        sm += noise[static_cast<std::size_t>(yy) * w + xx];
                    }
                sm /= 9.0;
                const double base = inside ? lesion : background;
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                px[i] = std::clamp(base + opts.noise * sm * (0.5 + base), 0.0, 1.0);
                gold[i] = inside ? 1 : 0;
            }
        }
        char id[32];
        std::snprintf(id, sizeof id, "syn%03d", n);
        ds.items.push_back({id, GrayImage(w, h, std::move(px)), BinaryMask(w, h, std::move(gold))});
    }
    return ds;
}

}  // namespace scefis

#include <cmath>
#include <deque>

#include "scefis/error.hpp"
#include "scefis/segmenters.hpp"

namespace scefis {

BinaryMask region_grow(const GrayImage& img, const std::vector<std::pair<int, int>>& seeds, double sim) {
    require(!seeds.empty(), "region_grow: at least one seed required");
    require(sim >= 0.0 && sim <= 1.0, "region_grow: similarity must lie in [0,1]");
    const int w = img.width();
    const int h = img.height();
    BinaryMask out(w, h);
    std::vector<std::uint8_t> in_region(static_cast<std::size_t>(w) * h);
    std::deque<int> queue;

    for (const auto& [sx, sy] : seeds) {
        require(sx >= 0 && sx < w && sy >= 0 && sy < h, "region_grow: seed outside image");
        std::fill(in_region.begin(), in_region.end(), 0);
        const int start = sy * w + sx;
        in_region[start] = 1;
        double sum = img.at(sx, sy);
        std::size_t count = 1;
        queue.assign(1, start);
        while (!queue.empty()) {
            const int p = queue.front();
            queue.pop_front();
            const int x = p % w;
            const int y = p / w;
            const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& n : nbrs) {
                if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
                const int q = n[1] * w + n[0];
                if (in_region[q]) continue;
                const double v = img.at(n[0], n[1]);
                if (std::fabs(v - sum / static_cast<double>(count)) > sim) continue;
                in_region[q] = 1;
                sum += v;
                ++count;
                queue.push_back(q);
            }
        }
        for (std::size_t i = 0; i < in_region.size(); ++i)
            if (in_region[i]) out.set(i, true);
    }
    return out;
}

}  // namespace scefis

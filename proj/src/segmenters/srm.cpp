#include <algorithm>
#include <cmath>
#include <numeric>

#include "scefis/error.hpp"
#include "scefis/segmenters.hpp"

namespace scefis {
namespace {

struct Regions {
    std::vector<int> parent;
    std::vector<double> mean;
    std::vector<std::size_t> size;

    int find(int i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    }
};

}  // namespace

SrmPartition srm_partition(const GrayImage& img, double q) {
    require(q >= 1.0, "srm_segment: scale must be >= 1");
    const int w = img.width();
    const int h = img.height();
    const std::size_t n = img.size();
    const auto px = img.pixels();

    Regions r;
    r.parent.resize(n);
    std::iota(r.parent.begin(), r.parent.end(), 0);
    r.mean.assign(px.begin(), px.end());
    r.size.assign(n, 1);

    struct Edge {
        int a;
        int b;
        double diff;
    };
    std::vector<Edge> edges;
    edges.reserve(2 * n);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int p = y * w + x;
            if (x + 1 < w) edges.push_back({p, p + 1, std::fabs(px[p] - px[p + 1])});
            if (y + 1 < h) edges.push_back({p, p + w, std::fabs(px[p] - px[p + w])});
        }
    std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.diff < b.diff; });

    // b^2(R) = g^2 ln(2/delta) / (2 Q |R|), g = 1, delta = 1/(6|I|^2)
    const double nn = static_cast<double>(n);
    const double log_term = std::log(2.0 * 6.0 * nn * nn);
    auto b2 = [&](std::size_t size) { return log_term / (2.0 * q * static_cast<double>(size)); };

    for (const auto& e : edges) {
        const int ra = r.find(e.a);
        const int rb = r.find(e.b);
        if (ra == rb) continue;
        const double bound = std::sqrt(b2(r.size[ra]) + b2(r.size[rb]));
        if (std::fabs(r.mean[ra] - r.mean[rb]) > bound) continue;
        const auto [big, small] = r.size[ra] >= r.size[rb] ? std::pair{ra, rb} : std::pair{rb, ra};
        const std::size_t total = r.size[big] + r.size[small];
        r.mean[big] = (r.mean[big] * static_cast<double>(r.size[big]) + r.mean[small] * static_cast<double>(r.size[small])) /
                      static_cast<double>(total);
        r.size[big] = total;
        r.parent[small] = big;
    }

    SrmPartition out;
    out.labels.assign(n, -1);
    std::vector<int> dense(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const int root = r.find(static_cast<int>(i));
        if (dense[root] < 0) dense[root] = out.count++;
        out.labels[i] = dense[root];
    }
    return out;
}

BinaryMask srm_segment(const GrayImage& img, double q, std::pair<int, int> anchor) {
    require(anchor.first >= 0 && anchor.first < img.width() && anchor.second >= 0 && anchor.second < img.height(),
            "srm_segment: anchor outside image");
    const auto part = srm_partition(img, q);
    const int label = part.labels[static_cast<std::size_t>(anchor.second) * img.width() + anchor.first];
    BinaryMask m(img.width(), img.height());
    for (std::size_t i = 0; i < part.labels.size(); ++i) m.set(i, part.labels[i] == label);
    return m;
}

BinaryMask srm_segment(const GrayImage& img, double q) {
    const int z = std::min(compute_window_size({{img.height(), img.width()}}), std::min(img.width(), img.height()));
    const auto ctx = SegmentationContext::from_detection(img, z);
    return srm_segment(img, q, ctx.seeds.front());
}

}  // namespace scefis

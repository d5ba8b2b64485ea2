#include "scefis/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scefis/error.hpp"

namespace scefis {

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require(width >= 1 && height >= 1, "GrayImage: dimensions must be positive");
    require(data_.size() == static_cast<std::size_t>(width) * height, "GrayImage: data length != width*height");
    for (double v : data_) require(v >= 0.0 && v <= 1.0 && std::isfinite(v), "GrayImage: pixel outside [0,1]");
}

GrayImage::GrayImage(int width, int height, double fill)
    : GrayImage(width, height, std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill)) {}

double GrayImage::clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
}

GrayImage GrayImage::crop(int x0, int y0, int w, int h) const {
    require(x0 >= 0 && y0 >= 0 && w >= 1 && h >= 1 && x0 + w <= width_ && y0 + h <= height_,
            "GrayImage::crop: rectangle outside image");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(w) * h);
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) out.push_back(at(x, y));
    return GrayImage(w, h, std::move(out));
}

BinaryMask::BinaryMask(int width, int height, bool fill)
    : width_(width), height_(height) {
    require(width >= 1 && height >= 1, "BinaryMask: dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> data)
    : width_(width), height_(height), data_(std::move(data)) {
    require(width >= 1 && height >= 1, "BinaryMask: dimensions must be positive");
    require(data_.size() == static_cast<std::size_t>(width) * height, "BinaryMask: data length != width*height");
    for (auto& v : data_) v = v ? 1 : 0;
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(data_.begin(), data_.end(), std::uint8_t{1}));
}

int label_components(const BinaryMask& mask, std::vector<int>& labels) {
    const int w = mask.width();
    const int h = mask.height();
    labels.assign(mask.size(), 0);
    int next = 0;
    std::vector<int> stack;
    for (int start = 0; start < static_cast<int>(mask.size()); ++start) {
        if (!mask[start] || labels[start] != 0) continue;
        ++next;
        labels[start] = next;
        stack.push_back(start);
        while (!stack.empty()) {
            const int p = stack.back();
            stack.pop_back();
            const int x = p % w;
            const int y = p / w;
            const int nbrs[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
            for (const auto& n : nbrs) {
                if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
                const int q = n[1] * w + n[0];
                if (mask[q] && labels[q] == 0) {
                    labels[q] = next;
                    stack.push_back(q);
                }
            }
        }
    }
    return next;
}

BinaryMask largest_component(const BinaryMask& mask) {
    std::vector<int> labels;
    const int n = label_components(mask, labels);
    if (n <= 1) return mask;
    std::vector<std::size_t> sizes(n + 1, 0);
    for (int l : labels) ++sizes[l];
    int best = 1;
    for (int l = 2; l <= n; ++l)
        if (sizes[l] > sizes[best]) best = l;
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < labels.size(); ++i) out.set(i, labels[i] == best);
    return out;
}

}  // namespace scefis

#pragma once

#include <random>

#include "scefis/image.hpp"

namespace testutil {

inline scefis::BinaryMask mask_from(int w, int h, const char* rows) {
    scefis::BinaryMask m(w, h);
    for (int i = 0; i < w * h; ++i) m.set(static_cast<std::size_t>(i), rows[i] == '#');
    return m;
}

inline scefis::GrayImage image_from(int w, int h, std::vector<double> v) { return scefis::GrayImage(w, h, std::move(v)); }

inline scefis::BinaryMask random_mask(int w, int h, std::mt19937_64& rng, double p = 0.5) {
    std::bernoulli_distribution b(p);
    scefis::BinaryMask m(w, h);
    for (std::size_t i = 0; i < m.size(); ++i) m.set(i, b(rng));
    return m;
}

inline scefis::GrayImage random_image(int w, int h, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(static_cast<std::size_t>(w) * h);
    for (auto& x : v) x = u(rng);
    return scefis::GrayImage(w, h, std::move(v));
}

}  // namespace testutil

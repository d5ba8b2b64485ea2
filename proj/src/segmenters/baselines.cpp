// Classical thresholding baselines: Otsu, Kittler-Illingworth, Huang, Niblack.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "scefis/error.hpp"
#include "scefis/segmenters.hpp"

namespace scefis {

std::string to_string(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::Otsu: return "otsu";
        case BaselineMethod::Kittler: return "kittler";
        case BaselineMethod::Huang: return "huang";
        case BaselineMethod::Niblack: return "niblack";
    }
    return "unknown";
}

BaselineMethod baseline_from_string(const std::string& s) {
    for (auto m : {BaselineMethod::Otsu, BaselineMethod::Kittler, BaselineMethod::Huang, BaselineMethod::Niblack})
        if (to_string(m) == s) return m;
    throw ContractViolation("unknown baseline method: " + s);
}

namespace {

constexpr int kBins = 256;
using Histogram = std::array<double, kBins>;

Histogram histogram_of(const GrayImage& img) {
    Histogram h{};
    for (double v : img.pixels()) h[std::min(kBins - 1, static_cast<int>(std::lround(v * (kBins - 1))))] += 1.0;
    return h;
}

// Picks the middle of the plateau of optimal bins; `better(a, b)` is true when a beats b.
template <typename Score, typename Better>
int plateau_argopt(int first, int last, Score score, Better better) {
    int best_lo = -1;
    int best_hi = -1;
    double best = 0.0;
    for (int t = first; t <= last; ++t) {
        const double s = score(t);
        if (!std::isfinite(s)) continue;
        if (best_lo < 0 || better(s, best)) {
            best = s;
            best_lo = best_hi = t;
        } else if (!better(best, s)) {
            best_hi = t;
        }
    }
    if (best_lo < 0) throw ContractViolation("thresholding criterion undefined for this histogram");
    return (best_lo + best_hi) / 2;
}

bool approx_equal(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max({1.0, std::fabs(a), std::fabs(b)}); }

int otsu_bin(const Histogram& h) {
    double total = 0.0;
    double sum = 0.0;
    for (int i = 0; i < kBins; ++i) {
        total += h[i];
        sum += i * h[i];
    }
    std::array<double, kBins> w0{}, s0{};
    double w = 0.0, s = 0.0;
    for (int i = 0; i < kBins; ++i) {
        w += h[i];
        s += i * h[i];
        w0[i] = w;
        s0[i] = s;
    }
    auto score = [&](int t) {
        const double p0 = w0[t] / total;
        const double p1 = 1.0 - p0;
        if (w0[t] == 0.0 || w0[t] == total) return -std::numeric_limits<double>::infinity();
        const double m0 = s0[t] / w0[t];
        const double m1 = (sum - s0[t]) / (total - w0[t]);
        return p0 * p1 * (m0 - m1) * (m0 - m1);
    };
    return plateau_argopt(0, kBins - 2, score, [](double a, double b) { return a > b && !approx_equal(a, b); });
}

int kittler_bin(const Histogram& h) {
    double total = 0.0;
    for (double v : h) total += v;
    // Quantization noise floor keeps the log finite for single-level classes.
    const double floor_var = 1.0 / 12.0;
    auto score = [&](int t) {
        double n0 = 0, s0 = 0, q0 = 0, n1 = 0, s1 = 0, q1 = 0;
        for (int i = 0; i < kBins; ++i) {
            if (i <= t) {
                n0 += h[i];
                s0 += i * h[i];
                q0 += static_cast<double>(i) * i * h[i];
            } else {
                n1 += h[i];
                s1 += i * h[i];
                q1 += static_cast<double>(i) * i * h[i];
            }
        }
        if (n0 == 0 || n1 == 0) return std::numeric_limits<double>::infinity();
        const double m0 = s0 / n0, m1 = s1 / n1;
        const double v0 = std::max(q0 / n0 - m0 * m0, 0.0) + floor_var;
        const double v1 = std::max(q1 / n1 - m1 * m1, 0.0) + floor_var;
        const double p0 = n0 / total, p1 = n1 / total;
        return 1.0 + p0 * std::log(v0) + p1 * std::log(v1) - 2.0 * (p0 * std::log(p0) + p1 * std::log(p1));
    };
    return plateau_argopt(0, kBins - 2, score, [](double a, double b) { return a < b && !approx_equal(a, b); });
}

int huang_bin(const Histogram& h) {
    int first = 0;
    int last = kBins - 1;
    while (first < kBins && h[first] == 0) ++first;
    while (last > first && h[last] == 0) --last;
    const double c = last - first;
    std::array<double, kBins> mu0{}, mu1{};
    {
        double sum = 0, cnt = 0;
        for (int t = first; t <= last; ++t) {
            sum += t * h[t];
            cnt += h[t];
            mu0[t] = sum / cnt;
        }
        sum = cnt = 0;
        for (int t = last; t > first; --t) {
            sum += t * h[t];
            cnt += h[t];
            mu1[t - 1] = sum / cnt;
        }
    }
    auto shannon = [](double mu) {
        if (mu <= 1e-6 || mu >= 0.999999) return 0.0;
        return -mu * std::log(mu) - (1 - mu) * std::log(1 - mu);
    };
    auto score = [&](int t) {
        double ent = 0.0;
        for (int i = first; i <= t; ++i) ent += h[i] * shannon(1.0 / (1.0 + std::fabs(i - mu0[t]) / c));
        for (int i = t + 1; i <= last; ++i) ent += h[i] * shannon(1.0 / (1.0 + std::fabs(i - mu1[t]) / c));
        return ent;
    };
    return plateau_argopt(first, last - 1, score, [](double a, double b) { return a < b && !approx_equal(a, b); });
}

BinaryMask finish(BinaryMask m, bool keep_all) { return keep_all ? m : largest_component(m); }

}  // namespace

double global_threshold_level(const GrayImage& img, BaselineMethod method) {
    require(method != BaselineMethod::Niblack, "global_threshold_level: Niblack is a local method");
    const auto h = histogram_of(img);
    int occupied = 0;
    for (double v : h) occupied += v > 0;
    require(occupied >= 2, "global thresholding undefined on a constant image");
    int bin = 0;
    switch (method) {
        case BaselineMethod::Otsu: bin = otsu_bin(h); break;
        case BaselineMethod::Kittler: bin = kittler_bin(h); break;
        case BaselineMethod::Huang: bin = huang_bin(h); break;
        case BaselineMethod::Niblack: break;
    }
    return bin / static_cast<double>(kBins - 1);
}

std::vector<double> niblack_levels(const GrayImage& img, const NiblackParams& params) {
    require(params.window >= 1, "niblack: window must be positive");
    const int w = img.width();
    const int h = img.height();
    // Summed-area tables over value and squared value.
    std::vector<double> s((w + 1) * static_cast<std::size_t>(h + 1), 0.0), s2(s.size(), 0.0);
    auto at = [w](std::vector<double>& t, int x, int y) -> double& { return t[static_cast<std::size_t>(y) * (w + 1) + x]; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v = img.at(x, y);
            at(s, x + 1, y + 1) = v + at(s, x, y + 1) + at(s, x + 1, y) - at(s, x, y);
            at(s2, x + 1, y + 1) = v * v + at(s2, x, y + 1) + at(s2, x + 1, y) - at(s2, x, y);
        }
    const int half = params.window / 2;
    std::vector<double> out(img.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const int x0 = std::max(0, x - half), x1 = std::min(w, x - half + params.window);
            const int y0 = std::max(0, y - half), y1 = std::min(h, y - half + params.window);
            const double n = static_cast<double>(x1 - x0) * (y1 - y0);
            const double sum = at(s, x1, y1) - at(s, x0, y1) - at(s, x1, y0) + at(s, x0, y0);
            const double sq = at(s2, x1, y1) - at(s2, x0, y1) - at(s2, x1, y0) + at(s2, x0, y0);
            const double mean = sum / n;
            const double sd = std::sqrt(std::max(0.0, sq / n - mean * mean));
            out[static_cast<std::size_t>(y) * w + x] = mean + params.k * sd;
        }
    return out;
}

BinaryMask baseline_threshold(const GrayImage& img, BaselineMethod method, Polarity polarity, bool keep_all_components,
                              const NiblackParams& params) {
    if (method != BaselineMethod::Niblack)
        return threshold_segment(img, global_threshold_level(img, method), polarity, keep_all_components);
    const auto levels = niblack_levels(img, params);
    BinaryMask m(img.width(), img.height());
    const auto px = img.pixels();
    for (std::size_t i = 0; i < px.size(); ++i)
        m.set(i, polarity == Polarity::Dark ? px[i] <= levels[i] : px[i] >= levels[i]);
    return finish(std::move(m), keep_all_components);
}

}  // namespace scefis

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scefis/error.hpp"
#include "scefis/keyfeat.hpp"
#include "scefis/metrics.hpp"

namespace scefis {

const std::array<const char*, kNumStatRows> kStatRowNames = {"mean", "median", "mode", "sd",
                                                              "cov",  "range",  "min",  "max"};

namespace features {

double mode_of(const std::vector<double>& values) {
    require(!values.empty(), "mode_of: empty input");
    constexpr int kBins = 64;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi <= lo) return lo;
    std::array<int, kBins> counts{};
    const double width = (hi - lo) / kBins;
    for (double v : values) {
        const int b = std::min(kBins - 1, static_cast<int>((v - lo) / (hi - lo) * kBins));
        ++counts[b];
    }
    const int best = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    return lo + (best + 0.5) * width;
}

// Population sd; "co-variance" of a flattened window is its population variance.
std::array<double, 8> window_statistics(const std::vector<double>& values) {
    require(!values.empty(), "window_statistics: empty input");
    const double mean = mean_of(values);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(values.size());
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return {mean, median_of(values), std::sqrt(var), var, mode_of(values), *hi - *lo, *lo, *hi};
}

Eigen::MatrixXd dct2(const Eigen::MatrixXd& block) {
    auto basis = [](Eigen::Index n) {
        Eigen::MatrixXd c(n, n);
        for (Eigen::Index k = 0; k < n; ++k) {
            const double alpha = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
            for (Eigen::Index i = 0; i < n; ++i)
                c(k, i) = alpha * std::cos(std::numbers::pi * (2.0 * i + 1.0) * k / (2.0 * n));
        }
        return c;
    };
    return basis(block.rows()) * block * basis(block.cols()).transpose();
}

Eigen::MatrixXd haar_approximation(const Eigen::MatrixXd& block) {
    const Eigen::Index r = (block.rows() + 1) / 2;
    const Eigen::Index c = (block.cols() + 1) / 2;
    auto px = [&](Eigen::Index i, Eigen::Index j) {
        return block(std::min(i, block.rows() - 1), std::min(j, block.cols() - 1));
    };
    Eigen::MatrixXd out(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            out(i, j) = 0.5 * (px(2 * i, 2 * j) + px(2 * i, 2 * j + 1) + px(2 * i + 1, 2 * j) + px(2 * i + 1, 2 * j + 1));
    return out;
}

Eigen::MatrixXd gradient_magnitude(const Eigen::MatrixXd& block) {
    const Eigen::Index rows = block.rows();
    const Eigen::Index cols = block.cols();
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const double gx = 0.5 * (block(i, std::min(j + 1, cols - 1)) - block(i, std::max<Eigen::Index>(j - 1, 0)));
            const double gy = 0.5 * (block(std::min(i + 1, rows - 1), j) - block(std::max<Eigen::Index>(i - 1, 0), j));
            out(i, j) = std::hypot(gx, gy);
        }
    return out;
}

GlcmStats glcm(const Eigen::MatrixXd& block, int drow, int dcol, int levels) {
    require(levels >= 2, "glcm: need at least two gray levels");
    const double lo = block.minCoeff();
    const double hi = block.maxCoeff();
    Eigen::MatrixXi q(block.rows(), block.cols());
    for (Eigen::Index i = 0; i < block.rows(); ++i)
        for (Eigen::Index j = 0; j < block.cols(); ++j)
            q(i, j) = hi > lo ? std::min(levels - 1, static_cast<int>((block(i, j) - lo) / (hi - lo) * levels)) : 0;

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(levels, levels);
    double total = 0.0;
    for (Eigen::Index i = 0; i < block.rows(); ++i)
        for (Eigen::Index j = 0; j < block.cols(); ++j) {
            const Eigen::Index i2 = i + drow;
            const Eigen::Index j2 = j + dcol;
            if (i2 < 0 || i2 >= block.rows() || j2 < 0 || j2 >= block.cols()) continue;
            p(q(i, j), q(i2, j2)) += 1.0;
            p(q(i2, j2), q(i, j)) += 1.0;
            total += 2.0;
        }
    GlcmStats s;
    if (total == 0.0) return s;
    p /= total;

    double mu = 0.0;
    for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j) mu += i * p(i, j);
    double var = 0.0;
    for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j) var += (i - mu) * (i - mu) * p(i, j);

    const double span2 = static_cast<double>(levels - 1) * (levels - 1);
    s.contrast = 0.0;
    s.energy = 0.0;
    s.homogeneity = 0.0;
    double cov = 0.0;
    for (int i = 0; i < levels; ++i)
        for (int j = 0; j < levels; ++j) {
            const double pij = p(i, j);
            s.contrast += (i - j) * (i - j) * pij / span2;
            s.energy += pij * pij;
            s.homogeneity += pij / (1.0 + std::abs(i - j));
            cov += (i - mu) * (j - mu) * pij;
        }
    s.correlation = var > 1e-15 ? cov / var : 0.0;
    return s;
}

}  // namespace features

namespace {

constexpr std::array<const char*, 4> kSources = {"rc", "dct", "wav", "grad"};
constexpr std::array<const char*, 8> kWindowStats = {"mean", "median", "sd", "cov", "mode", "range", "min", "max"};
constexpr std::array<const char*, 8> kDescriptorStats = {"mean", "median", "sd",  "cov",
                                                         "range", "min_nonzero", "max", "zero_count"};
constexpr std::array<const char*, 4> kGlcmStats = {"contrast", "correlation", "energy", "homogeneity"};
constexpr std::array<int, 4> kAngles = {0, 45, 90, 135};
// (drow, dcol) per angle.
constexpr std::array<std::array<int, 2>, 4> kOffsets = {{{0, 1}, {-1, 1}, {-1, 0}, {-1, -1}}};

std::vector<double> flatten(const Eigen::MatrixXd& m) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) v.push_back(m(i, j));
    return v;
}

}  // namespace

const std::array<std::string, kNumFeatures>& feature_column_names() {
    static const std::array<std::string, kNumFeatures> names = [] {
        std::array<std::string, kNumFeatures> n;
        std::size_t k = 0;
        for (const char* src : kSources)
            for (const char* st : kWindowStats) n[k++] = std::string(src) + "_" + st;
        for (const char* st : kDescriptorStats) n[k++] = std::string("ds_") + st;
        for (const char* src : kSources)
            for (int angle : kAngles)
                for (const char* st : kGlcmStats)
                    n[k++] = "glcm_" + std::string(src) + "_" + std::to_string(angle) + "_" + st;
        for (const char* st : kGlcmStats) n[k++] = std::string("glcm_ds_0_") + st;
        return n;
    }();
    return names;
}

FeatureVector extract_features(const GrayImage& img, const SeedPoint& p, int z) {
    require(z >= 1, "extract_features: window must be positive");
    require(p.x >= 0 && p.x < img.width() && p.y >= 0 && p.y < img.height(), "extract_features: seed outside image");
    const int x0 = std::max(0, p.x - z / 2);
    const int y0 = std::max(0, p.y - z / 2);
    const int x1 = std::min(img.width(), p.x - z / 2 + z);
    const int y1 = std::min(img.height(), p.y - z / 2 + z);
    require(x1 - x0 >= 2 && y1 - y0 >= 2, "extract_features: clamped window smaller than 2x2");

    Eigen::MatrixXd rc(y1 - y0, x1 - x0);
    for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) rc(y - y0, x - x0) = img.at(x, y);

    const std::array<Eigen::MatrixXd, 4> sources = {rc, features::dct2(rc), features::haar_approximation(rc),
                                                    features::gradient_magnitude(rc)};
    FeatureVector out{};
    std::size_t k = 0;
    for (const auto& s : sources)
        for (double v : features::window_statistics(flatten(s))) out[k++] = v;

    std::vector<double> ds(p.descriptor.begin(), p.descriptor.end());
    const auto dstats = features::window_statistics(ds);
    double min_nonzero = 0.0;
    bool any_nonzero = false;
    int zeros = 0;
    for (double v : ds) {
        if (v == 0.0) {
            ++zeros;
        } else if (!any_nonzero || v < min_nonzero) {
            min_nonzero = v;
            any_nonzero = true;
        }
    }
    // mean, median, sd, co-variance, range, min (nonzero), max, zero population
    for (double v : {dstats[0], dstats[1], dstats[2], dstats[3], dstats[5], min_nonzero, dstats[7],
                     static_cast<double>(zeros)})
        out[k++] = v;

    for (const auto& s : sources)
        for (const auto& off : kOffsets) {
            const auto g = features::glcm(s, off[0], off[1]);
            for (double v : {g.contrast, g.correlation, g.energy, g.homogeneity}) out[k++] = v;
        }

    // Descriptor laid out as 16 spatial cells x 8 orientation bins.
    Eigen::MatrixXd dmat(16, 8);
    for (int i = 0; i < 16; ++i)
        for (int j = 0; j < 8; ++j) dmat(i, j) = p.descriptor[i * 8 + j];
    const auto g = features::glcm(dmat, 0, 1);
    for (double v : {g.contrast, g.correlation, g.energy, g.homogeneity}) out[k++] = v;

    for (double& v : out)
        if (!std::isfinite(v)) v = 0.0;
    return out;
}

}  // namespace scefis

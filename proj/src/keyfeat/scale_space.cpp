// Difference-of-Gaussians keypoint detection and orientation-histogram descriptors.

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scefis/error.hpp"
#include "scefis/keyfeat.hpp"

namespace scefis {
namespace {

struct Plane {
    int w = 0;
    int h = 0;
    std::vector<double> v;

    Plane() = default;
    Plane(int w_, int h_) : w(w_), h(h_), v(static_cast<std::size_t>(w_) * h_, 0.0) {}
    double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
    double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
    double clamped(int x, int y) const { return at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); }
};

Plane to_plane(const GrayImage& img) {
    Plane p(img.width(), img.height());
    const auto px = img.pixels();
    std::copy(px.begin(), px.end(), p.v.begin());
    return p;
}

std::vector<double> gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += k[i + radius];
    }
    for (double& x : k) x /= sum;
    return k;
}

Plane blur(const Plane& src, double sigma) {
    if (sigma <= 0.0) return src;
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    Plane tmp(src.w, src.h);
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * src.clamped(x + i, y);
            tmp.at(x, y) = acc;
        }
    Plane out(src.w, src.h);
    for (int y = 0; y < src.h; ++y)
        for (int x = 0; x < src.w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) acc += k[i + r] * tmp.clamped(x, y + i);
            out.at(x, y) = acc;
        }
    return out;
}

Plane downsample(const Plane& src) {
    Plane out(std::max(1, src.w / 2), std::max(1, src.h / 2));
    for (int y = 0; y < out.h; ++y)
        for (int x = 0; x < out.w; ++x) out.at(x, y) = src.at(2 * x, 2 * y);
    return out;
}

constexpr double kAssumedBlur = 0.5;
constexpr double kDescriptorBaseSigma = 1.6;

struct GradientField {
    Plane magnitude;
    Plane angle;
};

GradientField gradients(const Plane& p) {
    GradientField g{Plane(p.w, p.h), Plane(p.w, p.h)};
    for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) {
            const double dx = 0.5 * (p.clamped(x + 1, y) - p.clamped(x - 1, y));
            const double dy = 0.5 * (p.clamped(x, y + 1) - p.clamped(x, y - 1));
            g.magnitude.at(x, y) = std::hypot(dx, dy);
            double a = std::atan2(dy, dx);
            if (a < 0) a += 2.0 * std::numbers::pi;
            g.angle.at(x, y) = a;
        }
    return g;
}

GradientField descriptor_field(const GrayImage& img) {
    const double s = std::sqrt(kDescriptorBaseSigma * kDescriptorBaseSigma - kAssumedBlur * kAssumedBlur);
    return gradients(blur(to_plane(img), s));
}

void fill_descriptor(const GradientField& g, SeedPoint& p) {
    constexpr int d = 4;
    constexpr int n = 8;
    const double hist_width = 3.0 * std::max(p.scale, 0.5);
    const int max_radius = std::max(g.magnitude.w, g.magnitude.h);
    const int radius = std::min(max_radius, static_cast<int>(std::lround(hist_width * std::numbers::sqrt2 * (d + 1) * 0.5)));
    const double exp_scale = -1.0 / (d * d * 0.5);

    std::array<double, (d + 2) * (d + 2) * (n + 2)> hist{};
    auto hidx = [](int r, int c, int o) { return (r * (d + 2) + c) * (n + 2) + o; };

    for (int i = -radius; i <= radius; ++i) {
        for (int j = -radius; j <= radius; ++j) {
            const double r_rot = i / hist_width;
            const double c_rot = j / hist_width;
            const double rbin = r_rot + d / 2.0 - 0.5;
            const double cbin = c_rot + d / 2.0 - 0.5;
            if (rbin <= -1 || rbin >= d || cbin <= -1 || cbin >= d) continue;
            const int y = std::clamp(p.y + i, 0, g.magnitude.h - 1);
            const int x = std::clamp(p.x + j, 0, g.magnitude.w - 1);
            const double weight = std::exp((r_rot * r_rot + c_rot * c_rot) * exp_scale);
            const double mag = g.magnitude.at(x, y) * weight;
            const double obin = g.angle.at(x, y) * n / (2.0 * std::numbers::pi);

            const int r0 = static_cast<int>(std::floor(rbin));
            const int c0 = static_cast<int>(std::floor(cbin));
            int o0 = static_cast<int>(std::floor(obin));
            const double dr = rbin - r0;
            const double dc = cbin - c0;
            const double dobin = obin - o0;
            o0 = ((o0 % n) + n) % n;

            for (int a = 0; a < 2; ++a) {
                const double vr = mag * (a ? dr : 1 - dr);
                for (int b = 0; b < 2; ++b) {
                    const double vc = vr * (b ? dc : 1 - dc);
                    hist[hidx(r0 + 1 + a, c0 + 1 + b, o0)] += vc * (1 - dobin);
                    hist[hidx(r0 + 1 + a, c0 + 1 + b, o0 + 1)] += vc * dobin;
                }
            }
        }
    }

    std::array<double, kDescriptorSize> desc{};
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            double* bins = &hist[hidx(r + 1, c + 1, 0)];
            bins[0] += bins[n];
            for (int o = 0; o < n; ++o) desc[(r * d + c) * n + o] = bins[o];
        }

    double norm = 0.0;
    for (double v : desc) norm += v * v;
    norm = std::sqrt(norm);
    p.descriptor_mass = norm;
    if (norm > 0.0) {
        const double clip = 0.2 * norm;
        double norm2 = 0.0;
        for (double& v : desc) {
            v = std::min(v, clip);
            norm2 += v * v;
        }
        norm2 = std::sqrt(norm2);
        for (double& v : desc) v = v / norm2;
    }
    p.descriptor = desc;
}

bool separated(const SeedPoint& a, const std::vector<SeedPoint>& kept, int z) {
    for (const auto& k : kept)
        if (std::abs(a.x - k.x) < z && std::abs(a.y - k.y) < z) return false;
    return true;
}

}  // namespace

std::vector<SeedPoint> dog_extrema(const GrayImage& img, const DetectorOptions& opts) {
    const int s = opts.octave_layers;
    require(s >= 1, "dog_extrema: octave_layers must be >= 1");
    const double threshold = opts.contrast_threshold / s;
    const double edge = (opts.edge_ratio + 1) * (opts.edge_ratio + 1) / opts.edge_ratio;

    std::vector<SeedPoint> out;
    Plane base = blur(to_plane(img), std::sqrt(std::max(opts.sigma * opts.sigma - kAssumedBlur * kAssumedBlur, 0.01)));

    std::vector<double> sig(s + 3);
    sig[0] = opts.sigma;
    for (int i = 1; i < s + 3; ++i) {
        const double prev = opts.sigma * std::pow(2.0, (i - 1.0) / s);
        const double total = prev * std::pow(2.0, 1.0 / s);
        sig[i] = std::sqrt(total * total - prev * prev);
    }

    for (int octave = 0; std::min(base.w, base.h) >= 8; ++octave) {
        std::vector<Plane> gauss{base};
        for (int i = 1; i < s + 3; ++i) gauss.push_back(blur(gauss.back(), sig[i]));
        std::vector<Plane> dog;
        for (int i = 0; i + 1 < static_cast<int>(gauss.size()); ++i) {
            Plane d(base.w, base.h);
            for (std::size_t k = 0; k < d.v.size(); ++k) d.v[k] = gauss[i + 1].v[k] - gauss[i].v[k];
            dog.push_back(std::move(d));
        }

        for (int layer = 1; layer <= s; ++layer) {
            const Plane& prev = dog[layer - 1];
            const Plane& cur = dog[layer];
            const Plane& next = dog[layer + 1];
            for (int y = 1; y < cur.h - 1; ++y) {
                for (int x = 1; x < cur.w - 1; ++x) {
                    const double v = cur.at(x, y);
                    if (std::fabs(v) < threshold) continue;
                    bool is_max = true;
                    bool is_min = true;
                    for (int dy = -1; dy <= 1 && (is_max || is_min); ++dy)
                        for (int dx = -1; dx <= 1; ++dx) {
                            for (const Plane* pl : {&prev, &cur, &next}) {
                                if (pl == &cur && dx == 0 && dy == 0) continue;
                                const double u = pl->at(x + dx, y + dy);
                                if (u >= v) is_max = false;
                                if (u <= v) is_min = false;
                            }
                        }
                    if (!is_max && !is_min) continue;
                    const double dxx = cur.at(x + 1, y) + cur.at(x - 1, y) - 2 * v;
                    const double dyy = cur.at(x, y + 1) + cur.at(x, y - 1) - 2 * v;
                    const double dxy = 0.25 * (cur.at(x + 1, y + 1) - cur.at(x - 1, y + 1) - cur.at(x + 1, y - 1) +
                                               cur.at(x - 1, y - 1));
                    const double tr = dxx + dyy;
                    const double det = dxx * dyy - dxy * dxy;
                    if (det <= 0 || tr * tr / det >= edge) continue;

                    SeedPoint p;
                    p.x = std::min(img.width() - 1, x << octave);
                    p.y = std::min(img.height() - 1, y << octave);
                    p.response = std::fabs(v);
                    p.scale = opts.sigma * std::pow(2.0, octave + static_cast<double>(layer) / s);
                    out.push_back(p);
                }
            }
        }
        base = downsample(gauss[s]);
    }
    return out;
}

void compute_descriptor(const GrayImage& img, SeedPoint& p) {
    require(p.x >= 0 && p.x < img.width() && p.y >= 0 && p.y < img.height(), "compute_descriptor: point outside image");
    fill_descriptor(descriptor_field(img), p);
}

std::vector<SeedPoint> detect_seed_points(const GrayImage& img, int z, const DetectorOptions& opts) {
    require(z >= 1, "detect_seed_points: window must be positive");
    require(img.width() >= z && img.height() >= z, "detect_seed_points: image smaller than the window");

    const GradientField field = descriptor_field(img);
    std::vector<SeedPoint> candidates = dog_extrema(img, opts);
    for (auto& c : candidates) fill_descriptor(field, c);

    auto key = [&](const SeedPoint& p) { return opts.order == SeedOrder::Response ? p.response : p.descriptor_mass; };
    std::stable_sort(candidates.begin(), candidates.end(), [&](const SeedPoint& a, const SeedPoint& b) {
        if (key(a) != key(b)) return key(a) > key(b);
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });

    std::vector<SeedPoint> kept;
    for (const auto& c : candidates)
        if (separated(c, kept, z)) kept.push_back(c);

    if (static_cast<int>(kept.size()) < opts.min_points) {
        for (int y = z / 2; y < img.height(); y += z)
            for (int x = z / 2; x < img.width(); x += z) {
                SeedPoint g;
                g.x = x;
                g.y = y;
                g.scale = z / 4.0;
                if (!separated(g, kept, z)) continue;
                fill_descriptor(field, g);
                kept.push_back(g);
            }
    }
    return kept;
}

}  // namespace scefis

#include <algorithm>
#include <cmath>
#include <limits>

#include "scefis/error.hpp"
#include "scefis/segmenters.hpp"

namespace scefis {
namespace {

constexpr double kInit = 0.99999;
constexpr double kTolerance = 1e-6;
constexpr int kMaxIterations = 100;
constexpr double kClamp = 1e-12;

double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

double log_add(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

BinaryMask staple_fuse(const std::vector<BinaryMask>& masks, StapleTrace* trace) {
    require(!masks.empty(), "staple_fuse: at least one mask required");
    for (const auto& m : masks) require(m.same_shape(masks.front()), "staple_fuse: mask dimensions differ");
    const std::size_t raters = masks.size();
    const std::size_t n = masks.front().size();

    double prior = 0.0;
    for (const auto& m : masks) prior += static_cast<double>(m.count()) / static_cast<double>(n);
    prior /= static_cast<double>(raters);

    std::vector<double> p(raters, kInit), q(raters, kInit), w(n, 0.0);
    const double log_f = safe_log(prior);
    const double log_nf = safe_log(1.0 - prior);
    double prev_ll = -std::numeric_limits<double>::infinity();
    double ll = 0.0;
    int it = 0;
    for (; it < kMaxIterations; ++it) {
        // E-step
        ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double la = log_f;
            double lb = log_nf;
            for (std::size_t j = 0; j < raters; ++j) {
                const bool d = masks[j][i];
                la += std::log(d ? p[j] : 1.0 - p[j]);
                lb += std::log(d ? 1.0 - q[j] : q[j]);
            }
            const double lz = log_add(la, lb);
            w[i] = la == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(la - lz);
            ll += lz;
        }
        // M-step
        for (std::size_t j = 0; j < raters; ++j) {
            double tp = 0, pos = 0, tn = 0, neg = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const bool d = masks[j][i];
                pos += w[i];
                neg += 1.0 - w[i];
                if (d) tp += w[i];
                else tn += 1.0 - w[i];
            }
            if (pos > 0.0) p[j] = std::clamp(tp / pos, kClamp, 1.0 - kClamp);
            if (neg > 0.0) q[j] = std::clamp(tn / neg, kClamp, 1.0 - kClamp);
        }
        if (std::fabs(ll - prev_ll) < kTolerance) {
            ++it;
            break;
        }
        prev_ll = ll;
    }

    BinaryMask out(masks.front().width(), masks.front().height());
    for (std::size_t i = 0; i < n; ++i) out.set(i, w[i] >= 0.5);
    if (raters == 1) out = masks.front();
    if (trace) {
        trace->iterations = it;
        trace->sensitivity = p;
        trace->specificity = q;
        trace->posterior = w;
        trace->log_likelihood = ll;
    }
    return out;
}

}  // namespace scefis

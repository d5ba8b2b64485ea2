#include "scefis/metrics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>

#include "scefis/error.hpp"

namespace scefis {

double jaccard(const BinaryMask& s, const BinaryMask& g) {
    require(s.same_shape(g), "jaccard: mask dimensions differ");
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto a = s.raw();
    const auto b = g.raw();
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += a[i] & b[i];
        uni += a[i] | b[i];
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

// Shifted accumulation: a constant vector averages to exactly its value.
double mean_of(std::span<const double> v) {
    require(!v.empty(), "mean_of: empty input");
    const double ref = v[0];
    double acc = 0.0;
    for (double x : v) acc += x - ref;
    return ref + acc / static_cast<double>(v.size());
}

double median_of(std::span<const double> v) {
    require(!v.empty(), "median_of: empty input");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    return n % 2 == 1 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

double sample_sd(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double student_t_quantile(double p, double dof) {
    require(p > 0.0 && p < 1.0 && dof > 0.0, "student_t_quantile: bad arguments");
    boost::math::students_t dist(dof);
    return boost::math::quantile(dist, p);
}

ScoreSummary summarize(std::span<const double> scores) {
    require(!scores.empty(), "summarize: empty score list");
    ScoreSummary s;
    s.n = scores.size();
    s.mean = mean_of(scores);
    s.sd = sample_sd(scores);
    s.ci_lo = s.ci_hi = s.mean;
    if (s.n >= 2 && s.sd > 0.0) {
        const double half = student_t_quantile(0.975, static_cast<double>(s.n - 1)) * s.sd /
                            std::sqrt(static_cast<double>(s.n));
        s.ci_lo = s.mean - half;
        s.ci_hi = s.mean + half;
    }
    return s;
}

namespace {

double two_sided_p(double t, double dof) {
    boost::math::students_t dist(dof);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t))), 0.0, 1.0);
}

}  // namespace

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b) {
    require(a.size() == b.size(), "paired_t_test: length mismatch");
    require(a.size() >= 2, "paired_t_test: need at least two pairs");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    TTestResult r;
    r.dof = static_cast<double>(d.size() - 1);
    if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) return r;
    const double m = mean_of(d);
    const double sd = sample_sd(d);
    if (sd == 0.0) {
        r.t = m > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
        return r;
    }
    r.t = m / (sd / std::sqrt(static_cast<double>(d.size())));
    r.p = two_sided_p(r.t, r.dof);
    return r;
}

TTestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    require(a.size() >= 2 && b.size() >= 2, "welch_t_test: need at least two samples per group");
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double va = std::pow(sample_sd(a), 2) / na;
    const double vb = std::pow(sample_sd(b), 2) / nb;
    const double diff = mean_of(a) - mean_of(b);
    TTestResult r;
    if (va + vb == 0.0) {
        r.dof = na + nb - 2.0;
        if (diff != 0.0) {
            r.t = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
            r.p = 0.0;
        }
        return r;
    }
    r.t = diff / std::sqrt(va + vb);
    r.dof = (va + vb) * (va + vb) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    r.p = two_sided_p(r.t, r.dof);
    return r;
}

}  // namespace scefis

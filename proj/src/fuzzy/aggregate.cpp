#include <algorithm>
#include <cmath>

#include "scefis/error.hpp"
#include "scefis/fuzzy.hpp"
#include "scefis/metrics.hpp"

namespace scefis {

double zmf(double x, double a, double b) {
    require(a < b, "zmf: breakpoints must satisfy a < b");
    if (x <= a) return 1.0;
    if (x >= b) return 0.0;
    const double mid = 0.5 * (a + b);
    if (x <= mid) {
        const double t = (x - a) / (b - a);
        return 1.0 - 2.0 * t * t;
    }
    const double t = (x - b) / (b - a);
    return 2.0 * t * t;
}

double aggregate(const Eigen::VectorXd& t_o, std::optional<std::pair<double, double>> range) {
    require(t_o.size() > 0, "aggregate: empty output vector");
    const std::span<const double> v(t_o.data(), static_cast<std::size_t>(t_o.size()));
    const double mu = mean_of(v);
    const double md = median_of(v);
    const double sd = sample_sd(v);
    const double m = mu > 0.0 ? zmf(sd, 0.10 * mu, 0.20 * mu) : (sd == 0.0 ? 1.0 : 0.0);
    double t = m * mu + (1.0 - m) * md;
    if (range) t = std::clamp(t, range->first, range->second);
    return t;
}

}  // namespace scefis

#include <algorithm>
#include <cmath>
#include <limits>

#include "scefis/error.hpp"
#include "scefis/fuzzy.hpp"

namespace scefis {

std::vector<int> subtractive_clustering(const Eigen::MatrixXd& x, const ClusteringOptions& opts) {
    require(x.rows() >= 1, "subtractive_clustering: no data");
    require(opts.radius > 0.0 && opts.squash > 0.0, "subtractive_clustering: bad radius");
    const Eigen::Index n = x.rows();

    Eigen::MatrixXd u(n, x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double lo = x.col(j).minCoeff();
        const double hi = x.col(j).maxCoeff();
        if (hi > lo)
            u.col(j) = (x.col(j).array() - lo) / (hi - lo);
        else
            u.col(j).setZero();
    }

    const double alpha = 4.0 / (opts.radius * opts.radius);
    const double rb = opts.squash * opts.radius;
    const double beta = 4.0 / (rb * rb);

    Eigen::MatrixXd d2(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j) d2(i, j) = d2(j, i) = (u.row(i) - u.row(j)).squaredNorm();

    Eigen::VectorXd pot(n);
    for (Eigen::Index i = 0; i < n; ++i) pot(i) = (-alpha * d2.row(i).array()).exp().sum();

    std::vector<int> centers;
    Eigen::Index first = 0;
    pot.maxCoeff(&first);  // lowest index on ties
    const double ref = pot(first);
    centers.push_back(static_cast<int>(first));
    Eigen::Index last = first;
    double last_pot = ref;

    while (static_cast<Eigen::Index>(centers.size()) < n) {
        for (Eigen::Index i = 0; i < n; ++i) pot(i) = std::max(0.0, pot(i) - last_pot * std::exp(-beta * d2(i, last)));
        bool accepted = false;
        while (true) {
            Eigen::Index k = 0;
            const double pk = pot.maxCoeff(&k);
            if (pk <= 0.0 || pk < opts.reject * ref) break;
            bool take = pk > opts.accept * ref;
            if (!take) {
                double dmin = std::numeric_limits<double>::infinity();
                for (int c : centers) dmin = std::min(dmin, std::sqrt(d2(k, c)));
                take = dmin / opts.radius + pk / ref >= 1.0;
            }
            if (take) {
                centers.push_back(static_cast<int>(k));
                last = k;
                last_pot = pk;
                accepted = true;
                break;
            }
            pot(k) = 0.0;
        }
        if (!accepted) break;
    }
    return centers;
}

}  // namespace scefis

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "scefis/error.hpp"
#include "scefis/featsel.hpp"

namespace scefis {

Eigen::MatrixXd knn_affinity(const Eigen::MatrixXd& x, int k, double bandwidth) {
    const Eigen::Index n = x.rows();
    require(n >= 2, "knn_affinity: need at least two rows");
    k = std::clamp(k, 1, static_cast<int>(n - 1));

    Eigen::MatrixXd dist(n, n);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        dist(i, i) = 0.0;
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double d = (x.row(i) - x.row(j)).norm();
            dist(i, j) = dist(j, i) = d;
            sum += d;
        }
    }
    if (bandwidth <= 0.0) bandwidth = sum / (0.5 * static_cast<double>(n) * (n - 1));
    if (!(bandwidth > 0.0)) bandwidth = 1.0;

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::Index> order(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::iota(order.begin(), order.end(), Eigen::Index{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](Eigen::Index a, Eigen::Index b) { return dist(i, a) < dist(i, b); });
        int taken = 0;
        for (Eigen::Index j : order) {
            if (j == i) continue;
            const double s = std::exp(-dist(i, j) * dist(i, j) / (2.0 * bandwidth * bandwidth));
            w(i, j) = s;
            w(j, i) = s;
            if (++taken == k) break;
        }
    }
    return w;
}

Eigen::VectorXd laplacian_scores(const Eigen::MatrixXd& x, const Eigen::MatrixXd& affinity) {
    require(affinity.rows() == x.rows() && affinity.cols() == x.rows(), "laplacian_scores: affinity shape mismatch");
    const Eigen::VectorXd d = affinity.rowwise().sum();
    const double dsum = d.sum();
    Eigen::VectorXd scores(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const Eigen::VectorXd f = x.col(j);
        const double shift = f.dot(d) / dsum;
        const Eigen::VectorXd ft = f.array() - shift;
        const double den = (ft.array().square() * d.array()).sum();
        if (den <= 1e-14) {
            scores(j) = std::numeric_limits<double>::infinity();
            continue;
        }
        const double num = den - ft.dot(affinity * ft);
        scores(j) = num / den;
    }
    return scores;
}

}  // namespace scefis

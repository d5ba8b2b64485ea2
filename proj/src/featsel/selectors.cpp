// The five unsupervised selectors plus the correlation selector.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "scefis/error.hpp"
#include "scefis/featsel.hpp"

namespace scefis {

std::string to_string(SelectorMethod m) {
    switch (m) {
        case SelectorMethod::Correlation: return "correlation";
        case SelectorMethod::FeatureSimilarity: return "feature_similarity";
        case SelectorMethod::Laplacian: return "laplacian";
        case SelectorMethod::Spectral: return "spectral";
        case SelectorMethod::MultiCluster: return "multi_cluster";
        case SelectorMethod::Greedy: return "greedy";
    }
    return "unknown";
}

SelectorMethod selector_from_string(const std::string& s) {
    for (auto m : kAllSelectors)
        if (to_string(m) == s) return m;
    throw ContractViolation("unknown selector method: " + s);
}

namespace {

// Indices sorted by score; ascending when `smaller_better`. Ties keep the lower index.
std::vector<int> rank_by(const Eigen::VectorXd& scores, bool smaller_better) {
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return smaller_better ? scores(a) < scores(b) : scores(a) > scores(b);
    });
    return idx;
}

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Smallest eigenvalue of the 2x2 covariance of two columns (maximal information compression index).
double mici(double vx, double vy, double rho) {
    const double s = vx + vy;
    const double disc = std::max(0.0, s * s - 4.0 * vx * vy * (1.0 - rho * rho));
    return 0.5 * (s - std::sqrt(disc));
}

std::vector<int> feature_similarity(const Eigen::MatrixXd& z, int m) {
    const int n = static_cast<int>(z.cols());
    const double rows = static_cast<double>(z.rows());
    std::vector<double> var(n);
    for (int j = 0; j < n; ++j) var[j] = z.col(j).squaredNorm() / rows;
    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const double rho = (var[i] > 0 && var[j] > 0) ? z.col(i).dot(z.col(j)) / rows / std::sqrt(var[i] * var[j]) : 0.0;
            d(i, j) = d(j, i) = mici(var[i], var[j], std::clamp(rho, -1.0, 1.0));
        }

    std::vector<int> remaining(n);
    std::iota(remaining.begin(), remaining.end(), 0);
    while (static_cast<int>(remaining.size()) > m) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t drop = 0;
        for (std::size_t a = 0; a < remaining.size(); ++a) {
            double nn = std::numeric_limits<double>::infinity();
            for (std::size_t b = 0; b < remaining.size(); ++b)
                if (a != b) nn = std::min(nn, d(remaining[a], remaining[b]));
            // keep-first: a later feature wins ties for removal
            if (nn <= best) {
                best = nn;
                drop = a;
            }
        }
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    return remaining;
}

int capped(int requested, Eigen::Index rows) { return std::clamp(requested, 1, static_cast<int>(std::max<Eigen::Index>(rows - 1, 1))); }

// Separability score using the leading nontrivial eigenvectors of the normalized Laplacian (larger is better).
Eigen::VectorXd spectral_scores(const Eigen::MatrixXd& z, const Eigen::MatrixXd& w, int clusters) {
    const Eigen::Index n = z.rows();
    const Eigen::VectorXd deg = w.rowwise().sum();
    const Eigen::VectorXd dhalf = deg.array().sqrt();
    const Eigen::VectorXd dinv = dhalf.array().inverse();
    Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n) - dinv.asDiagonal() * w * dinv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
    const Eigen::VectorXd& lambda = es.eigenvalues();
    const Eigen::MatrixXd& xi = es.eigenvectors();
    const int last = std::min<int>(clusters, static_cast<int>(n) - 1);

    Eigen::VectorXd scores(z.cols());
    for (Eigen::Index j = 0; j < z.cols(); ++j) {
        Eigen::VectorXd fh = dhalf.cwiseProduct(z.col(j));
        const double norm = fh.norm();
        if (norm <= 1e-12) {
            scores(j) = -std::numeric_limits<double>::infinity();
            continue;
        }
        fh /= norm;
        double s = 0.0;
        for (int k = 1; k <= last; ++k) {
            const double alpha = xi.col(k).dot(fh);
            s += (2.0 - lambda(k)) * alpha * alpha;
        }
        scores(j) = s;
    }
    return scores;
}

// Max absolute ridge coefficient over the spectral embedding (larger is better).
Eigen::VectorXd multi_cluster_scores(const Eigen::MatrixXd& z, const Eigen::MatrixXd& w, int clusters, double ridge) {
    const Eigen::Index n = z.rows();
    const Eigen::VectorXd deg = w.rowwise().sum();
    const Eigen::MatrixXd lap = Eigen::MatrixXd(deg.asDiagonal()) - w;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(lap, Eigen::MatrixXd(deg.asDiagonal()));
    const int last = std::min<int>(clusters, static_cast<int>(n) - 1);
    const Eigen::MatrixXd y = es.eigenvectors().middleCols(1, last);

    const Eigen::MatrixXd gram = z.transpose() * z + ridge * Eigen::MatrixXd::Identity(z.cols(), z.cols());
    const Eigen::MatrixXd coef = gram.ldlt().solve(z.transpose() * y);
    Eigen::VectorXd scores = coef.cwiseAbs().rowwise().maxCoeff();
    return scores;
}

}  // namespace

GreedyTrace greedy_reconstruction(const Eigen::MatrixXd& a, int m) {
    require(m >= 0 && m <= a.cols(), "greedy_reconstruction: m out of range");
    GreedyTrace trace;
    Eigen::MatrixXd e = a;
    const double tol = 1e-12 * std::max(1.0, a.squaredNorm());
    std::vector<bool> used(a.cols(), false);
    for (int step = 0; step < m; ++step) {
        int best = -1;
        double best_gain = -1.0;
        for (Eigen::Index c = 0; c < a.cols(); ++c) {
            if (used[c]) continue;
            const double nc = e.col(c).squaredNorm();
            if (nc <= tol) continue;
            const double gain = (e.transpose() * e.col(c)).squaredNorm() / nc;
            if (gain > best_gain) {
                best_gain = gain;
                best = static_cast<int>(c);
            }
        }
        if (best < 0) {
            for (Eigen::Index c = 0; c < a.cols(); ++c)
                if (!used[c]) {
                    best = static_cast<int>(c);
                    break;
                }
        } else {
            const Eigen::VectorXd ec = e.col(best);
            const Eigen::RowVectorXd proj = ec.transpose() * e / ec.squaredNorm();
            e -= ec * proj;
        }
        used[best] = true;
        trace.order.push_back(best);
        trace.residual.push_back(e.squaredNorm());
    }
    return trace;
}

SelectorResult run_selector(SelectorMethod method, const Eigen::MatrixXd& f, int m, const SelectorOptions& opts) {
    const int width = static_cast<int>(f.cols());
    require(m >= 0 && m <= width, "run_selector: m exceeds the number of features");
    SelectorResult r;
    r.method = method;
    r.universe.resize(width);
    std::iota(r.universe.begin(), r.universe.end(), 0);
    if (m == 0) return r;
    require(f.rows() >= 2, "run_selector: need at least two rows");

    const Eigen::MatrixXd z = standardize_columns(f);
    switch (method) {
        case SelectorMethod::Correlation: {
            r.columns = drop_correlated(f, 0.90);
            if (static_cast<int>(r.columns.size()) > m) {
                r.columns.resize(m);
            } else if (static_cast<int>(r.columns.size()) < m) {
                // Pad with the least-redundant remaining columns.
                std::vector<std::pair<double, int>> rest;
                for (int j = 0; j < width; ++j) {
                    if (std::find(r.columns.begin(), r.columns.end(), j) != r.columns.end()) continue;
                    double worst = 0.0;
                    for (int k : r.columns) worst = std::max(worst, std::fabs(pearson(f.col(j), f.col(k))));
                    rest.emplace_back(worst, j);
                }
                std::stable_sort(rest.begin(), rest.end(),
                                 [](const auto& a, const auto& b) { return a.first < b.first; });
                for (const auto& [_, j] : rest) {
                    if (static_cast<int>(r.columns.size()) == m) break;
                    r.columns.push_back(j);
                }
            }
            break;
        }
        case SelectorMethod::FeatureSimilarity:
            r.columns = feature_similarity(z, m);
            break;
        case SelectorMethod::Laplacian: {
            const auto w = knn_affinity(z, capped(opts.knn, z.rows()), opts.bandwidth);
            const Eigen::VectorXd s = laplacian_scores(z, w);
            auto order = rank_by(s, true);
            order.resize(m);
            r.columns = order;
            r.scores = to_vector(s);
            break;
        }
        case SelectorMethod::Spectral: {
            const auto w = knn_affinity(z, capped(opts.knn, z.rows()), opts.bandwidth);
            const Eigen::VectorXd s = spectral_scores(z, w, capped(opts.clusters, z.rows()));
            auto order = rank_by(s, false);
            order.resize(m);
            r.columns = order;
            r.scores = to_vector(s);
            break;
        }
        case SelectorMethod::MultiCluster: {
            const auto w = knn_affinity(z, capped(opts.knn, z.rows()), opts.bandwidth);
            const Eigen::VectorXd s = multi_cluster_scores(z, w, capped(opts.clusters, z.rows()), opts.ridge);
            auto order = rank_by(s, false);
            order.resize(m);
            r.columns = order;
            r.scores = to_vector(s);
            break;
        }
        case SelectorMethod::Greedy: {
            const auto g = greedy_reconstruction(z, m);
            r.columns = g.order;
            r.scores = g.residual;
            break;
        }
    }
    return r;
}

std::vector<int> ensemble_vote(const std::vector<SelectorResult>& results) {
    require(results.size() == 6, "ensemble_vote: exactly six selector results required");
    const auto& universe = results.front().universe;
    for (const auto& r : results) {
        require(r.universe == universe, "ensemble_vote: selectors disagree on the column universe");
        for (int c : r.columns)
            require(std::binary_search(universe.begin(), universe.end(), c), "ensemble_vote: column outside universe");
    }
    std::vector<int> out;
    for (int c : universe) {
        int votes = 0;
        for (const auto& r : results)
            if (std::find(r.columns.begin(), r.columns.end(), c) != r.columns.end()) ++votes;
        if (votes >= 3) out.push_back(c);
    }
    return out;
}

}  // namespace scefis

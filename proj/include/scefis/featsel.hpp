#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

namespace scefis {

enum class SelectorMethod { Correlation, FeatureSimilarity, Laplacian, Spectral, MultiCluster, Greedy };

inline constexpr std::array<SelectorMethod, 6> kAllSelectors = {
    SelectorMethod::Correlation, SelectorMethod::FeatureSimilarity, SelectorMethod::Laplacian,
    SelectorMethod::Spectral,    SelectorMethod::MultiCluster,      SelectorMethod::Greedy};

std::string to_string(SelectorMethod m);
SelectorMethod selector_from_string(const std::string& s);

struct SelectorResult {
    SelectorMethod method = SelectorMethod::Correlation;
    std::vector<int> columns;   ///< selected column ids, ranked per method
    std::vector<int> universe;  ///< column ids the selector chose from (ascending)
    std::vector<double> scores; ///< per-column method score, aligned with `universe` (empty if not ranked)
};

/// Graph and regression settings shared by the spectral-family selectors.
struct SelectorOptions {
    int knn = 5;              ///< capped at L-1
    double bandwidth = 0.0;   ///< <= 0: mean pairwise Euclidean distance
    int clusters = 5;         ///< eigenvectors for multi-cluster / spectral, capped at L-1
    double ridge = 1.0;       ///< multi-cluster regression penalty
};

struct SelectionTrace {
    int n_t1 = 0;
    int n_t2 = 0;
    int n_t3 = 0;
    int n_l = 0;
    std::vector<int> kept_after_99;  ///< F_4 columns
    std::vector<SelectorResult> per_method;
    std::vector<int> voted;           ///< every column with >= 3 votes
    std::vector<int> vote_survivors;  ///< F_5 columns: `voted` capped at n_t2, most votes first
    bool capped = false;
    std::vector<int> final_columns;   ///< F* columns
    bool used_fallback = false;
};

/// Population Pearson correlation; 0 when either column has zero variance.
double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/**
 * Left-to-right scan keeping a column iff |r| < tau with every kept column.
 *
 * Zero-variance columns correlate as 0, but only the first of them (and none that
 * duplicates a kept column exactly) is kept. Returns positions into `f`'s columns.
 */
std::vector<int> drop_correlated(const Eigen::MatrixXd& f, double tau);

/// Zero-mean, unit-sd columns (population sd); zero-variance columns become zero.
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& f);

/// Symmetric k-NN Gaussian affinity over the rows of `x`.
Eigen::MatrixXd knn_affinity(const Eigen::MatrixXd& x, int k, double bandwidth);

/// He et al. score per column (smaller is better); zero columns score +inf.
Eigen::VectorXd laplacian_scores(const Eigen::MatrixXd& x, const Eigen::MatrixXd& affinity);

/// Frobenius reconstruction error ||A - P_S A||^2 after each greedy pick.
struct GreedyTrace {
    std::vector<int> order;
    std::vector<double> residual;
};
GreedyTrace greedy_reconstruction(const Eigen::MatrixXd& a, int m);

/**
 * Runs one selector on `f` (columns are candidate features) and returns `m` column
 * positions of `f`. The correlation method is handled by drop_correlated (tau 0.90) and
 * truncated to `m`.
 */
SelectorResult run_selector(SelectorMethod method, const Eigen::MatrixXd& f, int m,
                            const SelectorOptions& opts = {});

/// Indices present in at least 3 of the 6 results, ascending.
std::vector<int> ensemble_vote(const std::vector<SelectorResult>& results);

/// Full self-selection chain over the stacked L x 108 F_3 matrix.
SelectionTrace self_select(const Eigen::MatrixXd& f3, const SelectorOptions& opts = {});

/// Human-readable trace: stage widths and index lists.
std::string format_trace(const SelectionTrace& trace);

}  // namespace scefis

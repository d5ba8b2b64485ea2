#include <algorithm>
#include <cmath>

#include "scefis/error.hpp"
#include "scefis/keyfeat.hpp"
#include "scefis/metrics.hpp"

namespace scefis {

int compute_window_size(const std::vector<std::pair<int, int>>& dims_rows_cols) {
    require(!dims_rows_cols.empty(), "compute_window_size: no image dimensions");
    std::vector<double> rows;
    std::vector<double> cols;
    for (const auto& [r, c] : dims_rows_cols) {
        require(r > 0 && c > 0, "compute_window_size: dimensions must be positive");
        rows.push_back(r);
        cols.push_back(c);
    }
    const double side = 0.1 * std::max(median_of(rows), median_of(cols));
    return std::max(kMinWindow, static_cast<int>(std::lround(side)));
}

Eigen::RowVectorXd Normalization::apply(const Eigen::RowVectorXd& row) const {
    require(row.size() == static_cast<Eigen::Index>(mean.size()), "Normalization: width mismatch");
    Eigen::RowVectorXd out(row.size());
    for (Eigen::Index j = 0; j < row.size(); ++j) out(j) = (row(j) - mean[j]) / sd[j];
    return out;
}

Eigen::MatrixXd Normalization::apply(const Eigen::MatrixXd& rows) const {
    Eigen::MatrixXd out(rows.rows(), rows.cols());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) out.row(i) = apply(Eigen::RowVectorXd(rows.row(i)));
    return out;
}

Normalization Normalization::fit(const Eigen::MatrixXd& rows) {
    require(rows.rows() >= 1, "Normalization::fit: no rows");
    Normalization n;
    for (Eigen::Index j = 0; j < rows.cols(); ++j) {
        std::vector<double> col(rows.rows());
        for (Eigen::Index i = 0; i < rows.rows(); ++i) col[i] = rows(i, j);
        const double m = mean_of(col);
        double ss = 0.0;
        for (double v : col) ss += (v - m) * (v - m);
        const double sd = std::sqrt(ss / static_cast<double>(col.size()));
        n.mean.push_back(m);
        n.sd.push_back(sd > 1e-12 ? sd : 1.0);
    }
    return n;
}

Normalization Normalization::identity(int dim) {
    Normalization n;
    n.mean.assign(dim, 0.0);
    n.sd.assign(dim, 1.0);
    return n;
}

void SelfConfig::validate() const {
    require(window_z >= kMinWindow, "SelfConfig: window_z below 8");
    require(n_total_features == kNumFeatures, "SelfConfig: n_total_features must be 108");
    require(!selected_columns.empty(), "SelfConfig: no selected columns");
    for (std::size_t i = 0; i < selected_columns.size(); ++i) {
        require(selected_columns[i] >= 0 && selected_columns[i] < kNumFeatures, "SelfConfig: column out of range");
        if (i > 0) require(selected_columns[i] > selected_columns[i - 1], "SelfConfig: columns not increasing");
    }
    if (!normalization.empty())
        require(normalization.mean.size() == selected_columns.size(), "SelfConfig: normalization width mismatch");
}

}  // namespace scefis

#include <cmath>

#include "scefis/error.hpp"
#include "scefis/featsel.hpp"

namespace scefis {
namespace {

constexpr double kZeroVariance = 1e-24;

double centered_norm2(const Eigen::VectorXd& v) {
    const double m = v.mean();
    return (v.array() - m).square().sum();
}

}  // namespace

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    require(a.size() == b.size(), "pearson: length mismatch");
    const Eigen::ArrayXd da = a.array() - a.mean();
    const Eigen::ArrayXd db = b.array() - b.mean();
    const double saa = da.square().sum();
    const double sbb = db.square().sum();
    if (saa <= kZeroVariance * a.size() || sbb <= kZeroVariance * b.size()) return 0.0;
    return std::clamp((da * db).sum() / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::vector<int> drop_correlated(const Eigen::MatrixXd& f, double tau) {
    require(f.rows() >= 2, "drop_correlated: need at least two rows");
    require(tau > 0.0 && tau <= 1.0, "drop_correlated: tau must lie in (0,1]");
    std::vector<int> kept;
    bool zero_var_kept = false;
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
        const Eigen::VectorXd col = f.col(j);
        const bool zero_var = centered_norm2(col) <= kZeroVariance * f.rows();
        bool keep = true;
        for (int k : kept) {
            if (f.col(k) == col) {
                keep = false;
                break;
            }
        }
        if (keep && zero_var && zero_var_kept) keep = false;
        if (keep && !zero_var) {
            for (int k : kept) {
                if (std::fabs(pearson(col, f.col(k))) >= tau) {
                    keep = false;
                    break;
                }
            }
        }
        if (keep) {
            kept.push_back(static_cast<int>(j));
            zero_var_kept = zero_var_kept || zero_var;
        }
    }
    return kept;
}

Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& f) {
    Eigen::MatrixXd out(f.rows(), f.cols());
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
        const double m = f.col(j).mean();
        const Eigen::ArrayXd d = f.col(j).array() - m;
        const double sd = std::sqrt(d.square().sum() / static_cast<double>(f.rows()));
        if (sd * sd <= kZeroVariance)
            out.col(j).setZero();
        else
            out.col(j) = (d / sd).matrix();
    }
    return out;
}

}  // namespace scefis

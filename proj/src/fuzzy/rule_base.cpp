#include <cmath>
#include <limits>

#include "scefis/error.hpp"
#include "scefis/fuzzy.hpp"

namespace scefis {
namespace {

constexpr double kDegenerateFiring = 1e-12;

Eigen::VectorXd log_firing(const std::vector<Rule>& rules, const Eigen::RowVectorXd& x) {
    Eigen::VectorXd lf(static_cast<Eigen::Index>(rules.size()));
    for (std::size_t r = 0; r < rules.size(); ++r) {
        const auto& rule = rules[r];
        lf(static_cast<Eigen::Index>(r)) =
            -0.5 * ((x.transpose() - rule.center).array() / rule.sigma.array()).square().sum();
    }
    return lf;
}

double evaluate(const Rule& rule, const Eigen::RowVectorXd& x) {
    const Eigen::Index d = x.size();
    return rule.consequent.head(d).dot(x.transpose()) + rule.consequent(d);
}

}  // namespace

RuleBaseSettings default_settings(int input_dim, double parameter_span, Normalization normalization) {
    RuleBaseSettings s;
    s.eps_x = 0.10 * std::sqrt(static_cast<double>(input_dim));
    s.eps_o = 0.05 * parameter_span;
    s.normalization = normalization.empty() ? Normalization::identity(input_dim) : std::move(normalization);
    return s;
}

Eigen::VectorXd firing_weights(const std::vector<Rule>& rules, const Eigen::RowVectorXd& x) {
    require(!rules.empty(), "firing_weights: empty rule base");
    const Eigen::VectorXd lf = log_firing(rules, x);
    Eigen::Index best = 0;
    const double top = lf.maxCoeff(&best);
    Eigen::VectorXd w = (lf.array() - top).exp();
    const double scaled_total = w.sum();
    // Total firing below the floor: fall back to the nearest rule.
    if (!std::isfinite(top) || std::exp(top) * scaled_total < kDegenerateFiring) {
        w.setZero();
        w(best) = 1.0;
        return w;
    }
    return w / scaled_total;
}

RuleBase generate_rules(const Eigen::MatrixXd& m, const Eigen::VectorXd& o, const RuleBaseSettings& settings) {
    require(m.rows() >= 1, "generate_rules: empty training matrix");
    require(m.rows() == o.size(), "generate_rules: |O| != rows(M)");
    const Eigen::Index n = m.rows();
    const Eigen::Index d = m.cols();

    RuleBase rb;
    rb.input_dim = static_cast<int>(d);
    rb.m = m;
    rb.o = o;
    rb.settings = settings;
    if (rb.settings.normalization.empty()) rb.settings.normalization = Normalization::identity(static_cast<int>(d));
    require(static_cast<Eigen::Index>(rb.settings.normalization.mean.size()) == d,
            "generate_rules: normalization width mismatch");

    Eigen::MatrixXd joint(n, d + 1);
    joint << m, o;
    const auto centers = subtractive_clustering(joint, settings.clustering);

    Eigen::VectorXd sigma(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const double range = m.col(j).maxCoeff() - m.col(j).minCoeff();
        sigma(j) = settings.clustering.radius * (range > 1e-12 ? range : 1.0) / std::sqrt(8.0);
    }
    for (int c : centers) rb.rules.push_back({m.row(c).transpose(), sigma, Eigen::VectorXd::Zero(d + 1)});

    if (n == 1) {
        rb.rules.front().consequent(d) = o(0);
        return rb;
    }

    const Eigen::Index r = static_cast<Eigen::Index>(rb.rules.size());
    const Eigen::Index width = r * (d + 1);
    Eigen::MatrixXd phi(n, width);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::RowVectorXd x = m.row(i);
        const Eigen::VectorXd w = firing_weights(rb.rules, x);
        for (Eigen::Index k = 0; k < r; ++k) {
            phi.block(i, k * (d + 1), 1, d) = w(k) * x;
            phi(i, k * (d + 1) + d) = w(k);
        }
    }

    Eigen::VectorXd theta;
    if (settings.consequent_ridge > 0.0) {
        const Eigen::MatrixXd gram = phi.transpose() * phi + settings.consequent_ridge * Eigen::MatrixXd::Identity(width, width);
        theta = gram.ldlt().solve(phi.transpose() * o);
    } else {
        theta = phi.completeOrthogonalDecomposition().solve(o);
    }
    for (Eigen::Index k = 0; k < r; ++k) rb.rules[k].consequent = theta.segment(k * (d + 1), d + 1);
    return rb;
}

double infer_normalized(const RuleBase& rb, const Eigen::RowVectorXd& x) {
    require(x.size() == rb.input_dim, "infer: input width does not match the rule base");
    const Eigen::VectorXd w = firing_weights(rb.rules, x);
    double out = 0.0;
    for (std::size_t k = 0; k < rb.rules.size(); ++k) out += w(static_cast<Eigen::Index>(k)) * evaluate(rb.rules[k], x);
    return out;
}

Eigen::VectorXd infer(const RuleBase& rb, const Eigen::MatrixXd& raw_rows) {
    require(raw_rows.cols() == rb.input_dim, "infer: input width does not match the rule base");
    const Eigen::MatrixXd x = rb.settings.normalization.apply(raw_rows);
    Eigen::VectorXd out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = infer_normalized(rb, x.row(i));
    return out;
}

RuleBase prune_and_evolve(const RuleBase& rb, const Eigen::MatrixXd& raw_rows, double t_b, EvolutionStep* step) {
    require(raw_rows.cols() == rb.input_dim, "prune_and_evolve: input width does not match the rule base");
    const Eigen::MatrixXd x = rb.settings.normalization.apply(raw_rows);
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        bool similar = false;
        for (Eigen::Index j = 0; j < rb.m.rows() && !similar; ++j)
            similar = (x.row(i) - rb.m.row(j)).norm() <= rb.settings.eps_x && std::fabs(t_b - rb.o(j)) <= rb.settings.eps_o;
        if (!similar) keep.push_back(i);
    }
    if (step) {
        step->offered = static_cast<int>(x.rows());
        step->appended = static_cast<int>(keep.size());
    }
    if (keep.empty()) return rb;

    const Eigen::Index old = rb.m.rows();
    Eigen::MatrixXd m(old + static_cast<Eigen::Index>(keep.size()), rb.input_dim);
    Eigen::VectorXd o(m.rows());
    if (old > 0) {
        m.topRows(old) = rb.m;
        o.head(old) = rb.o;
    }
    for (std::size_t k = 0; k < keep.size(); ++k) {
        m.row(old + static_cast<Eigen::Index>(k)) = x.row(keep[k]);
        o(old + static_cast<Eigen::Index>(k)) = t_b;
    }
    return generate_rules(m, o, rb.settings);
}

}  // namespace scefis

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "scefis/keyfeat.hpp"

namespace scefis {

/// Takagi-Sugeno rule: Gaussian antecedents, affine consequent [linear terms..., constant].
struct Rule {
    Eigen::VectorXd center;
    Eigen::VectorXd sigma;
    Eigen::VectorXd consequent;

    bool operator==(const Rule&) const = default;
};

struct ClusteringOptions {
    double radius = 0.5;
    double squash = 1.25;
    double accept = 0.5;
    double reject = 0.15;
};

struct RuleBaseSettings {
    ClusteringOptions clustering;
    double eps_x = 0.0;           ///< input-distance pruning threshold (normalized space)
    double eps_o = 0.0;           ///< output pruning threshold
    double consequent_ridge = 0.0;///< 0: minimum-norm least squares
    Normalization normalization;  ///< applied to raw rows before they reach the rule base
};

/**
 * Rules plus the matrices they were generated from.
 *
 * `m` holds normalized input rows; the rules are a pure function of (m, o, settings),
 * so regenerating from a reloaded file reproduces the same inference.
 */
struct RuleBase {
    std::vector<Rule> rules;
    int input_dim = 0;
    Eigen::MatrixXd m;
    Eigen::VectorXd o;
    RuleBaseSettings settings;

    std::size_t rule_count() const { return rules.size(); }
    Eigen::Index rows() const { return m.rows(); }
};

/// Pruning defaults: eps_x = 0.10 * sqrt(N_L), eps_o = 5% of the parameter span.
RuleBaseSettings default_settings(int input_dim, double parameter_span, Normalization normalization = {});

/// Chiu's subtractive clustering on rows of `x` (scaled to the unit box internally); returns center row indices.
std::vector<int> subtractive_clustering(const Eigen::MatrixXd& x, const ClusteringOptions& opts = {});

/// Rule genesis from normalized inputs `m` and outputs `o`.
RuleBase generate_rules(const Eigen::MatrixXd& m, const Eigen::VectorXd& o, const RuleBaseSettings& settings = {});

/// Normalized firing weights of every rule for one normalized input row.
Eigen::VectorXd firing_weights(const std::vector<Rule>& rules, const Eigen::RowVectorXd& x);

/// Output for one row that is already normalized.
double infer_normalized(const RuleBase& rb, const Eigen::RowVectorXd& x);

/// T_O: one output per raw input row (normalization from the rule base settings is applied).
Eigen::VectorXd infer(const RuleBase& rb, const Eigen::MatrixXd& raw_rows);

/// Standard Z-shaped membership; requires a < b.
double zmf(double x, double a, double b);

/**
 * T* = m * mean + (1 - m) * median with m = zmf(sd, 0.1 mean, 0.2 mean).
 * A non-positive mean gives m = 1 when sd = 0, else 0. The result is clamped to [lo, hi] if given.
 */
double aggregate(const Eigen::VectorXd& t_o, std::optional<std::pair<double, double>> range = std::nullopt);

struct EvolutionStep {
    int offered = 0;
    int appended = 0;
};

/// Appends the rows of `raw_rows` (paired with t_b) that are not already represented, then regenerates.
RuleBase prune_and_evolve(const RuleBase& rb, const Eigen::MatrixXd& raw_rows, double t_b,
                          EvolutionStep* step = nullptr);

// Persistence: versioned JSON text.
std::string rule_base_to_json(const RuleBase& rb);
RuleBase rule_base_from_json(const std::string& text);
void save_rule_base(const RuleBase& rb, const std::filesystem::path& path);
RuleBase load_rule_base(const std::filesystem::path& path);

}  // namespace scefis

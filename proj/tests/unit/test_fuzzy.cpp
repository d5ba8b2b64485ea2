#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "scefis/error.hpp"
#include "scefis/fuzzy.hpp"

using namespace scefis;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Rule make_rule(Eigen::VectorXd center, double sigma, Eigen::VectorXd consequent) {
    const auto d = center.size();
    return {std::move(center), Eigen::VectorXd::Constant(d, sigma), std::move(consequent)};
}

RuleBase manual(std::vector<Rule> rules) {
    RuleBase rb;
    rb.input_dim = static_cast<int>(rules.front().center.size());
    rb.rules = std::move(rules);
    rb.settings.normalization = Normalization::identity(rb.input_dim);
    return rb;
}

}  // namespace

TEST_CASE("zmf plateaus, midpoint and shape") {
    CHECK(zmf(0.5, 1.0, 2.0) == 1.0);
    CHECK(zmf(1.0, 1.0, 2.0) == 1.0);
    CHECK(zmf(2.0, 1.0, 2.0) == 0.0);
    CHECK(zmf(7.0, 1.0, 2.0) == 0.0);
    CHECK(zmf(1.5, 1.0, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    for (double x = 0.0; x <= 3.0; x += 0.01) CHECK(zmf(x, 1.0, 2.0) == doctest::Approx(oracle::zmf(x, 1.0, 2.0)).epsilon(1e-14));
    for (double x = 0.0; x < 3.0; x += 0.01) CHECK(zmf(x + 0.01, 1.0, 2.0) <= zmf(x, 1.0, 2.0));
    CHECK_THROWS_AS(zmf(1.0, 2.0, 2.0), ContractViolation);
}

TEST_CASE("aggregate: equal outputs, wide spread, midpoint spread") {
    CHECK(aggregate(Eigen::VectorXd::Constant(8, 0.37)) == 0.37);
    // median 0.5, mean larger; sd far above 0.2 mu -> median
    const auto wide = vec({0.1, 0.2, 0.5, 0.5, 0.5, 0.9, 0.9, 1.0});
    CHECK(aggregate(wide) == 0.5);

    // Construct sd = 0.15 mu exactly: m = 0.5 -> (mu + Md) / 2.
    Eigen::VectorXd base = vec({-1.0, -0.5, 0.0, 0.0, 0.2, 0.3, 0.4, 0.6});
    base.array() -= base.mean();
    const double sd0 = std::sqrt(base.squaredNorm() / 7.0);
    const double mu = 0.4;
    Eigen::VectorXd t = (base * (0.15 * mu / sd0)).array() + mu;
    const double md = 0.5 * (t(3) + t(4));
    CHECK(std::fabs(aggregate(t) - 0.5 * (mu + md)) < 1e-12);

    CHECK(aggregate(vec({0.9, 1.2}), std::pair{0.0, 1.0}) == 1.0);
    CHECK(aggregate(vec({0.0, 0.0})) == 0.0);
    CHECK(aggregate(vec({-0.5, 0.5, 0.7})) == 0.5);  // non-positive mean with spread -> median
    CHECK_THROWS_AS(aggregate(Eigen::VectorXd()), ContractViolation);
}

TEST_CASE("aggregate matches the oracle on random vectors") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 300; ++trial) {
        const double centre = u(rng);
        const double spread = 0.3 * u(rng) * centre;
        Eigen::VectorXd t(8);
        std::vector<double> v(8);
        for (int i = 0; i < 8; ++i) v[i] = t(i) = centre + spread * (u(rng) - 0.5);
        CHECK(aggregate(t) == doctest::Approx(oracle::aggregate(v)).epsilon(1e-12));
    }
}

TEST_CASE("subtractive clustering picks the densest point first and one centre per blob") {
    Eigen::MatrixXd x(7, 2);
    x << 0.00, 0.00,
         0.02, 0.01,
         0.01, 0.03,
         0.01, 0.01,
         1.00, 1.00,
         0.98, 1.01,
         1.00, 0.97;
    const auto c = subtractive_clustering(x);
    CHECK(c.size() == 2);
    CHECK(c[0] < 4);
    CHECK(c[1] >= 4);

    // Independent potential: the first centre is its argmax.
    Eigen::MatrixXd u = x;
    for (int j = 0; j < 2; ++j) u.col(j) = (x.col(j).array() - x.col(j).minCoeff()) / (x.col(j).maxCoeff() - x.col(j).minCoeff());
    int arg = 0;
    double best = -1;
    for (int i = 0; i < 7; ++i) {
        double p = 0;
        for (int k = 0; k < 7; ++k) p += std::exp(-16.0 * (u.row(i) - u.row(k)).squaredNorm());
        if (p > best) best = p, arg = i;
    }
    CHECK(c[0] == arg);

    CHECK(subtractive_clustering(Eigen::MatrixXd::Ones(1, 3)) == std::vector<int>{0});
    CHECK(subtractive_clustering(x) == c);
}

TEST_CASE("one training row gives one rule reproducing its output") {
    Eigen::MatrixXd m(1, 3);
    m << 0.2, -1.0, 0.7;
    const auto rb = generate_rules(m, vec({0.42}));
    CHECK(rb.rule_count() == 1);
    CHECK(infer_normalized(rb, m.row(0)) == doctest::Approx(0.42).epsilon(1e-12));
    CHECK(infer_normalized(rb, Eigen::RowVectorXd::Constant(3, 5.0)) == doctest::Approx(0.42).epsilon(1e-12));
    CHECK_THROWS_AS(generate_rules(Eigen::MatrixXd(0, 3), Eigen::VectorXd()), ContractViolation);
    CHECK_THROWS_AS(generate_rules(m, vec({0.1, 0.2})), ContractViolation);
}

TEST_CASE("two separated clusters with constant outputs are reproduced at their centres") {
    Eigen::MatrixXd m(8, 2);
    m << 0.00, 0.00, 0.05, 0.00, 0.00, 0.05, 0.03, 0.03,
         10.0, 10.0, 10.05, 10.0, 10.0, 10.05, 10.03, 10.03;
    Eigen::VectorXd o(8);
    o << 0.2, 0.2, 0.2, 0.2, 0.8, 0.8, 0.8, 0.8;
    const auto rb = generate_rules(m, o);
    REQUIRE(rb.rule_count() >= 2);
    for (const auto& r : rb.rules) {
        const double want = r.center(0) < 5 ? 0.2 : 0.8;
        // The far cluster sits ~10 / sigma apart per axis: its membership is far below 1e-8.
        const double far = std::exp(-0.5 * 2 * std::pow(10.0 / r.sigma(0), 2));
        REQUIRE(far < 1e-8);
        CHECK(std::fabs(infer_normalized(rb, r.center.transpose()) - want) < 1e-6);
    }
}

TEST_CASE("linear data is interpolated at the training rows") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd m(12, 2);
    Eigen::VectorXd o(12);
    for (int i = 0; i < 12; ++i) {
        m(i, 0) = u(rng);
        m(i, 1) = u(rng);
        o(i) = 0.3 * m(i, 0) - 0.1 * m(i, 1) + 0.5;
    }
    const auto rb = generate_rules(m, o);
    CHECK(rb.rule_count() <= 12);
    for (int i = 0; i < 12; ++i) CHECK(std::fabs(infer_normalized(rb, m.row(i)) - o(i)) < 1e-8);
}

TEST_CASE("inference: constant rule, identical rows, isolated centre, degenerate firing") {
    auto single = manual({make_rule(vec({0, 0}), 1.0, vec({0, 0, 0.7}))});
    Eigen::MatrixXd rows = Eigen::MatrixXd::Random(8, 2) * 3;
    for (Eigen::Index i = 0; i < 8; ++i) CHECK(infer(single, rows).coeff(i) == doctest::Approx(0.7).epsilon(1e-15));

    auto three = manual({make_rule(vec({0, 0}), 0.5, vec({1, -1, 0.2})),
                         make_rule(vec({6, 0}), 0.5, vec({0, 0, 0.9})),
                         make_rule(vec({0, 6}), 0.5, vec({0.5, 0, -0.3}))});
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(8, 2, 0.3);
    const auto out = infer(three, same);
    for (Eigen::Index i = 1; i < 8; ++i) CHECK(out(i) == out(0));

    // Other centres are 12 sigma away: weights below exp(-72).
    CHECK(std::fabs(infer_normalized(three, Eigen::RowVector2d(0, 0)) - 0.2) < 1e-6);
    CHECK(std::fabs(infer_normalized(three, Eigen::RowVector2d(6, 0)) - 0.9) < 1e-6);

    // Far from everything: nearest rule only.
    const Eigen::RowVector2d far(200, 1);
    CHECK(firing_weights(three.rules, far)(1) == 1.0);
    CHECK(infer_normalized(three, far) == 0.9);

    CHECK_THROWS_AS(infer(three, Eigen::MatrixXd::Zero(2, 3)), ContractViolation);
}

TEST_CASE("inference does not depend on rule order") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<Rule> rules;
    for (int k = 0; k < 5; ++k) rules.push_back(make_rule(vec({u(rng), u(rng), u(rng)}), 0.6, vec({u(rng), u(rng), u(rng), u(rng)})));
    auto a = manual(rules);
    std::reverse(rules.begin(), rules.end());
    auto b = manual(rules);
    for (int t = 0; t < 20; ++t) {
        const Eigen::RowVector3d x(u(rng), u(rng), u(rng));
        CHECK(infer_normalized(a, x) == doctest::Approx(infer_normalized(b, x)).epsilon(1e-12));
    }
}

TEST_CASE("prune_and_evolve discards similar rows and appends the rest") {
    Eigen::MatrixXd m(3, 2);
    m << 0, 0, 1, 1, 2, 0;
    auto s = default_settings(2, 1.0);
    const auto rb = generate_rules(m, vec({0.1, 0.5, 0.9}), s);

    EvolutionStep step;
    const auto same = prune_and_evolve(rb, m.row(1), 0.5, &step);
    CHECK(step.offered == 1);
    CHECK(step.appended == 0);
    CHECK(same.m == rb.m);
    CHECK(same.rules == rb.rules);

    Eigen::MatrixXd far(2, 2);
    far << 5, 5, 1.0, 1.0;
    const auto grown = prune_and_evolve(rb, far, 0.5, &step);
    CHECK(step.appended == 1);
    CHECK(grown.rows() == 4);
    CHECK(grown.o(3) == 0.5);
    CHECK(grown.rule_count() <= static_cast<std::size_t>(grown.rows()));

    // Same input, different best parameter: not similar.
    prune_and_evolve(rb, m.row(1), 0.9, &step);
    CHECK(step.appended == 1);

    s.eps_x = s.eps_o = 0.0;
    const auto strict = generate_rules(m, vec({0.1, 0.5, 0.9}), s);
    Eigen::MatrixXd near(2, 2);
    near << 1, 1, 1, 1.0 + 1e-9;
    prune_and_evolve(strict, near, 0.5, &step);
    CHECK(step.appended == 1);
}

TEST_CASE("rows(M) never decreases and rules never outnumber rows") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2, 2);
    Eigen::MatrixXd m(8, 3);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng);
    auto rb = generate_rules(m, Eigen::VectorXd::Constant(8, 0.4), default_settings(3, 1.0));
    Eigen::Index offered = 8;
    for (int k = 0; k < 15; ++k) {
        Eigen::MatrixXd rows(8, 3);
        for (Eigen::Index i = 0; i < rows.size(); ++i) rows(i) = u(rng) * (k % 3 == 0 ? 0.01 : 1.0);
        const auto before = rb.rows();
        rb = prune_and_evolve(rb, rows, 0.3 + 0.02 * k);
        offered += 8;
        CHECK(rb.rows() >= before);
        CHECK(rb.rows() <= offered);
        CHECK(rb.rule_count() <= static_cast<std::size_t>(rb.rows()));
        CHECK(generate_rules(rb.m, rb.o, rb.settings).rules == rb.rules);
    }
}

TEST_CASE("rule base JSON round trip is bit-identical") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd m(16, 3);
    Eigen::VectorXd o(16);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng);
    for (Eigen::Index i = 0; i < 16; ++i) o(i) = 0.5 + 0.1 * u(rng);
    Normalization norm;
    norm.mean = {0.1, -0.2, 0.3};
    norm.sd = {1.5, 0.25, 1.0 / 3.0};
    auto s = default_settings(3, 1.0, norm);
    s.consequent_ridge = 0.1;
    const auto rb = generate_rules(m, o, s);

    const auto path = std::filesystem::temp_directory_path() / "scefis_test_rules.json";
    save_rule_base(rb, path);
    const auto back = load_rule_base(path);
    std::filesystem::remove(path);
    CHECK(back.rules == rb.rules);
    CHECK(back.m == rb.m);
    CHECK(back.o == rb.o);
    CHECK(back.settings.normalization.mean == norm.mean);
    CHECK(back.settings.normalization.sd == norm.sd);
    CHECK(back.settings.eps_x == s.eps_x);
    CHECK(back.settings.consequent_ridge == 0.1);
    CHECK(rule_base_to_json(back) == rule_base_to_json(rb));
    const Eigen::MatrixXd probe = Eigen::MatrixXd::Random(8, 3);
    CHECK(infer(back, probe) == infer(rb, probe));
    CHECK(generate_rules(back.m, back.o, back.settings).rules == rb.rules);
    CHECK_THROWS(rule_base_from_json("{\"format\": \"other\"}"));
}

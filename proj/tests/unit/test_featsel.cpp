#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "scefis/error.hpp"
#include "scefis/featsel.hpp"
#include "oracles.hpp"

using namespace scefis;

namespace {

Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = g(rng);
    return m;
}

// Random F_3 with planted low-rank structure, exact duplicates and near copies.
Eigen::MatrixXd structured_f3(int rows, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    const int k = 3 + static_cast<int>(seed % 6);
    Eigen::MatrixXd f = gaussian(rows, k, seed + 1000) * gaussian(k, 108, seed + 2000);
    f += 0.3 * gaussian(rows, 108, seed + 3000);
    f.col(7) = f.col(3);
    f.col(50) = f.col(20);
    f.col(90) = (2.0 * f.col(60)).array() + 1.0;
    for (Eigen::Index i = 0; i < rows; ++i) f(i, 100) = f(i, 10) + 1e-3 * g(rng);
    return f;
}

double pearson_oracle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double n = static_cast<double>(a.size());
    double ma = 0, mb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) ma += a(i), mb += b(i);
    ma /= n;
    mb /= n;
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        sab += (a(i) - ma) * (b(i) - mb);
        saa += (a(i) - ma) * (a(i) - ma);
        sbb += (b(i) - mb) * (b(i) - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

SelectorResult result(std::vector<int> cols, std::vector<int> universe) {
    SelectorResult r;
    r.columns = std::move(cols);
    r.universe = std::move(universe);
    return r;
}

std::vector<int> iota_vec(int n) {
    std::vector<int> v(n);
    for (int i = 0; i < n; ++i) v[i] = i;
    return v;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

TEST_CASE("pearson matches a two-pass oracle and is 0 for constant columns") {
    const auto m = gaussian(25, 2, 3);
    CHECK(pearson(m.col(0), m.col(1)) == doctest::Approx(pearson_oracle(m.col(0), m.col(1))).epsilon(1e-12));
    CHECK(pearson(m.col(0), Eigen::VectorXd::Constant(25, 4.0)) == 0.0);
}

TEST_CASE("drop_correlated removes duplicates and keeps orthogonal columns") {
    Eigen::MatrixXd f(4, 4);
    f << 1, 1, 0, 3,
         -1, -1, 0, 3,
         1, 1, 1, 3,
         -1, -1, 1, 3;
    // col1 duplicates col0; col2 is uncorrelated with col0 (r = 0); col3 constant.
    CHECK(drop_correlated(f, 0.9) == std::vector<int>{0, 2, 3});
    CHECK(drop_correlated(f, 1.0) == std::vector<int>{0, 2, 3});

    Eigen::MatrixXd g(4, 3);
    g << 1, 3, 3,
         2, 3, 3,
         3, 3, 3,
         4, 3, 3;
    // Only one zero-variance column survives.
    CHECK(drop_correlated(g, 0.9) == std::vector<int>{0, 1});
}

TEST_CASE("drop_correlated threshold brackets a calibrated correlation") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd f(200, 3);
    for (int i = 0; i < 200; ++i) {
        f(i, 0) = g(rng);
        f(i, 1) = g(rng);
    }
    for (int i = 0; i < 200; ++i) f(i, 2) = f(i, 0) + 0.1 * g(rng);
    const double r = std::fabs(pearson_oracle(f.col(0), f.col(2)));
    REQUIRE(r > 0.99);
    REQUIRE(r < 0.999);
    CHECK(drop_correlated(f, 0.99) == std::vector<int>{0, 1});
    CHECK(drop_correlated(f, 0.999) == std::vector<int>{0, 1, 2});
    // Anti-correlation counts the same.
    f.col(2) = -f.col(2);
    CHECK(drop_correlated(f, 0.99) == std::vector<int>{0, 1});
}

TEST_CASE("standardize_columns gives zero mean and unit population sd") {
    auto f = gaussian(30, 4, 5);
    f.col(3).setConstant(2.5);
    const auto z = standardize_columns(f);
    for (int j = 0; j < 3; ++j) {
        CHECK(std::fabs(z.col(j).mean()) < 1e-12);
        CHECK(z.col(j).squaredNorm() / 30.0 == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK(z.col(3).isZero());
}

TEST_CASE("knn_affinity is symmetric, zero-diagonal and has at least k neighbours per row") {
    const auto x = gaussian(12, 3, 8);
    const auto w = knn_affinity(x, 3, 0.0);
    CHECK((w - w.transpose()).cwiseAbs().maxCoeff() == 0.0);
    for (int i = 0; i < 12; ++i) {
        CHECK(w(i, i) == 0.0);
        int nz = 0;
        for (int j = 0; j < 12; ++j) nz += w(i, j) > 0.0;
        CHECK(nz >= 3);
    }
    // Explicit bandwidth: a nearest neighbour's weight is the Gaussian of its distance.
    const auto w1 = knn_affinity(x, 1, 0.7);
    int nn = 0;
    double best = 1e300;
    for (int j = 1; j < 12; ++j)
        if ((x.row(0) - x.row(j)).norm() < best) best = (x.row(0) - x.row(j)).norm(), nn = j;
    CHECK(w1(0, nn) == doctest::Approx(std::exp(-best * best / (2 * 0.49))).epsilon(1e-12));
}

TEST_CASE("laplacian_scores match the dense L = D - S formula") {
    // Two row clusters {0,1,2} and {3,4,5}, weak cross links.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(6, 6);
    auto link = [&](int a, int b, double v) { s(a, b) = s(b, a) = v; };
    link(0, 1, 1.0), link(1, 2, 0.8), link(0, 2, 0.6);
    link(3, 4, 0.9), link(4, 5, 1.0), link(3, 5, 0.7);
    link(2, 3, 0.05), link(0, 5, 0.02);

    Eigen::MatrixXd x = gaussian(6, 8, 21);
    for (int i = 0; i < 6; ++i) x(i, 0) = i < 3 ? 1.0 : -1.0;  // follows the clusters
    x.col(1) << 1, -1, 1, -1, 1, -1;                             // cuts across them
    x.col(7).setConstant(3.0);

    const Eigen::VectorXd got = laplacian_scores(x, s);
    const Eigen::VectorXd want = oracle::laplacian_scores(x.leftCols(7), s);
    for (int j = 0; j < 7; ++j) CHECK(std::fabs(got(j) - want(j)) < 1e-9);
    CHECK(std::isinf(got(7)));
    CHECK(got(0) < got(1));
}

TEST_CASE("greedy_reconstruction residuals equal brute-force projections") {
    const auto a = gaussian(15, 9, 31);
    const auto t = greedy_reconstruction(a, 5);
    REQUIRE(t.order.size() == 5);
    std::vector<int> chosen;
    for (std::size_t k = 0; k < t.order.size(); ++k) {
        // Each pick is the best single addition to the previous picks.
        double best = 1e300;
        for (int c = 0; c < 9; ++c) {
            if (contains(chosen, c)) continue;
            auto trial = chosen;
            trial.push_back(c);
            best = std::min(best, oracle::projection_residual(a, trial));
        }
        chosen.push_back(t.order[k]);
        const double r = oracle::projection_residual(a, chosen);
        CHECK(r == doctest::Approx(best).epsilon(1e-9));
        CHECK(t.residual[k] == doctest::Approx(r).epsilon(1e-9).scale(1.0));
    }
    for (std::size_t k = 1; k < t.residual.size(); ++k) CHECK(t.residual[k] <= t.residual[k - 1] + 1e-9);
}

TEST_CASE("greedy_reconstruction on a rank-1 matrix needs one column") {
    Eigen::VectorXd u(5), v(4);
    u << 1, 2, -1, 0.5, 3;
    v << 0.5, 4, -2, 1;
    const Eigen::MatrixXd a = u * v.transpose();
    const auto t = greedy_reconstruction(a, 4);
    CHECK(t.order[0] == 0);  // every column spans A, so the gains tie and the first wins
    CHECK(t.residual[0] < 1e-12 * a.squaredNorm());
    CHECK(std::set<int>(t.order.begin(), t.order.end()).size() == 4);
}

TEST_CASE("run_selector returns m distinct columns from the universe") {
    const auto f = structured_f3(24, 4);
    for (auto m : kAllSelectors) {
        CAPTURE(to_string(m));
        const auto r = run_selector(m, f, 12);
        CHECK(r.columns.size() == 12);
        CHECK(std::set<int>(r.columns.begin(), r.columns.end()).size() == 12);
        CHECK(r.universe == iota_vec(108));
        for (int c : r.columns) CHECK((c >= 0 && c < 108));
        CHECK(run_selector(m, f, 12).columns == r.columns);
        CHECK(selector_from_string(to_string(m)) == m);
    }
    CHECK_THROWS_AS(selector_from_string("pca"), ContractViolation);
}

TEST_CASE("run_selector with m equal to the width returns every column") {
    const auto f = gaussian(10, 6, 9);
    for (auto m : kAllSelectors) {
        auto cols = run_selector(m, f, 6).columns;
        std::sort(cols.begin(), cols.end());
        CHECK(cols == iota_vec(6));
    }
    CHECK(run_selector(SelectorMethod::Greedy, f, 0).columns.empty());
    CHECK_THROWS_AS(run_selector(SelectorMethod::Greedy, f, 7), ContractViolation);
}

TEST_CASE("laplacian selector ranks by ascending score") {
    const auto f = gaussian(20, 10, 13);
    const auto r = run_selector(SelectorMethod::Laplacian, f, 10);
    REQUIRE(r.scores.size() == 10);
    for (std::size_t k = 1; k < r.columns.size(); ++k) CHECK(r.scores[r.columns[k - 1]] <= r.scores[r.columns[k]]);
}

TEST_CASE("ensemble_vote keeps columns with at least three votes") {
    const auto u = iota_vec(10);
    // votes: 0 -> 6, 1 -> 3, 2 -> 2, 3 -> 1, 4 -> 4
    std::vector<SelectorResult> rs = {
        result({0, 1, 4, 3}, u), result({0, 1, 4}, u), result({0, 1, 2}, u),
        result({0, 4}, u),       result({0, 2, 4}, u), result({0}, u),
    };
    CHECK(ensemble_vote(rs) == std::vector<int>{0, 1, 4});

    std::vector<SelectorResult> rev(rs.rbegin(), rs.rend());
    CHECK(ensemble_vote(rev) == ensemble_vote(rs));
    std::mt19937_64 rng(2);
    for (int k = 0; k < 20; ++k) {
        std::shuffle(rs.begin(), rs.end(), rng);
        CHECK(ensemble_vote(rs) == std::vector<int>{0, 1, 4});
    }

    rs.pop_back();
    CHECK_THROWS_AS(ensemble_vote(rs), ContractViolation);
    rs.push_back(result({0}, iota_vec(9)));
    CHECK_THROWS_AS(ensemble_vote(rs), ContractViolation);
}

TEST_CASE("self_select trace agrees with the stages re-run independently") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        CAPTURE(seed);
        const auto f3 = structured_f3(40, seed);
        const auto t = self_select(f3);

        CHECK(t.kept_after_99 == drop_correlated(f3, 0.99));
        Eigen::MatrixXd f4(40, static_cast<Eigen::Index>(t.kept_after_99.size()));
        for (std::size_t k = 0; k < t.kept_after_99.size(); ++k) f4.col(k) = f3.col(t.kept_after_99[k]);
        CHECK(t.n_t2 == static_cast<int>(drop_correlated(f4, 0.90).size()));
        CHECK(t.voted == ensemble_vote(t.per_method));
        REQUIRE(t.per_method.size() == 6);
        for (const auto& r : t.per_method) CHECK(static_cast<int>(r.columns.size()) == t.n_t2);

        CHECK(t.n_l <= t.n_t3);
        CHECK(t.n_t3 <= t.n_t2);
        CHECK(t.n_t2 <= t.n_t1);
        CHECK(t.n_t1 <= 108);
        for (int c : t.final_columns) CHECK(contains(t.vote_survivors, c));
        for (int c : t.vote_survivors) CHECK(contains(t.kept_after_99, c));

        // Planted exact duplicates and affine copies never both survive.
        CHECK(!(contains(t.final_columns, 3) && contains(t.final_columns, 7)));
        CHECK(!contains(t.kept_after_99, 7));
        CHECK(!contains(t.kept_after_99, 50));
        CHECK(!contains(t.kept_after_99, 90));

        for (int c : t.kept_after_99) {
            int votes = 0;
            for (const auto& r : t.per_method) votes += contains(r.columns, c);
            if (votes >= 3) CHECK(contains(t.voted, c));
            if (votes >= 3 && !t.capped) CHECK(contains(t.vote_survivors, c));
        }
        if (t.capped) CHECK(t.n_t3 == t.n_t2);
        CHECK(format_trace(self_select(f3)) == format_trace(t));
    }
}

TEST_CASE("self_select falls back to the highest-variance column when the vote is empty") {
    // Two rows make every column +-1 correlated with the first: n_t2 = 1, and the
    // lists can only disagree on which single column they pick.
    Eigen::MatrixXd f(2, 4);
    f << 0, 0, 0, 0,
         1, 5, 2, 3;
    const auto t = self_select(f);
    CHECK(t.n_t2 == 1);
    CHECK(t.n_t3 == 1);
    CHECK(t.n_l == 1);
    if (t.used_fallback) CHECK(t.vote_survivors == std::vector<int>{0});
    CHECK_THROWS_AS(self_select(Eigen::MatrixXd::Zero(1, 4)), ContractViolation);
}

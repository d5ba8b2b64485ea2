#include <algorithm>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/featsel.hpp"

namespace scefis {
namespace {

Eigen::MatrixXd columns_of(const Eigen::MatrixXd& f, const std::vector<int>& cols) {
    Eigen::MatrixXd out(f.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = f.col(cols[k]);
    return out;
}

std::vector<int> remap(const std::vector<int>& local, const std::vector<int>& raw) {
    std::vector<int> out;
    out.reserve(local.size());
    for (int i : local) out.push_back(raw[i]);
    return out;
}

}  // namespace

SelectionTrace self_select(const Eigen::MatrixXd& f3, const SelectorOptions& opts) {
    require(f3.rows() >= 2, "self_select: F_3 needs at least two rows");
    require(f3.cols() >= 1, "self_select: F_3 has no columns");
    SelectionTrace t;

    t.kept_after_99 = drop_correlated(f3, 0.99);
    t.n_t1 = static_cast<int>(t.kept_after_99.size());
    const Eigen::MatrixXd f4 = columns_of(f3, t.kept_after_99);

    const std::vector<int> fc = drop_correlated(f4, 0.90);
    t.n_t2 = static_cast<int>(fc.size());

    for (auto method : kAllSelectors) {
        SelectorResult r;
        if (method == SelectorMethod::Correlation) {
            r.method = method;
            r.columns = fc;
        } else {
            r = run_selector(method, f4, t.n_t2, opts);
        }
        r.columns = remap(r.columns, t.kept_after_99);
        r.universe = t.kept_after_99;
        t.per_method.push_back(std::move(r));
    }

    t.voted = ensemble_vote(t.per_method);
    t.vote_survivors = t.voted;
    if (static_cast<int>(t.vote_survivors.size()) > t.n_t2) {
        // Six lists of n_t2 can leave up to 2*n_t2 survivors; keep the n_t2 with most votes.
        auto votes = [&](int c) {
            int v = 0;
            for (const auto& r : t.per_method) v += std::find(r.columns.begin(), r.columns.end(), c) != r.columns.end();
            return v;
        };
        std::stable_sort(t.vote_survivors.begin(), t.vote_survivors.end(),
                         [&](int a, int b) { return votes(a) > votes(b); });
        t.vote_survivors.resize(t.n_t2);
        std::sort(t.vote_survivors.begin(), t.vote_survivors.end());
        t.capped = true;
    }
    if (t.vote_survivors.empty()) {
        // Keep the single highest-variance column so downstream stages stay total.
        int best = t.kept_after_99.front();
        double best_var = -1.0;
        for (int c : t.kept_after_99) {
            const double var = (f3.col(c).array() - f3.col(c).mean()).square().mean();
            if (var > best_var) {
                best_var = var;
                best = c;
            }
        }
        t.vote_survivors = {best};
        t.used_fallback = true;
    }
    t.n_t3 = static_cast<int>(t.vote_survivors.size());

    t.final_columns = remap(drop_correlated(columns_of(f3, t.vote_survivors), 0.90), t.vote_survivors);
    t.n_l = static_cast<int>(t.final_columns.size());
    return t;
}

std::string format_trace(const SelectionTrace& t) {
    std::ostringstream os;
    auto list = [&](const std::vector<int>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
        os << '\n';
    };
    os << "# feature selection trace\n";
    os << "n_t1 " << t.n_t1 << "\nn_t2 " << t.n_t2 << "\nn_t3 " << t.n_t3 << "\nn_l " << t.n_l << '\n';
    os << "fallback " << (t.used_fallback ? 1 : 0) << '\n';
    os << "capped " << (t.capped ? 1 : 0) << '\n';
    os << "kept_after_99: ";
    list(t.kept_after_99);
    for (const auto& r : t.per_method) {
        os << "method " << to_string(r.method) << ": ";
        list(r.columns);
    }
    os << "voted: ";
    list(t.voted);
    os << "vote_survivors: ";
    list(t.vote_survivors);
    os << "final: ";
    list(t.final_columns);
    return os.str();
}

}  // namespace scefis

#include <cmath>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

namespace scefis {

FeatureStore FeatureStore::build(const Dataset& ds, const DetectorOptions& opts) {
    require(!ds.items.empty(), "FeatureStore: empty dataset");
    std::vector<std::pair<int, int>> dims;
    for (const auto& s : ds.items) dims.emplace_back(s.image.height(), s.image.width());
    FeatureStore store;
    store.window_z = compute_window_size(dims);
    for (const auto& s : ds.items) {
        store.blocks.emplace(s.id, image_feature_block(s.image, store.window_z, s.id, opts));
        store.contexts.emplace(s.id, SegmentationContext::from_detection(s.image, store.window_z));
    }
    return store;
}

Eigen::MatrixXd FeatureStore::f3(const std::vector<std::string>& ids) const {
    std::vector<ImageFeatureBlock> picked;
    for (const auto& id : ids) {
        const auto it = blocks.find(id);
        require(it != blocks.end(), "FeatureStore: no features for image '" + id + "'");
        picked.push_back(it->second);
    }
    return stack_blocks(picked);
}

Eigen::MatrixXd FeatureStore::f3_all(const Dataset& ds) const {
    std::vector<std::string> ids;
    for (const auto& s : ds.items) ids.push_back(s.id);
    return f3(ids);
}

Normalization fit_normalization(const FeatureStore& store, const std::vector<int>& columns,
                                const std::vector<std::string>& ids) {
    require(!ids.empty(), "fit_normalization: no images");
    const Eigen::MatrixXd f3 = store.f3(ids);
    Eigen::MatrixXd sel(f3.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) sel.col(static_cast<Eigen::Index>(k)) = f3.col(columns[k]);
    return Normalization::fit(sel);
}

SelfConfiguration self_configure(const Dataset& ds, const FeatureStore& store, const PipelineConfig& cfg,
                                 const std::vector<std::string>& normalization_ids) {
    require(!ds.items.empty(), "self_configure: empty dataset");
    SelfConfiguration out;
    out.trace = self_select(store.f3_all(ds), cfg.selectors);
    out.config.window_z = store.window_z;
    out.config.n_total_features = kNumFeatures;
    out.config.selected_columns = out.trace.final_columns;
    out.config.normalization = fit_normalization(store, out.config.selected_columns, normalization_ids);
    out.config.validate();
    return out;
}

SelfConfiguration self_configure(const Dataset& ds, const PipelineConfig& cfg) {
    DetectorOptions opts;
    opts.order = cfg.seed_order;
    const auto store = FeatureStore::build(ds, opts);
    std::vector<std::string> ids;
    for (const auto& s : ds.items) ids.push_back(s.id);
    return self_configure(ds, store, cfg, ids);
}

std::vector<BestParamRecord> offline_best_params(const Dataset& ds, const FeatureStore& store,
                                                 const SegmenterSpec& spec) {
    std::vector<BestParamRecord> out;
    for (const auto& s : ds.items)
        out.push_back(best_parameter_search(s.image, s.gold, spec, store.contexts.at(s.id), s.id));
    return out;
}

RuleBaseSettings rule_settings(const PipelineConfig& cfg, const SelfConfig& sc) {
    auto s = default_settings(static_cast<int>(sc.selected_columns.size()), cfg.segmenter.span(), sc.normalization);
    if (cfg.eps_x) s.eps_x = *cfg.eps_x;
    if (cfg.eps_o) s.eps_o = *cfg.eps_o;
    s.clustering = cfg.clustering;
    s.consequent_ridge = cfg.consequent_ridge;
    return s;
}

RuleBase train(const Dataset& ds, const std::vector<std::string>& train_ids, const FeatureStore& store,
               const SelfConfig& sc, const std::map<std::string, BestParamRecord>& best,
               const PipelineConfig& cfg) {
    require(!train_ids.empty(), "train: empty training split");
    const auto settings = rule_settings(cfg, sc);
    const auto d = static_cast<Eigen::Index>(sc.selected_columns.size());

    std::vector<Eigen::RowVectorXd> m_rows;
    std::vector<double> o_vals;
    for (const auto& id : train_ids) {
        ds.index_of(id);
        const auto rec = best.find(id);
        require(rec != best.end(), "train: no offline best parameter for '" + id + "'");
        const double t = rec->second.param;
        const Eigen::MatrixXd x = settings.normalization.apply(store.blocks.at(id).select(sc.selected_columns));
        // Rows are compared with M as it stood before this image.
        const std::size_t before = m_rows.size();
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            bool similar = false;
            for (std::size_t j = 0; j < before && !similar; ++j)
                similar = (x.row(i) - m_rows[j]).norm() <= settings.eps_x && std::fabs(t - o_vals[j]) <= settings.eps_o;
            if (!similar) {
                m_rows.push_back(x.row(i));
                o_vals.push_back(t);
            }
        }
    }
    Eigen::MatrixXd m(static_cast<Eigen::Index>(m_rows.size()), d);
    Eigen::VectorXd o(m.rows());
    for (std::size_t i = 0; i < m_rows.size(); ++i) {
        m.row(static_cast<Eigen::Index>(i)) = m_rows[i];
        o(static_cast<Eigen::Index>(i)) = o_vals[i];
    }
    return generate_rules(m, o, settings);
}

bool EvolutionLog::operator==(const EvolutionLog& other) const {
    if (entries.size() != other.entries.size()) return false;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& a = entries[i];
        const auto& b = other.entries[i];
        if (a.image_id != b.image_id || a.t_o != b.t_o || a.t_star != b.t_star || a.score != b.score ||
            a.t_b != b.t_b || a.best_score != b.best_score || a.appended_rows != b.appended_rows ||
            a.rule_count != b.rule_count || a.rows_m != b.rows_m || a.skipped != b.skipped)
            return false;
    }
    return true;
}

FeedbackProvider gold_feedback() {
    return [](const Sample& s, const BinaryMask&, double) { return std::optional<BinaryMask>(s.gold); };
}

Proposal propose(const RuleBase& rb, const Sample& sample, const FeatureStore& store, const SelfConfig& sc,
                 const SegmenterSpec& spec) {
    const Eigen::MatrixXd rows = store.blocks.at(sample.id).select(sc.selected_columns);
    const Eigen::VectorXd t_o = infer(rb, rows);
    Proposal p;
    p.t_o.assign(t_o.data(), t_o.data() + t_o.size());
    p.t_star = spec.snap(aggregate(t_o, std::make_pair(spec.lo(), spec.hi())));
    p.mask = apply_segmenter(spec, sample.image, store.contexts.at(sample.id), p.t_star);
    return p;
}

RuleBase apply_feedback(const RuleBase& rb, const Sample& sample, const BinaryMask& corrected,
                        const FeatureStore& store, const SelfConfig& sc, const SegmenterSpec& spec,
                        EvolutionEntry& entry) {
    require(corrected.same_shape(sample.image), "feedback mask dimensions do not match image '" + sample.id + "'");
    const auto rec = best_parameter_search(sample.image, corrected, spec, store.contexts.at(sample.id), sample.id);
    EvolutionStep step;
    RuleBase next = prune_and_evolve(rb, store.blocks.at(sample.id).select(sc.selected_columns), rec.param, &step);
    entry.image_id = sample.id;
    entry.t_b = rec.param;
    entry.best_score = rec.score;
    entry.appended_rows = step.appended;
    entry.rule_count = next.rule_count();
    entry.rows_m = static_cast<std::size_t>(next.rows());
    entry.skipped = false;
    return next;
}

EvolutionLog evolve_stream(RuleBase& rb, const Dataset& ds, const std::vector<std::string>& test_ids,
                           const FeedbackProvider& feedback, const FeatureStore& store, const SelfConfig& sc,
                           const SegmenterSpec& spec) {
    EvolutionLog log;
    for (const auto& id : test_ids) {
        const auto& sample = ds.get(id);
        const auto prop = propose(rb, sample, store, sc, spec);
        EvolutionEntry entry;
        entry.image_id = id;
        entry.t_o = prop.t_o;
        entry.t_star = prop.t_star;
        const auto corrected = feedback(sample, prop.mask, prop.t_star);
        if (!corrected) {
            entry.skipped = true;
            entry.rule_count = rb.rule_count();
            entry.rows_m = static_cast<std::size_t>(rb.rows());
            log.entries.push_back(std::move(entry));
            continue;
        }
        entry.score = jaccard(prop.mask, *corrected);
        rb = apply_feedback(rb, sample, *corrected, store, sc, spec, entry);
        log.entries.push_back(std::move(entry));
    }
    return log;
}

}  // namespace scefis

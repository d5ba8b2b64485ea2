#include <algorithm>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

namespace scefis {
namespace {

MethodRun make_method(std::string name, std::vector<std::string> ids, std::vector<double> scores) {
    MethodRun m;
    m.method = std::move(name);
    m.image_ids = std::move(ids);
    m.scores = std::move(scores);
    m.summary = summarize(m.scores);
    return m;
}

std::map<std::string, BestParamRecord> by_id(const std::vector<BestParamRecord>& records) {
    std::map<std::string, BestParamRecord> out;
    for (const auto& r : records) out[r.image_id] = r;
    return out;
}

void fill_aggregate(ExperimentReport& report) {
    std::map<std::string, std::vector<double>> means;
    for (const auto& run : report.runs)
        for (const auto& m : run.methods) means[m.method].push_back(m.summary.mean);
    for (const auto& [name, v] : means) report.aggregate[name] = summarize(v);
}

DetectorOptions detector_options(const PipelineConfig& cfg) {
    DetectorOptions opts;
    opts.order = cfg.seed_order;
    return opts;
}

std::vector<std::string> all_ids(const Dataset& ds) {
    std::vector<std::string> ids;
    for (const auto& s : ds.items) ids.push_back(s.id);
    return ids;
}

struct ParentRun {
    std::vector<double> default_scores;
    std::vector<double> maa_scores;
    EvolutionLog log;
    std::vector<std::size_t> trajectory;
    std::size_t initial_rows = 0;
    std::map<std::string, BinaryMask> proposals;
};

ParentRun run_parent(const Dataset& ds, const Split& split, const FeatureStore& store,
                     const SelfConfiguration& base, const std::map<std::string, BestParamRecord>& best,
                     const PipelineConfig& cfg) {
    ParentRun out;
    SelfConfig sc = base.config;
    sc.normalization = fit_normalization(store, sc.selected_columns, cfg.normalize_on_all_images ? all_ids(ds) : split.train);

    RuleBase rb = train(ds, split.train, store, sc, best, cfg);
    out.initial_rows = static_cast<std::size_t>(rb.rows());
    out.trajectory.push_back(rb.rule_count());

    for (const auto& id : split.test) {
        const auto& s = ds.get(id);
        const auto mask = apply_segmenter(cfg.segmenter, s.image, store.contexts.at(id), cfg.segmenter.default_value);
        out.default_scores.push_back(jaccard(mask, s.gold));
        out.maa_scores.push_back(best.at(id).score);
    }
    auto& proposals = out.proposals;
    const FeedbackProvider fb = [&proposals](const Sample& s, const BinaryMask& proposal, double) {
        proposals[s.id] = proposal;
        return std::optional<BinaryMask>(s.gold);
    };
    out.log = evolve_stream(rb, ds, split.test, fb, store, sc, cfg.segmenter);
    for (const auto& e : out.log.entries) out.trajectory.push_back(e.rule_count);
    return out;
}

std::vector<double> log_scores(const EvolutionLog& log) {
    std::vector<double> v;
    for (const auto& e : log.entries)
        if (!e.skipped) v.push_back(e.score);
    return v;
}

}  // namespace

const MethodRun& RunReport::method(const std::string& name) const {
    for (const auto& m : methods)
        if (m.method == name) return m;
    throw ContractViolation("report: no method '" + name + "'");
}

ExperimentReport run_experiment(Dataset ds, const PipelineConfig& cfg) {
    cfg.segmenter.validate();
    ds.validate();
    if (ds.splits.empty()) ds.make_splits(cfg.runs, cfg.seed, cfg.train_count);
    require(static_cast<int>(ds.splits.size()) >= cfg.runs, "run_experiment: fewer splits than runs");

    const auto store = FeatureStore::build(ds, detector_options(cfg));
    ExperimentReport report;
    report.dataset = ds.name;
    report.segmenter = to_string(cfg.segmenter.kind);
    report.self_config = self_configure(ds, store, cfg, all_ids(ds));
    report.maa_records = offline_best_params(ds, store, cfg.segmenter);
    const auto best = by_id(report.maa_records);

    for (int r = 0; r < cfg.runs; ++r) {
        const auto& split = ds.splits[static_cast<std::size_t>(r)];
        auto pr = run_parent(ds, split, store, report.self_config, best, cfg);
        RunReport run;
        run.run = r + 1;
        run.split = split;
        std::vector<std::string> evolved_ids;
        for (const auto& e : pr.log.entries)
            if (!e.skipped) evolved_ids.push_back(e.image_id);
        const auto sc_scores = log_scores(pr.log);
        run.methods.push_back(make_method("default", split.test, pr.default_scores));
        run.methods.push_back(make_method("maa", split.test, pr.maa_scores));
        run.methods.push_back(make_method("scefis", evolved_ids, sc_scores));
        if (sc_scores.size() == pr.default_scores.size() && sc_scores.size() >= 2)
            run.paired_vs_default = paired_t_test(sc_scores, pr.default_scores);
        if (sc_scores.size() >= 2 && pr.default_scores.size() >= 2)
            run.welch_vs_default = welch_t_test(sc_scores, pr.default_scores);
        run.log = std::move(pr.log);
        run.rule_trajectory = std::move(pr.trajectory);
        run.initial_rows = pr.initial_rows;
        report.runs.push_back(std::move(run));
    }
    fill_aggregate(report);
    return report;
}

ExperimentReport run_fusion_experiment(Dataset ds, const std::vector<PipelineConfig>& parents) {
    require(parents.size() >= 2, "run_fusion_experiment: need at least two parents");
    const auto& lead = parents.front();
    ds.validate();
    if (ds.splits.empty()) ds.make_splits(lead.runs, lead.seed, lead.train_count);

    const auto store = FeatureStore::build(ds, detector_options(lead));
    ExperimentReport report;
    report.dataset = ds.name;
    for (std::size_t p = 0; p < parents.size(); ++p)
        report.segmenter += (p ? "+" : "") + to_string(parents[p].segmenter.kind);
    report.self_config = self_configure(ds, store, lead, all_ids(ds));

    std::vector<std::map<std::string, BestParamRecord>> best;
    for (const auto& cfg : parents) {
        cfg.segmenter.validate();
        const auto recs = offline_best_params(ds, store, cfg.segmenter);
        if (&cfg == &lead) report.maa_records = recs;
        best.push_back(by_id(recs));
    }

    for (int r = 0; r < lead.runs; ++r) {
        const auto& split = ds.splits[static_cast<std::size_t>(r)];
        RunReport run;
        run.run = r + 1;
        run.split = split;
        std::vector<ParentRun> results;
        for (std::size_t p = 0; p < parents.size(); ++p) {
            results.push_back(run_parent(ds, split, store, report.self_config, best[p], parents[p]));
            const auto tag = ":" + to_string(parents[p].segmenter.kind);
            run.methods.push_back(make_method("default" + tag, split.test, results.back().default_scores));
            run.methods.push_back(make_method("maa" + tag, split.test, results.back().maa_scores));
            run.methods.push_back(make_method("scefis" + tag, split.test, log_scores(results.back().log)));
        }
        std::vector<double> fused;
        for (const auto& id : split.test) {
            std::vector<BinaryMask> masks;
            for (const auto& res : results) masks.push_back(res.proposals.at(id));
            fused.push_back(jaccard(staple_fuse(masks), ds.get(id).gold));
        }
        run.methods.push_back(make_method("fusion", split.test, fused));
        if (fused.size() >= 2) {
            run.paired_vs_default = paired_t_test(fused, results.front().default_scores);
            run.welch_vs_default = welch_t_test(fused, results.front().default_scores);
        }
        run.log = results.front().log;
        run.rule_trajectory = results.front().trajectory;
        run.initial_rows = results.front().initial_rows;
        report.runs.push_back(std::move(run));
    }
    fill_aggregate(report);
    return report;
}

}  // namespace scefis

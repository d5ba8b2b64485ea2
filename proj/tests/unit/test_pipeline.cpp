#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"

using namespace scefis;
namespace fs = std::filesystem;

namespace {

Dataset small_synthetic(int count = 12, std::uint64_t seed = 7) {
    SyntheticOptions o;
    o.count = count;
    o.width = 64;
    o.height = 64;
    o.seed = seed;
    return make_synthetic_dataset(o);
}

std::vector<std::string> ids_of(const Dataset& ds) {
    std::vector<std::string> out;
    for (const auto& s : ds.items) out.push_back(s.id);
    return out;
}

std::map<std::string, BestParamRecord> best_map(const std::vector<BestParamRecord>& recs) {
    std::map<std::string, BestParamRecord> m;
    for (const auto& r : recs) m[r.image_id] = r;
    return m;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir(const std::string& name) {
    const auto d = fs::temp_directory_path() / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// Two-level lesions of varying size and position: any threshold in [0.2, 0.8) is perfect,
// so the smallest one on the grid (51/255) is every image's optimum.
Dataset two_level_dataset(int count) {
    Dataset ds;
    ds.name = "twolevel";
    for (int k = 0; k < count; ++k) {
        const int w = 48, h = 48;
        const int cx = 16 + (k * 5) % 16, cy = 18 + (k * 7) % 12, r = 6 + k % 7;
        std::vector<double> px(static_cast<std::size_t>(w) * h);
        BinaryMask gold(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const bool in = (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r;
                px[static_cast<std::size_t>(y) * w + x] = in ? 0.2 : 0.8;
                gold.set(x, y, in);
            }
        ds.items.push_back({"c" + std::to_string(k), GrayImage(w, h, px), gold});
    }
    return ds;
}

}  // namespace

TEST_CASE("config parses keys, comments and auto values and round-trips") {
    const auto cfg = PipelineConfig::parse(
        "# comment\n"
        "segmenter = srm\n"
        "eps_x = 0.5   # trailing\n"
        "eps_o = auto\n"
        "knn = 4\n"
        "polarity = bright\n"
        "consequent_ridge = 0\n"
        "train_count = 20\n"
        "runs = 3\nseed = 99\n");
    CHECK(cfg.segmenter.kind == SegmenterKind::Srm);
    CHECK(cfg.segmenter.default_value == 32);
    CHECK(cfg.eps_x == 0.5);
    CHECK(!cfg.eps_o);
    CHECK(cfg.selectors.knn == 4);
    CHECK(cfg.segmenter.polarity == Polarity::Bright);
    CHECK(cfg.consequent_ridge == 0.0);
    CHECK(cfg.train_count == 20);
    CHECK(cfg.runs == 3);
    CHECK(cfg.seed == 99);

    const auto again = PipelineConfig::parse(cfg.to_text());
    CHECK(again.to_text() == cfg.to_text());
    CHECK(again.segmenter.grid == cfg.segmenter.grid);

    // The segmenter line applies first wherever it appears.
    const auto rg = PipelineConfig::parse("default = 0.12\nsegmenter = rg\n");
    CHECK(rg.segmenter.kind == SegmenterKind::RegionGrow);
    CHECK(rg.segmenter.default_value == 0.12);

    CHECK(PipelineConfig{}.consequent_ridge == 0.1);
    CHECK_THROWS_AS(PipelineConfig::parse("bogus = 1\n"), ContractViolation);
    CHECK_THROWS_AS(PipelineConfig::parse("runs = many\n"), ContractViolation);
    CHECK_THROWS_AS(PipelineConfig::parse("no equals sign\n"), ContractViolation);
    CHECK_THROWS_AS(PipelineConfig::parse("default = 0.3333\n"), ContractViolation);
}

TEST_CASE("splits: 30/5 for 35 images, 85/15 otherwise, seeded and disjoint") {
    Dataset ds;
    for (int i = 0; i < 35; ++i) ds.items.push_back({"i" + std::to_string(i), GrayImage(2, 2, std::vector<double>(4, 0.0)), BinaryMask(2, 2)});
    ds.make_splits(10, 1);
    REQUIRE(ds.splits.size() == 10);
    for (const auto& sp : ds.splits) {
        CHECK(sp.train.size() == 30);
        CHECK(sp.test.size() == 5);
        std::set<std::string> all(sp.train.begin(), sp.train.end());
        all.insert(sp.test.begin(), sp.test.end());
        CHECK(all.size() == 35);
    }
    CHECK(ds.splits[0].test != ds.splits[1].test);
    const auto first = ds.splits;
    ds.make_splits(10, 1);
    CHECK(ds.splits[3].test == first[3].test);
    ds.make_splits(10, 2);
    CHECK(ds.splits[0].train != first[0].train);

    ds.items.resize(40);
    ds.make_splits(2, 1);
    CHECK(ds.splits[0].train.size() == 34);
    ds.make_splits(2, 1, 10);
    CHECK(ds.splits[0].train.size() == 10);
}

TEST_CASE("dataset save and load round-trip, validation and lookups") {
    auto ds = small_synthetic(4);
    const auto dir = temp_dir("scefis_test_ds");
    ds.save(dir);
    const auto back = Dataset::load(dir);
    REQUIRE(back.items.size() == 4);
    for (const auto& s : ds.items) {
        const auto& b = back.get(s.id);
        CHECK(b.gold == s.gold);
        CHECK(b.image.width() == s.image.width());
        // 16-bit storage keeps intensities within half a step.
        for (std::size_t i = 0; i < s.image.size(); ++i) CHECK(std::fabs(b.image.pixels()[i] - s.image.pixels()[i]) <= 0.5 / 255.0 + 1e-12);
    }
    CHECK(back.index_of(ds.items[2].id) == 2);
    CHECK_THROWS(back.get("nope"));
    fs::remove_all(dir);
}

TEST_CASE("train: one image gives 8 rows; a duplicate image adds nothing") {
    auto ds = small_synthetic(6);
    const auto store = FeatureStore::build(ds);
    PipelineConfig cfg;
    const auto sc = self_configure(ds, store, cfg, ids_of(ds));
    const auto best = best_map(offline_best_params(ds, store, cfg.segmenter));

    const auto one = train(ds, {ds.items[0].id}, store, sc.config, best, cfg);
    CHECK(one.rows() == 8);
    CHECK(one.rule_count() <= 8);

    const auto twice = train(ds, {ds.items[0].id, ds.items[0].id}, store, sc.config, best, cfg);
    CHECK(twice.rows() == 8);
    CHECK(twice.rules == one.rules);

    const auto all = train(ds, ids_of(ds), store, sc.config, best, cfg);
    CHECK(all.rows() <= 8 * 6);
    CHECK(all.rule_count() <= static_cast<std::size_t>(all.rows()));
    CHECK_THROWS_AS(train(ds, {}, store, sc.config, best, cfg), ContractViolation);
}

TEST_CASE("offline search and proposals are consistent") {
    auto ds = small_synthetic(6);
    const auto store = FeatureStore::build(ds);
    PipelineConfig cfg;
    const auto sc = self_configure(ds, store, cfg, ids_of(ds));
    const auto recs = offline_best_params(ds, store, cfg.segmenter);
    REQUIRE(recs.size() == 6);
    for (const auto& r : recs) {
        const auto& s = ds.get(r.image_id);
        CHECK(r.score >= jaccard(threshold_segment(s.image, cfg.segmenter.default_value), s.gold));
    }
    const auto rb = train(ds, ids_of(ds), store, sc.config, best_map(recs), cfg);
    const auto p = propose(rb, ds.items[0], store, sc.config, cfg.segmenter);
    CHECK(p.t_o.size() == 8);
    CHECK(cfg.segmenter.snap(p.t_star) == p.t_star);
    CHECK(p.mask == apply_segmenter(cfg.segmenter, ds.items[0].image, store.contexts.at(ds.items[0].id), p.t_star));
}

TEST_CASE("evolve_stream is replayable and self-feedback scores 1") {
    auto ds = small_synthetic(10);
    ds.make_splits(1, 3);
    const auto& sp = ds.splits[0];
    const auto store = FeatureStore::build(ds);
    PipelineConfig cfg;
    const auto sc = self_configure(ds, store, cfg, sp.train);
    const auto best = best_map(offline_best_params(ds, store, cfg.segmenter));
    const auto initial = train(ds, sp.train, store, sc.config, best, cfg);

    auto a = initial;
    const auto log_a = evolve_stream(a, ds, sp.test, gold_feedback(), store, sc.config, cfg.segmenter);
    auto b = initial;
    const auto log_b = evolve_stream(b, ds, sp.test, gold_feedback(), store, sc.config, cfg.segmenter);
    CHECK(log_a == log_b);
    CHECK(a.rules == b.rules);
    CHECK(a.m == b.m);
    std::size_t rows = static_cast<std::size_t>(initial.rows());
    for (const auto& e : log_a.entries) {
        CHECK(e.rule_count <= e.rows_m);
        CHECK(e.rows_m == rows + static_cast<std::size_t>(e.appended_rows));
        rows = e.rows_m;
        CHECK(e.score <= e.best_score);
    }

    // Accepting every proposal untouched.
    auto c = initial;
    const FeedbackProvider accept = [](const Sample&, const BinaryMask& proposal, double) {
        return std::optional<BinaryMask>(proposal);
    };
    for (const auto& e : evolve_stream(c, ds, sp.test, accept, store, sc.config, cfg.segmenter).entries) {
        CHECK(e.score == 1.0);
        CHECK(e.best_score == 1.0);
    }

    // Timeouts are logged and leave the rule base alone.
    auto d = initial;
    const FeedbackProvider never = [](const Sample&, const BinaryMask&, double) { return std::optional<BinaryMask>(); };
    const auto skipped = evolve_stream(d, ds, sp.test, never, store, sc.config, cfg.segmenter);
    CHECK(skipped.entries.size() == sp.test.size());
    for (const auto& e : skipped.entries) CHECK(e.skipped);
    CHECK(d.rules == initial.rules);
}

TEST_CASE("test gold masks do not reach normalization or the initial rule base") {
    auto ds = small_synthetic(10);
    ds.make_splits(1, 5);
    const auto sp = ds.splits[0];
    PipelineConfig cfg;

    auto build = [&](const Dataset& d) {
        const auto store = FeatureStore::build(d);
        const auto sc = self_configure(d, store, cfg, sp.train);
        std::vector<BestParamRecord> recs;
        for (const auto& id : sp.train) {
            const auto& s = d.get(id);
            recs.push_back(best_parameter_search(s.image, s.gold, cfg.segmenter, store.contexts.at(id), id));
        }
        return std::pair{sc, train(d, sp.train, store, sc.config, best_map(recs), cfg)};
    };
    const auto [sc1, rb1] = build(ds);
    auto tampered = ds;
    for (auto& s : tampered.items)
        if (std::find(sp.test.begin(), sp.test.end(), s.id) != sp.test.end()) s.gold = BinaryMask(s.gold.width(), s.gold.height(), true);
    const auto [sc2, rb2] = build(tampered);
    CHECK(sc1.config.selected_columns == sc2.config.selected_columns);
    CHECK(sc1.config.normalization.mean == sc2.config.normalization.mean);
    CHECK(sc1.config.normalization.sd == sc2.config.normalization.sd);
    CHECK(rb1.rules == rb2.rules);
    CHECK(rb1.m == rb2.m);
    CHECK(rb1.o == rb2.o);
}

TEST_CASE("a constant optimum is learned within eps_o") {
    auto ds = two_level_dataset(10);
    PipelineConfig cfg;
    const auto store = FeatureStore::build(ds);
    const auto sc = self_configure(ds, store, cfg, ids_of(ds));
    const auto recs = offline_best_params(ds, store, cfg.segmenter);
    for (const auto& r : recs) {
        CHECK(r.param == 51 / 255.0);
        CHECK(r.score == 1.0);
    }
    const auto ids = ids_of(ds);
    const std::vector<std::string> train_ids(ids.begin(), ids.begin() + 7);
    const auto rb = train(ds, train_ids, store, sc.config, best_map(recs), cfg);
    const double eps_o = rule_settings(cfg, sc.config).eps_o;
    for (int k = 7; k < 10; ++k) {
        const auto p = propose(rb, ds.items[k], store, sc.config, cfg.segmenter);
        CHECK(std::fabs(p.t_star - 51 / 255.0) <= eps_o);
    }
}

TEST_CASE("experiment: MAA dominates every run and reports are deterministic") {
    auto ds = small_synthetic(12);
    PipelineConfig cfg;
    cfg.runs = 2;
    cfg.seed = 11;
    const auto rep = run_experiment(ds, cfg);
    REQUIRE(rep.runs.size() == 2);
    for (const auto& run : rep.runs) {
        const double maa = run.method("maa").summary.mean;
        CHECK(run.method("scefis").summary.mean <= maa);
        CHECK(run.method("default").summary.mean <= maa);
        CHECK(run.rule_trajectory.size() == run.split.test.size() + 1);
        CHECK(run.log.entries.size() == run.split.test.size());
        for (std::size_t i = 0; i < run.log.entries.size(); ++i)
            CHECK(run.method("scefis").scores[i] <= run.method("maa").scores[i]);
    }
    CHECK(rep.aggregate.count("scefis") == 1);

    const auto again = run_experiment(ds, cfg);
    CHECK(format_report(again) == format_report(rep));
    const auto d1 = temp_dir("scefis_test_rep1");
    const auto d2 = temp_dir("scefis_test_rep2");
    write_report(rep, d1);
    write_report(again, d2);
    for (const auto& f : {"runs.csv", "summary.csv", "tests.csv", "images.csv", "maa.csv", "selection.txt",
                          "rules_run1.svg", "rules_all.svg"}) {
        CAPTURE(f);
        REQUIRE(fs::exists(d1 / f));
        CHECK(slurp(d1 / f) == slurp(d2 / f));
    }
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("fusion experiment fuses parents per test image") {
    auto ds = small_synthetic(8);
    PipelineConfig thr;
    thr.runs = 1;
    auto rg = PipelineConfig::parse("segmenter = rg\nruns = 1\n");
    const auto rep = run_fusion_experiment(ds, {thr, rg});
    REQUIRE(rep.runs.size() == 1);
    const auto& f = rep.runs[0].method("fusion");
    CHECK(f.scores.size() == rep.runs[0].split.test.size());
    for (double s : f.scores) CHECK((s >= 0.0 && s <= 1.0));
}

TEST_CASE("F3 CSV and self-config JSON round trips") {
    auto ds = small_synthetic(3);
    const auto store = FeatureStore::build(ds);
    std::vector<ImageFeatureBlock> blocks;
    for (const auto& s : ds.items) blocks.push_back(store.blocks.at(s.id));
    const auto path = fs::temp_directory_path() / "scefis_test_f3.csv";
    write_f3_csv(blocks, path);
    const auto csv = read_f3_csv(path);
    fs::remove(path);
    CHECK(csv.values.rows() == 24);
    CHECK(csv.values.cols() == 108);
    CHECK(csv.column_names[0] == "rc_mean");
    CHECK(csv.column_names[104] == "glcm_ds_0_contrast");
    CHECK(csv.image_ids[8] == ds.items[1].id);
    CHECK(csv.stats[3] == "sd");
    CHECK(csv.values == store.f3_all(ds));

    PipelineConfig cfg;
    const auto sc = self_configure(ds, store, cfg, ids_of(ds));
    const auto back = self_config_from_json(self_config_to_json(sc.config));
    CHECK(back.selected_columns == sc.config.selected_columns);
    CHECK(back.normalization.mean == sc.config.normalization.mean);
    CHECK(back.normalization.sd == sc.config.normalization.sd);
    CHECK(back.window_z == sc.config.window_z);
}

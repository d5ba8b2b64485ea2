#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "scefis/error.hpp"
#include "scefis/pipeline.hpp"
#include "scefis/service.hpp"

namespace fs = std::filesystem;
using namespace scefis;

namespace {

struct Common {
    std::string dataset;
    std::string config;
    int runs = 0;
    long long seed = -1;
};

PipelineConfig load_config(const Common& c) {
    auto cfg = c.config.empty() ? PipelineConfig{} : PipelineConfig::load(c.config);
    if (c.runs > 0) cfg.runs = c.runs;
    if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
    return cfg;
}

std::string config_name(const std::string& path) { return path.empty() ? "default" : fs::path(path).stem().string(); }

void add_common(CLI::App* app, Common& c, bool need_dataset = true) {
    auto* d = app->add_option("--dataset", c.dataset, "dataset root with images/ and gold/");
    if (need_dataset) d->required();
    app->add_option("--config", c.config, "key = value configuration file");
    app->add_option("--runs", c.runs, "number of runs (overrides the config)");
    app->add_option("--seed", c.seed, "random seed (overrides the config)");
}

void print_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot open " + p.string());
    std::cout << in.rdbuf();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-configuring evolving fuzzy image segmentation"};
    app.require_subcommand(1);

    Common common;
    std::string out;
    std::string data_dir;

    auto* configure = app.add_subcommand("configure", "select features and write the self-configuration");
    add_common(configure, common);
    configure->add_option("--out", out, "write selfconfig.json here");

    auto* maa = app.add_subcommand("maa", "exhaustive per-image best parameters");
    add_common(maa, common);
    maa->add_option("--out", out, "CSV output");

    auto* train_cmd = app.add_subcommand("train", "train the initial rule base for the service");
    add_common(train_cmd, common);
    train_cmd->add_option("--data-dir", data_dir, "persistence root (default $SCEFIS_DATA_DIR or ./scefis-data)");

    std::vector<std::string> fusion;
    auto* run = app.add_subcommand("run", "multi-run experiment: default parent, MAA and SC-EFIS");
    add_common(run, common);
    run->add_option("--out", out, "report directory");
    run->add_option("--fusion", fusion, "extra parent configs fused with STAPLE");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "print a report directory written by `run`");
    report->add_option("dir", report_dir, "directory written by run --out")->required();

    std::string image_path;
    int z = 0;
    auto* features = app.add_subcommand("features", "per-image statistic rows (F_2) or the stacked F_3 as CSV");
    features->add_option("--image", image_path, "single image: write its 8 statistic rows");
    features->add_option("--dataset", common.dataset, "dataset root: write the stacked F_3");
    features->add_option("--z", z, "window size (default: derived from the image sizes)");
    features->add_option("--out", out, "CSV output")->required();

    std::string f3_path;
    auto* select = app.add_subcommand("select", "run the selection chain on an F_3 CSV");
    select->add_option("--f3", f3_path, "F_3 CSV written by features")->required();

    std::string kind = "thr";
    double param = 0.0;
    std::string baseline;
    auto* segment = app.add_subcommand("segment", "segment one image with a parent or baseline algorithm");
    segment->add_option("--image", image_path, "input image")->required();
    segment->add_option("--kind", kind, "thr | rg | srm");
    segment->add_option("--param", param, "parent parameter (default: the parent default)");
    segment->add_option("--baseline", baseline, "otsu | kittler | huang | niblack");
    segment->add_option("--out", out, "mask PNG")->required();

    std::string addr = "127.0.0.1:8080";
    auto* serve_cmd = app.add_subcommand("serve", "HTTP review service");
    add_common(serve_cmd, common, false);
    serve_cmd->add_option("--addr", addr, "host:port");
    serve_cmd->add_option("--data-dir", data_dir, "persistence root (default $SCEFIS_DATA_DIR or ./scefis-data)");

    SyntheticOptions syn;
    auto* synth = app.add_subcommand("synth", "write the synthetic lesion dataset");
    synth->add_option("--out", out, "dataset root to create")->required();
    synth->add_option("--count", syn.count, "number of images");
    synth->add_option("--size", syn.width, "image side in pixels");
    synth->add_option("--seed", syn.seed, "random seed");
    synth->add_option("--noise", syn.noise, "speckle amplitude");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*configure) {
            const auto cfg = load_config(common);
            auto ds = Dataset::load(common.dataset);
            ds.make_splits(1, cfg.seed, cfg.train_count);
            DetectorOptions opts;
            opts.order = cfg.seed_order;
            const auto store = FeatureStore::build(ds, opts);
            std::vector<std::string> ids = ds.splits.front().train;
            if (cfg.normalize_on_all_images)
                for (const auto& s : ds.items) ids.push_back(s.id);
            const auto sc = self_configure(ds, store, cfg, ids);
            std::cout << format_trace(sc.trace);
            std::cout << "window_z " << sc.config.window_z << "\n";
            if (!out.empty()) {
                std::ofstream f(out);
                f << self_config_to_json(sc.config);
            }
        } else if (*maa) {
            const auto cfg = load_config(common);
            const auto ds = Dataset::load(common.dataset);
            const auto store = FeatureStore::build(ds);
            const auto recs = offline_best_params(ds, store, cfg.segmenter);
            std::vector<double> scores;
            for (const auto& r : recs) {
                std::cout << r.image_id << " " << r.param << " " << r.score << "\n";
                scores.push_back(r.score);
            }
            const auto s = summarize(scores);
            std::cout << "MAA mean J " << s.mean << " sd " << s.sd << "\n";
            if (!out.empty()) write_best_params_csv(recs, out);
        } else if (*train_cmd) {
            const auto cfg = load_config(common);
            const auto ds = Dataset::load(common.dataset);
            const auto model = train_model(ds, cfg);
            const auto dir = model_dir(resolve_data_dir(data_dir.empty() ? "scefis-data" : data_dir), ds.name,
                                       config_name(common.config));
            save_model(model, dir);
            std::cout << "rules " << model.rules.rule_count() << ", rows(M) " << model.rules.rows() << ", queue "
                      << model.queue.size() << " images -> " << dir.string() << "\n";
        } else if (*run) {
            const auto cfg = load_config(common);
            const auto ds = Dataset::load(common.dataset);
            ExperimentReport rep;
            if (fusion.empty()) {
                rep = run_experiment(ds, cfg);
            } else {
                std::vector<PipelineConfig> parents{cfg};
                for (const auto& f : fusion) {
                    auto p = PipelineConfig::load(f);
                    p.runs = cfg.runs;
                    p.seed = cfg.seed;
                    parents.push_back(p);
                }
                rep = run_fusion_experiment(ds, parents);
            }
            std::cout << format_report(rep);
            if (!out.empty()) write_report(rep, out);
        } else if (*report) {
            std::cout << "== summary ==\n";
            print_file(fs::path(report_dir) / "summary.csv");
            std::cout << "== runs ==\n";
            print_file(fs::path(report_dir) / "runs.csv");
            std::cout << "== tests ==\n";
            print_file(fs::path(report_dir) / "tests.csv");
        } else if (*features) {
            std::vector<ImageFeatureBlock> blocks;
            if (!image_path.empty()) {
                const auto img = load_image(image_path);
                const int zz = z > 0 ? z : compute_window_size({{img.height(), img.width()}});
                blocks.push_back(image_feature_block(img, zz, fs::path(image_path).stem().string()));
            } else if (!common.dataset.empty()) {
                const auto ds = Dataset::load(common.dataset);
                const auto store = FeatureStore::build(ds);
                for (const auto& s : ds.items) blocks.push_back(store.blocks.at(s.id));
            } else {
                throw ContractViolation("features: pass --image or --dataset");
            }
            write_f3_csv(blocks, out);
        } else if (*select) {
            const auto m = read_f3_csv(f3_path);
            std::cout << format_trace(self_select(m.values));
        } else if (*segment) {
            const auto img = load_image(image_path);
            BinaryMask mask;
            if (!baseline.empty()) {
                mask = baseline_threshold(img, baseline_from_string(baseline));
            } else {
                auto spec = SegmenterSpec::defaults(segmenter_kind_from_string(kind));
                const double p = segment->count("--param") ? param : spec.default_value;
                const int zz = compute_window_size({{img.height(), img.width()}});
                mask = apply_segmenter(spec, img, SegmentationContext::from_detection(img, zz), p);
            }
            save_mask(mask, out);
            std::cout << mask.count() << " object pixels\n";
        } else if (*serve_cmd) {
            const auto root = resolve_data_dir(data_dir.empty() ? "scefis-data" : data_dir);
            SessionStore store(root);
            if (!common.dataset.empty()) {
                auto name = fs::path(common.dataset).filename().string();
                if (name.empty()) name = fs::path(common.dataset).parent_path().filename().string();
                store.register_dataset(name, common.dataset);
                std::cout << "dataset '" << name << "'\n";
            }
            if (!common.config.empty()) {
                store.register_config(config_name(common.config), common.config);
                std::cout << "config '" << config_name(common.config) << "'\n";
            }
            const auto colon = addr.rfind(':');
            if (colon == std::string::npos) throw ContractViolation("--addr must be host:port");
            const auto host = addr.substr(0, colon);
            const int port = std::stoi(addr.substr(colon + 1));
            std::cout << "listening on " << host << ":" << port << ", data " << root.string() << std::endl;
            serve(store, host, port);
        } else if (*synth) {
            syn.height = syn.width;
            make_synthetic_dataset(syn).save(out);
            std::cout << syn.count << " images -> " << out << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

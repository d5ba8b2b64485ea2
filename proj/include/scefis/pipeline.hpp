#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scefis/featsel.hpp"
#include "scefis/fuzzy.hpp"
#include "scefis/image.hpp"
#include "scefis/keyfeat.hpp"
#include "scefis/metrics.hpp"
#include "scefis/segmenters.hpp"

namespace scefis {

// --- configuration ------------------------------------------------------------

/**
 * Experiment configuration, read from a `key = value` text file.
 *
 *   segmenter            thr | rg | srm
 *   grid                 comma-separated values (optional; defaults per segmenter)
 *   default              default parameter (must be a grid value)
 *   polarity             dark | bright
 *   keep_all_components  true | false
 *   eps_x, eps_o         pruning thresholds or "auto"
 *   knn, clusters        graph selector sizes
 *   bandwidth            Gaussian bandwidth or "auto"
 *   mcfs_ridge           ridge penalty of the multi-cluster regression
 *   cluster_radius, cluster_squash, cluster_accept, cluster_reject
 *   consequent_ridge     consequent ridge penalty, 0 for minimum-norm least squares (default 0.1)
 *   seed_order           response | descriptor
 *   normalization        train | all
 *   train_count          training images per run, or "auto"
 *   runs, seed
 *   feedback_timeout_ms  interactive feedback wait (service)
 *
 * Lines starting with '#' are comments.
 */
struct PipelineConfig {
    SegmenterSpec segmenter = SegmenterSpec::defaults(SegmenterKind::Threshold);
    std::optional<double> eps_x;
    std::optional<double> eps_o;
    SelectorOptions selectors;
    ClusteringOptions clustering;
    double consequent_ridge = 0.1;
    SeedOrder seed_order = SeedOrder::Response;
    bool normalize_on_all_images = false;
    std::optional<int> train_count;
    int runs = 10;
    std::uint64_t seed = 42;
    int feedback_timeout_ms = 600000;

    static PipelineConfig parse(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
    std::string to_text() const;
};

// --- dataset ------------------------------------------------------------------

struct Sample {
    std::string id;
    GrayImage image;
    BinaryMask gold;
};

struct Split {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

struct Dataset {
    std::string name;
    std::vector<Sample> items;
    std::vector<Split> splits;

    /// `<root>/images/<id>.{png,pgm}` paired with `<root>/gold/<id>.{png,pgm}`.
    static Dataset load(const std::filesystem::path& root);
    void save(const std::filesystem::path& root) const;

    const Sample& get(const std::string& id) const;
    std::size_t index_of(const std::string& id) const;
    void validate() const;

    /// Seeded random splits; 30/5 for 35 images, otherwise 85/15 unless `train_count` is given.
    void make_splits(int runs, std::uint64_t seed, std::optional<int> train_count = std::nullopt);
};

struct SyntheticOptions {
    int count = 40;
    int width = 96;
    int height = 96;
    std::uint64_t seed = 7;
    double contrast = 0.28;        ///< background minus lesion intensity
    double contrast_jitter = 0.03;
    double noise = 0.30;           ///< speckle amplitude before smoothing
};

/**
 * Dark elliptical lesions on brighter speckled background. The lesion mean is drawn per
 * image, the background sits a (jittered) fixed contrast above it, so the best threshold
 * is roughly affine in the lesion intensity.
 */
Dataset make_synthetic_dataset(const SyntheticOptions& opts = {});

// --- phases -------------------------------------------------------------------

/// Cached F_2 blocks for every image at the dataset-wide window size.
struct FeatureStore {
    int window_z = kMinWindow;
    std::map<std::string, ImageFeatureBlock> blocks;
    std::map<std::string, SegmentationContext> contexts;

    static FeatureStore build(const Dataset& ds, const DetectorOptions& opts = {});
    Eigen::MatrixXd f3(const std::vector<std::string>& ids) const;
    Eigen::MatrixXd f3_all(const Dataset& ds) const;
};

struct SelfConfiguration {
    SelfConfig config;
    SelectionTrace trace;
};

/// Column statistics of the selected F_2 columns over the rows of `ids`.
Normalization fit_normalization(const FeatureStore& store, const std::vector<int>& columns,
                                const std::vector<std::string>& ids);

/// Self-configuration over all images; normalization from `normalization_ids` rows.
SelfConfiguration self_configure(const Dataset& ds, const FeatureStore& store, const PipelineConfig& cfg,
                                 const std::vector<std::string>& normalization_ids);

/// Convenience: builds the feature store and normalizes on every image.
SelfConfiguration self_configure(const Dataset& ds, const PipelineConfig& cfg = {});

std::vector<BestParamRecord> offline_best_params(const Dataset& ds, const FeatureStore& store,
                                                 const SegmenterSpec& spec);

RuleBaseSettings rule_settings(const PipelineConfig& cfg, const SelfConfig& sc);

/// Initial rule base from the training images of one split (pruning from the second image on).
RuleBase train(const Dataset& ds, const std::vector<std::string>& train_ids, const FeatureStore& store,
               const SelfConfig& sc, const std::map<std::string, BestParamRecord>& best,
               const PipelineConfig& cfg);

struct EvolutionEntry {
    std::string image_id;
    std::vector<double> t_o;
    double t_star = 0.0;    ///< aggregated and snapped to the grid
    double score = 0.0;     ///< Jaccard of the applied mask against the feedback mask
    double t_b = 0.0;       ///< best parameter against the feedback mask
    double best_score = 0.0;
    int appended_rows = 0;
    std::size_t rule_count = 0;
    std::size_t rows_m = 0;
    bool skipped = false;
};

struct EvolutionLog {
    std::vector<EvolutionEntry> entries;
    bool operator==(const EvolutionLog& o) const;
};

/// Supplies the corrected mask for a proposal; std::nullopt means the reviewer timed out.
using FeedbackProvider =
    std::function<std::optional<BinaryMask>(const Sample& sample, const BinaryMask& proposal, double t_star)>;

/// Batch-mode feedback: the stored gold mask.
FeedbackProvider gold_feedback();

struct Proposal {
    std::vector<double> t_o;
    double t_star = 0.0;
    BinaryMask mask;
};

/// Inference and segmentation for one image with the current rules (no mutation).
Proposal propose(const RuleBase& rb, const Sample& sample, const FeatureStore& store, const SelfConfig& sc,
                 const SegmenterSpec& spec);

/// Evolution with a corrected mask; fills the bookkeeping fields of `entry`.
RuleBase apply_feedback(const RuleBase& rb, const Sample& sample, const BinaryMask& corrected,
                        const FeatureStore& store, const SelfConfig& sc, const SegmenterSpec& spec,
                        EvolutionEntry& entry);

/// Online evolution loop over the test images. `rb` is updated in place (single writer).
EvolutionLog evolve_stream(RuleBase& rb, const Dataset& ds, const std::vector<std::string>& test_ids,
                           const FeedbackProvider& feedback, const FeatureStore& store, const SelfConfig& sc,
                           const SegmenterSpec& spec);

// --- experiment ---------------------------------------------------------------

struct MethodRun {
    std::string method;  ///< "default", "maa", "scefis", "fusion"
    std::vector<std::string> image_ids;
    std::vector<double> scores;
    ScoreSummary summary;
};

struct RunReport {
    int run = 0;
    Split split;
    std::vector<MethodRun> methods;
    TTestResult paired_vs_default;
    TTestResult welch_vs_default;
    EvolutionLog log;
    std::vector<std::size_t> rule_trajectory;  ///< initial count, then after each test image
    std::size_t initial_rows = 0;

    const MethodRun& method(const std::string& name) const;
};

struct ExperimentReport {
    std::string dataset;
    std::string segmenter;
    SelfConfiguration self_config;  ///< selection is shared; normalization is per run
    std::vector<BestParamRecord> maa_records;
    std::vector<RunReport> runs;
    /// Means of the per-run means, per method.
    std::map<std::string, ScoreSummary> aggregate;
};

/// Seeded 10-run style harness: default parent, MAA and SC-EFIS per run.
ExperimentReport run_experiment(Dataset ds, const PipelineConfig& cfg);

/// SC-EFIS for several parents per run, fused per test image with STAPLE.
ExperimentReport run_fusion_experiment(Dataset ds, const std::vector<PipelineConfig>& parents);

/// Writes runs.csv, images.csv, summary.csv, maa.csv, selection.txt and rules_run<k>.svg.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

/// Plain-text table of the per-run rows.
std::string format_report(const ExperimentReport& report);

std::string rule_trajectory_svg(const std::vector<std::vector<std::size_t>>& trajectories, const std::string& title);

// --- CSV helpers --------------------------------------------------------------

/// F_3 as CSV: image_id, stat, then the 108 feature columns.
void write_f3_csv(const std::vector<ImageFeatureBlock>& blocks, const std::filesystem::path& path);
/// Reads a CSV written by write_f3_csv (any number of feature columns).
struct F3Csv {
    std::vector<std::string> image_ids;  ///< one per row
    std::vector<std::string> stats;      ///< one per row
    std::vector<std::string> column_names;
    Eigen::MatrixXd values;
};
F3Csv read_f3_csv(const std::filesystem::path& path);
void write_best_params_csv(const std::vector<BestParamRecord>& records, const std::filesystem::path& path);

// SelfConfig persistence (JSON).
std::string self_config_to_json(const SelfConfig& sc);
SelfConfig self_config_from_json(const std::string& text);

}  // namespace scefis

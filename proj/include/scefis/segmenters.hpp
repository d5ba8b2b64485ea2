#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scefis/image.hpp"
#include "scefis/keyfeat.hpp"

namespace scefis {

enum class SegmenterKind { Threshold, RegionGrow, Srm };
enum class Polarity { Dark, Bright };

std::string to_string(SegmenterKind k);
SegmenterKind segmenter_kind_from_string(const std::string& s);  ///< "thr"/"threshold", "rg", "srm"

/// A parent algorithm with the grid its single parameter is searched over.
struct SegmenterSpec {
    SegmenterKind kind = SegmenterKind::Threshold;
    std::vector<double> grid;
    double default_value = 0.0;
    Polarity polarity = Polarity::Dark;
    bool keep_all_components = false;

    /// Grids: threshold k/255 (default 128/255), RG 0.01..0.50 (default 0.17), SRM powers of two 1..256 (default 32).
    static SegmenterSpec defaults(SegmenterKind kind);
    void validate() const;
    double lo() const { return grid.front(); }
    double hi() const { return grid.back(); }
    double span() const { return grid.back() - grid.front(); }
    /// Closest grid value; ties go to the smaller value.
    double snap(double v) const;
};

struct BestParamRecord {
    std::string image_id;
    double param = 0.0;
    double score = 0.0;
};

/// Per-image inputs the parent algorithms need besides the parameter.
struct SegmentationContext {
    /// Seeds for region growing and the SRM anchor; the first entry is the strongest.
    std::vector<std::pair<int, int>> seeds;

    /// Strongest detected seed of `img` with window `z` (dataset-wide Z in the pipeline).
    static SegmentationContext from_detection(const GrayImage& img, int z);
};

/// Thresholding before component filtering: v <= t (dark) or v >= t (bright).
BinaryMask threshold_pixels(const GrayImage& img, double t, Polarity polarity);

/// Global thresholding followed by largest-component retention unless `keep_all_components`.
BinaryMask threshold_segment(const GrayImage& img, double t, Polarity polarity = Polarity::Dark,
                             bool keep_all_components = false);

/// 4-connected growth from every seed with a running-mean similarity test; union over seeds.
BinaryMask region_grow(const GrayImage& img, const std::vector<std::pair<int, int>>& seeds, double sim);

struct SrmPartition {
    std::vector<int> labels;  ///< dense labels 0..count-1, row-major
    int count = 0;
};

/// Statistical region merging with Q = q, g = 1, delta = 1 / (6 |I|^2).
SrmPartition srm_partition(const GrayImage& img, double q);

/// Region of the SRM partition containing `anchor`.
BinaryMask srm_segment(const GrayImage& img, double q, std::pair<int, int> anchor);

/// Anchor taken from the strongest detected seed point.
BinaryMask srm_segment(const GrayImage& img, double q);

enum class BaselineMethod { Otsu, Kittler, Huang, Niblack };

std::string to_string(BaselineMethod m);
BaselineMethod baseline_from_string(const std::string& s);

struct NiblackParams {
    int window = 15;
    double k = -0.2;
};

/// Global level chosen by Otsu, Kittler-Illingworth or Huang on a 256-bin histogram.
double global_threshold_level(const GrayImage& img, BaselineMethod method);

/// Per-pixel Niblack threshold: local mean + k * local sd.
std::vector<double> niblack_levels(const GrayImage& img, const NiblackParams& params = {});

BinaryMask baseline_threshold(const GrayImage& img, BaselineMethod method, Polarity polarity = Polarity::Dark,
                              bool keep_all_components = false, const NiblackParams& params = {});

/// Runs the parent algorithm named by `spec` at `param`.
BinaryMask apply_segmenter(const SegmenterSpec& spec, const GrayImage& img, const SegmentationContext& ctx,
                           double param);

/// Exhaustive grid search for the Jaccard-maximizing parameter; ties go to the smaller parameter.
BestParamRecord best_parameter_search(const GrayImage& img, const BinaryMask& gold, const SegmenterSpec& spec,
                                      const SegmentationContext& ctx, const std::string& image_id = {});

/// Jaccard of every grid value, aligned with spec.grid.
std::vector<double> grid_scores(const GrayImage& img, const BinaryMask& gold, const SegmenterSpec& spec,
                                const SegmentationContext& ctx);

struct StapleTrace {
    int iterations = 0;
    std::vector<double> sensitivity;
    std::vector<double> specificity;
    std::vector<double> posterior;  ///< per pixel
    double log_likelihood = 0.0;
};

/// Binary STAPLE: EM over rater sensitivity/specificity; output is posterior >= 0.5.
BinaryMask staple_fuse(const std::vector<BinaryMask>& masks, StapleTrace* trace = nullptr);

}  // namespace scefis

#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <utility>
#include <vector>

#include "scefis/image.hpp"

namespace scefis {

inline constexpr int kNumFeatures = 108;  ///< raw per-seed feature vector width
inline constexpr int kNumStatRows = 8;    ///< statistic rows per image block
inline constexpr int kDescriptorSize = 128;
inline constexpr int kMinWindow = 8;

using FeatureVector = std::array<double, kNumFeatures>;

struct SeedPoint {
    int x = 0;
    int y = 0;
    double response = 0.0;  ///< |DoG| at the extremum, 0 for grid points
    double scale = 0.0;     ///< Gaussian sigma the descriptor was sampled at
    std::array<double, kDescriptorSize> descriptor{};
    /// Gradient mass gathered before descriptor normalization (descriptor-norm ordering key).
    double descriptor_mass = 0.0;
};

/// Per-column standardization learned from training rows.
struct Normalization {
    std::vector<double> mean;
    std::vector<double> sd;  ///< never zero; degenerate columns store 1

    bool empty() const { return mean.empty(); }
    Eigen::RowVectorXd apply(const Eigen::RowVectorXd& row) const;
    Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;
    static Normalization fit(const Eigen::MatrixXd& rows);
    static Normalization identity(int dim);
};

struct SelfConfig {
    int window_z = kMinWindow;
    int n_total_features = kNumFeatures;
    std::vector<int> selected_columns;  ///< strictly increasing indices into the 108-wide vector
    Normalization normalization;        ///< per selected column, training rows only

    void validate() const;
};

/// Statistic rows of one image: rows are mean, median, mode, sd, co-variance, range, min, max.
struct ImageFeatureBlock {
    std::string image_id;
    Eigen::MatrixXd rows;  ///< kNumStatRows x kNumFeatures

    /// Rows restricted to the given raw columns.
    Eigen::MatrixXd select(const std::vector<int>& columns) const;
};

enum class SeedOrder { Response, DescriptorNorm };

struct DetectorOptions {
    int octave_layers = 3;
    double sigma = 1.6;
    double contrast_threshold = 0.04;  ///< divided by octave_layers, on [0,1] intensities
    double edge_ratio = 10.0;
    SeedOrder order = SeedOrder::Response;
    int min_points = 4;
};

/// Z = round(0.1 * max(median rows, median cols)), never below 8.
int compute_window_size(const std::vector<std::pair<int, int>>& dims_rows_cols);

/**
 * Difference-of-Gaussians keypoints over the whole image.
 *
 * Candidates are ranked (by response unless configured otherwise) and kept greedily
 * when they are at least `z` apart along x or along y from every kept point. When fewer
 * than `min_points` survive, grid points spaced `z` apart top up the list under the
 * same separation rule.
 */
std::vector<SeedPoint> detect_seed_points(const GrayImage& img, int z, const DetectorOptions& opts = {});

/// Raw DoG extrema before separation filtering, unsorted.
std::vector<SeedPoint> dog_extrema(const GrayImage& img, const DetectorOptions& opts = {});

/// 4x4x8 orientation-histogram descriptor at (x, y) for the given sigma, zero orientation.
void compute_descriptor(const GrayImage& img, SeedPoint& p);

/// The 108 features of the z x z window centred on `p` (clamped to the image).
FeatureVector extract_features(const GrayImage& img, const SeedPoint& p, int z);

/// F_2 of one image: extract features around every seed, reduce each column by the 8 statistics.
ImageFeatureBlock image_feature_block(const GrayImage& img, int z, const std::string& image_id = {},
                                      const DetectorOptions& opts = {});

/// Reduces an N_F x 108 matrix to the 8 statistic rows.
Eigen::MatrixXd statistic_rows(const Eigen::MatrixXd& per_seed);

/// Stacks blocks into F_3 (8 * N_I rows).
Eigen::MatrixXd stack_blocks(const std::vector<ImageFeatureBlock>& blocks);

/// Column identifiers in output order; stable across releases.
const std::array<std::string, kNumFeatures>& feature_column_names();

extern const std::array<const char*, kNumStatRows> kStatRowNames;

// Building blocks, exposed for testing.
namespace features {

/// mean, median, sd, co-variance, mode, range, min, max (window order).
std::array<double, 8> window_statistics(const std::vector<double>& values);
double mode_of(const std::vector<double>& values);
Eigen::MatrixXd dct2(const Eigen::MatrixXd& block);
Eigen::MatrixXd haar_approximation(const Eigen::MatrixXd& block);
Eigen::MatrixXd gradient_magnitude(const Eigen::MatrixXd& block);

struct GlcmStats {
    double contrast = 0.0;
    double correlation = 0.0;
    double energy = 1.0;
    double homogeneity = 1.0;
};

/// Symmetric, normalized 8-level co-occurrence statistics at offset (drow, dcol).
GlcmStats glcm(const Eigen::MatrixXd& block, int drow, int dcol, int levels = 8);

}  // namespace features

}  // namespace scefis

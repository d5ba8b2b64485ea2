#include <cmath>

#include "scefis/error.hpp"
#include "scefis/keyfeat.hpp"

namespace scefis {

Eigen::MatrixXd statistic_rows(const Eigen::MatrixXd& per_seed) {
    require(per_seed.rows() >= 1, "statistic_rows: no seed rows");
    Eigen::MatrixXd out(kNumStatRows, per_seed.cols());
    std::vector<double> col(per_seed.rows());
    for (Eigen::Index j = 0; j < per_seed.cols(); ++j) {
        for (Eigen::Index i = 0; i < per_seed.rows(); ++i) col[i] = per_seed(i, j);
        // window order: mean, median, sd, cov, mode, range, min, max
        const auto s = features::window_statistics(col);
        const std::array<double, kNumStatRows> row_order = {s[0], s[1], s[4], s[2], s[3], s[5], s[6], s[7]};
        for (int r = 0; r < kNumStatRows; ++r) out(r, j) = std::isfinite(row_order[r]) ? row_order[r] : 0.0;
    }
    return out;
}

ImageFeatureBlock image_feature_block(const GrayImage& img, int z, const std::string& image_id,
                                      const DetectorOptions& opts) {
    const auto seeds = detect_seed_points(img, z, opts);
    Eigen::MatrixXd f1(static_cast<Eigen::Index>(seeds.size()), kNumFeatures);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto v = extract_features(img, seeds[i], z);
        for (int j = 0; j < kNumFeatures; ++j) f1(static_cast<Eigen::Index>(i), j) = v[j];
    }
    return {image_id, statistic_rows(f1)};
}

Eigen::MatrixXd ImageFeatureBlock::select(const std::vector<int>& columns) const {
    Eigen::MatrixXd out(rows.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) {
        require(columns[k] >= 0 && columns[k] < rows.cols(), "ImageFeatureBlock::select: column out of range");
        out.col(static_cast<Eigen::Index>(k)) = rows.col(columns[k]);
    }
    return out;
}

Eigen::MatrixXd stack_blocks(const std::vector<ImageFeatureBlock>& blocks) {
    Eigen::MatrixXd f3(static_cast<Eigen::Index>(blocks.size()) * kNumStatRows, kNumFeatures);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        require(blocks[b].rows.rows() == kNumStatRows && blocks[b].rows.cols() == kNumFeatures,
                "stack_blocks: block is not 8x108");
        f3.middleRows(static_cast<Eigen::Index>(b) * kNumStatRows, kNumStatRows) = blocks[b].rows;
    }
    return f3;
}

}  // namespace scefis

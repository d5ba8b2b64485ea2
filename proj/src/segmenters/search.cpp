#include "scefis/error.hpp"
#include "scefis/metrics.hpp"
#include "scefis/segmenters.hpp"

namespace scefis {

SegmentationContext SegmentationContext::from_detection(const GrayImage& img, int z) {
    SegmentationContext ctx;
    for (const auto& p : detect_seed_points(img, z)) ctx.seeds.emplace_back(p.x, p.y);
    if (ctx.seeds.empty()) ctx.seeds.emplace_back(img.width() / 2, img.height() / 2);
    return ctx;
}

BinaryMask apply_segmenter(const SegmenterSpec& spec, const GrayImage& img, const SegmentationContext& ctx,
                           double param) {
    switch (spec.kind) {
        case SegmenterKind::Threshold:
            return threshold_segment(img, param, spec.polarity, spec.keep_all_components);
        case SegmenterKind::RegionGrow:
            require(!ctx.seeds.empty(), "apply_segmenter: region growing needs a seed");
            return region_grow(img, {ctx.seeds.front()}, param);
        case SegmenterKind::Srm:
            require(!ctx.seeds.empty(), "apply_segmenter: SRM needs an anchor seed");
            return srm_segment(img, param, ctx.seeds.front());
    }
    throw ContractViolation("apply_segmenter: unknown segmenter kind");
}

std::vector<double> grid_scores(const GrayImage& img, const BinaryMask& gold, const SegmenterSpec& spec,
                                const SegmentationContext& ctx) {
    require(gold.same_shape(img), "best_parameter_search: image and gold dimensions differ");
    spec.validate();
    std::vector<double> scores;
    scores.reserve(spec.grid.size());
    for (double p : spec.grid) scores.push_back(jaccard(apply_segmenter(spec, img, ctx, p), gold));
    return scores;
}

BestParamRecord best_parameter_search(const GrayImage& img, const BinaryMask& gold, const SegmenterSpec& spec,
                                      const SegmentationContext& ctx, const std::string& image_id) {
    const auto scores = grid_scores(img, gold, spec, ctx);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return {image_id, spec.grid[best], scores[best]};
}

}  // namespace scefis

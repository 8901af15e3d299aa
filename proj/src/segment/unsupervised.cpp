#include <algorithm>
#include <cmath>

#include "dermabcd/segment.hpp"

namespace dermabcd {

std::pair<int, int> working_dimensions(int width, int height, int longest) {
    if (width <= 0 || height <= 0 || longest <= 0) {
        throw std::invalid_argument("working_dimensions: sizes must be positive");
    }
    if (width >= height) {
        const int h = static_cast<int>(std::lround(static_cast<double>(height) * longest / width));
        return {longest, std::max(h, 1)};
    }
    const int w = static_cast<int>(std::lround(static_cast<double>(width) * longest / height));
    return {std::max(w, 1), longest};
}

UnsupervisedResult segment_unsupervised(const RgbImage& img, const LevelSetParams& params, int working_size,
                                        bool keep_stages) {
    if (img.empty()) {
        throw std::invalid_argument("segment_unsupervised: empty image");
    }
    const auto [ww, wh] = working_dimensions(img.width(), img.height(), working_size);
    RgbImage work = (ww == img.width() && wh == img.height()) ? img : resize_bilinear(img, ww, wh);
    const auto gray = to_grayscale(work);
    const auto init = threshold_init(gray);
    UnsupervisedResult result;
    result.level_set = evolve_level_set(gray, init, params);
    result.mask = resize_nearest(result.level_set.mask, img.width(), img.height());
    if (keep_stages) {
        result.stages = UnsupervisedStages{std::move(work), gray, init, result.level_set.mask};
    }
    return result;
}

}  // namespace dermabcd

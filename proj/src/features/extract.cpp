#include <cmath>

#include "dermabcd/features.hpp"

namespace dermabcd {

std::array<double, FeatureVector::kSize> FeatureVector::values() const {
    return {asymmetry_index, asymmetry, compactness, radial_variance, irregularity_index,
            correlation,     homogeneity, energy,    contrast,        diameter};
}

const std::array<const char*, FeatureVector::kSize>& FeatureVector::column_names() {
    static const std::array<const char*, kSize> names = {"asym_idx", "asym",  "compact", "radial_var", "irreg",
                                                         "corr",     "homog", "energy",  "contrast",   "diam_px"};
    return names;
}

FeatureVector extract_features(const RgbImage& img, const BinaryMask& mask, const FeatureConfig& config) {
    if (img.width() != mask.width() || img.height() != mask.height()) {
        throw std::invalid_argument("extract_features: image and mask sizes differ");
    }
    if (config.offsets.empty()) {
        throw std::invalid_argument("extract_features: no GLCM offsets");
    }
    if (!mask.any()) {
        throw std::invalid_argument("extract_features: empty mask");
    }
    const auto box = bounding_box(mask);
    const auto m = crop(mask, box.min_x, box.min_y, box.width(), box.height());
    const auto gray = crop(to_grayscale(img), box.min_x, box.min_y, box.width(), box.height());
    const auto contour = trace_contour(m);

    FeatureVector f;
    f.asymmetry_index = asymmetry_index(m);
    f.asymmetry = asymmetry(m);
    f.compactness = compactness(m);
    f.radial_variance = radial_variance(m);
    f.irregularity_index = irregularity_index(gray, m, config.irregularity);
    for (const auto& off : config.offsets) {
        const auto h = haralick(glcm(gray, m, config.ng, off));
        f.correlation += h.correlation;
        f.homogeneity += h.homogeneity;
        f.energy += h.energy;
        f.contrast += h.contrast;
    }
    const auto n = static_cast<double>(config.offsets.size());
    f.correlation /= n;
    f.homogeneity /= n;
    f.energy /= n;
    f.contrast /= n;
    const auto d = diameter(contour, config.mm_per_px);
    f.diameter = d.pixels;
    f.diameter_mm = d.mm;
    for (double v : f.values()) {
        if (!std::isfinite(v)) {
            throw std::runtime_error("extract_features: non-finite feature");
        }
    }
    return f;
}

}  // namespace dermabcd

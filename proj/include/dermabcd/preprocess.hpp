#pragma once

// Hair-occlusion repair: ridge detection with oriented second-derivative-of-
// Gaussian filters, morphological refinement of the candidate mask, and
// fast-marching inpainting of the occluded pixels.

#include <vector>

#include "dermabcd/image.hpp"

namespace dermabcd {

struct HairDetectorParams {
    std::vector<double> sigmas{1.0, 2.0, 3.0};
    int orientations = 8;
    /// Fraction of the strongest ridge response a pixel must reach.
    double response_threshold = 0.15;
    /// Absolute response floor (gray units); keeps hair-free images empty.
    double min_response = 0.04;
    /// Major/minor axis ratio a component needs to count as hair.
    double min_elongation = 4.0;
    /// Major-axis length (pixels) a component needs to count as hair.
    double min_length = 12.0;
    /// Components with a lower elongation still count as hair when a disk
    /// erosion of this radius removes at least 90% of their pixels.
    int max_half_width = 3;

    void validate() const;
};

struct InpaintParams {
    int radius = 5;

    void validate() const;
};

/// Scale-normalized ridge strength, max over scales and orientations.
/// Dark curvilinear structures respond positively; step edges and isotropic
/// blobs are suppressed by the gradient and cross-curvature terms.
GrayImage ridge_response(const GrayImage& img, const HairDetectorParams& params);

BinaryMask detect_hairs(const GrayImage& img, const HairDetectorParams& params = {});

/// Closing (3x3), elongation/thinness and length filtering per
/// component, then a one-pixel dilation of the survivors.
BinaryMask refine_hair_mask(const BinaryMask& mask, const HairDetectorParams& params = {});

/// Major/minor axis ratio from central second moments (infinity for
/// one-pixel-thin straight components).
double elongation(const BinaryMask& component);

/// Fast-marching (Telea) inpainting. Pixels outside the mask are returned
/// unchanged. Throws std::invalid_argument when the mask covers the image.
GrayImage inpaint_fmm(const GrayImage& img, const BinaryMask& mask, const InpaintParams& params = {});
RgbImage inpaint_fmm(const RgbImage& img, const BinaryMask& mask, const InpaintParams& params = {});

struct HairRemovalResult {
    RgbImage image;
    BinaryMask hair_mask;  ///< refined mask that was inpainted
};

HairRemovalResult remove_hair(const RgbImage& img, const HairDetectorParams& detector = {},
                              const InpaintParams& inpaint = {});

}  // namespace dermabcd

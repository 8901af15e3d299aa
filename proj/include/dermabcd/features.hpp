#pragma once

// ABCD feature bank: asymmetry, border irregularity, color texture and
// diameter of a segmented lesion. The ten-value FeatureVector is the
// classifier input and the CSV column contract.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dermabcd/image.hpp"

namespace dermabcd {

// ---------------------------------------------------------------------------
// Asymmetry
// ---------------------------------------------------------------------------

/// |A ∩ B| / |A ∪ B| where B is the mask rotated 180° about its centroid
/// (nearest-neighbour inverse mapping, exact integer rounding).
double asymmetry_index(const BinaryMask& mask);

struct PrincipalAxes {
    Vec2 centroid;
    Vec2 major;  ///< unit eigenvector of the larger second moment
    Vec2 minor;
    double lambda_major = 0.0;
    double lambda_minor = 0.0;
    bool degenerate = false;  ///< eigenvalues equal to 1e-3 relative; axes arbitrary
};

/// Eigen-decomposition of the central second-moment matrix. Throws
/// std::invalid_argument for masks with fewer than two pixels.
PrincipalAxes principal_axes(const BinaryMask& mask);

/// Overlap ratio between the mask and its reflection across the line
/// through `centre` with unit direction `axis`.
double reflection_overlap(const BinaryMask& mask, Vec2 centre, Vec2 axis);

/// Best overlap ratio over four axes through the centroid: the principal
/// pair and their two 45° diagonals.
double asymmetry(const BinaryMask& mask);

// ---------------------------------------------------------------------------
// Border
// ---------------------------------------------------------------------------

/// p^2 / (4 pi a).
double compactness(double perimeter, double area);
/// Traced-contour perimeter and pixel area. Throws for multi-component masks.
double compactness(const BinaryMask& mask);
double compactness(const Polygon& poly);

/// Box-counting dimension: -slope of log N(r) against log r for
/// r = 2, 4, 8, ... up to a quarter of the larger contour extent. Throws
/// std::invalid_argument for fewer than 16 points or 3 scales.
double fractal_dimension(const Contour& contour);

struct RadialProfile {
    Vec2 centroid;
    std::vector<double> distances;  ///< per contour point
    double mean = 0.0;
};
RadialProfile radial_profile(const BinaryMask& mask);

/// Variance of contour-to-centroid distances divided by their squared mean.
double radial_variance(const BinaryMask& mask);
/// pi m^2 / area for the circle of mean radial distance m.
double radial_circle_ratio(const BinaryMask& mask);

/// Periodic Gaussian smoothing of the x and y sequences; point count kept.
Polygon smooth_contour(const Polygon& contour, double sigma);
Polygon smooth_contour(const Contour& contour, double sigma);

struct NcdProfile {
    Vec2 centroid;
    std::vector<double> path_means;  ///< Av_i over the inverted gray
    double lesion_mean = 0.0;        ///< A_L
    std::vector<double> ncd;         ///< Av_i * 100 / A_L
    Polygon contour;                 ///< radius m * NCD_i / 100 towards boundary point i
};

/// Radial pigment profile over the inverted gray image. Throws
/// std::invalid_argument when A_L is zero.
NcdProfile ncd_profile(const GrayImage& gray, const BinaryMask& mask);
Polygon ncd_contour(const GrayImage& gray, const BinaryMask& mask);

struct IrregularityParams {
    double presmooth_sigma = 1.0;     ///< removes the raster staircase from both contours (points)
    double sigma_fraction = 0.01;     ///< per-pass smoothing scale as a fraction of the point count
    double stop_epsilon = 0.01;
    int max_iters = 200;
};

struct IrregularityResult {
    double index = 1.0;
    int iterations = 0;
    bool converged = true;
    double target_compactness = 1.0;  ///< compactness of the pre-smoothed NCD contour
    Polygon initial;
    Polygon smoothed;
};

/// Smooths the lesion boundary one pass at a time until its compactness
/// comes within stop_epsilon of the NCD contour's; the index is the final
/// perimeter over the initial one.
IrregularityResult irregularity(const GrayImage& gray, const BinaryMask& mask, const IrregularityParams& params = {});
double irregularity_index(const GrayImage& gray, const BinaryMask& mask, const IrregularityParams& params = {});

// ---------------------------------------------------------------------------
// Color texture
// ---------------------------------------------------------------------------

struct Offset {
    int dx = 1;
    int dy = 0;
};

struct Glcm {
    int ng = 0;
    Offset offset;
    std::vector<double> p;  ///< ng x ng row-major, symmetric, sums to 1

    double at(int i, int j) const {
        return p[static_cast<std::size_t>(i) * static_cast<std::size_t>(ng) + static_cast<std::size_t>(j)];
    }
};

/// Masked pixels are quantized to ng uniform bins over the lesion's min-max
/// range; co-occurrences count pairs with both ends in the mask, in both
/// directions. Throws std::invalid_argument for ng < 2, a zero offset or
/// fewer than two pairs.
Glcm glcm(const GrayImage& gray, const BinaryMask& mask, int ng, Offset offset);

struct Haralick {
    double correlation = 0.0;
    double homogeneity = 0.0;
    double energy = 0.0;
    double contrast = 0.0;
    bool correlation_defined = true;  ///< false when a marginal has zero variance
};
Haralick haralick(const Glcm& g);

// ---------------------------------------------------------------------------
// Diameter
// ---------------------------------------------------------------------------

struct Diameter {
    double pixels = 0.0;
    std::optional<double> mm;
};

/// Largest pairwise point distance, taken over convex hull vertices.
/// Throws std::invalid_argument for fewer than two points.
Diameter diameter(const Contour& contour, std::optional<double> mm_per_px = std::nullopt);
std::vector<Point> convex_hull(std::vector<Point> points);

// ---------------------------------------------------------------------------
// Feature vector
// ---------------------------------------------------------------------------

struct FeatureVector {
    double asymmetry_index = 0.0;
    double asymmetry = 0.0;
    double compactness = 0.0;
    double radial_variance = 0.0;
    double irregularity_index = 0.0;
    double correlation = 0.0;
    double homogeneity = 0.0;
    double energy = 0.0;
    double contrast = 0.0;
    double diameter = 0.0;  ///< pixels
    std::optional<double> diameter_mm;

    static constexpr std::size_t kSize = 10;
    std::array<double, kSize> values() const;
    static const std::array<const char*, kSize>& column_names();
};

struct FeatureConfig {
    int ng = 32;
    std::vector<Offset> offsets{{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    IrregularityParams irregularity;
    std::optional<double> mm_per_px;
};

/// All ten features of a single-component lesion. Everything is computed on
/// the bounding-box crop, so integer translations give identical values.
FeatureVector extract_features(const RgbImage& img, const BinaryMask& mask, const FeatureConfig& config = {});

}  // namespace dermabcd

#pragma once

// Lesion segmentation engines: the threshold-initialized level set, GrowCut
// cellular automaton and mean shift clustering. Every engine returns a
// single-component mask of the (dark) lesion.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dermabcd/image.hpp"

namespace dermabcd {

class SegmentationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Threshold initialization
// ---------------------------------------------------------------------------

struct ThresholdChoice {
    double value = 0.0;
    bool otsu_fallback = false;
};

/// Valley between the two dominant modes of the 256-bin luminance histogram.
/// Falls back to Otsu when the separating valley is shallower than 5% of
/// the main peak. Throws std::invalid_argument for constant images.
ThresholdChoice choose_threshold(const GrayImage& img);
double minimax_threshold(const GrayImage& img);
double otsu_threshold(const GrayImage& img);

/// Pixels darker than the minimax threshold, largest component, holes
/// filled. Throws SegmentationError when nothing survives.
BinaryMask threshold_init(const GrayImage& img);

// ---------------------------------------------------------------------------
// Level set
// ---------------------------------------------------------------------------

/// g = 1 / (1 + |grad(G_sigma * I)|^2) with central differences.
GrayImage edge_indicator(const GrayImage& img, double sigma);

struct LevelSetParams {
    double sigma = 1.5;            ///< edge-map smoothing scale
    double nu = 1.5;               ///< balloon force; positive moves the front inward
    double mu = 0.04;              ///< distance-regularization weight
    double tau = 5.0;              ///< time step
    double epsilon = 1.5;          ///< Dirac width
    double c = 3.0;                ///< clip level of the initial signed-distance field
    double lambda = 5.0;           ///< weight of the edge-attraction term
    double intensity_scale = 255.0;///< gray values are multiplied by this before the edge map
    int max_iters = 300;
    double convergence_tol = 1e-4; ///< relative area change per iteration
    int convergence_window = 5;    ///< consecutive quiet iterations required

    void validate() const;
};

struct LevelSetState {
    int width = 0;
    int height = 0;
    std::vector<double> phi;  ///< row-major; phi >= 0 is lesion
    int iteration = 0;

    double at(int x, int y) const {
        return phi[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
};

/// phi_0 = -epsilon (0.5 - B): +epsilon/2 on the mask, -epsilon/2 elsewhere.
LevelSetState init_phi(const BinaryMask& mask, const LevelSetParams& params);

/// Regularized Dirac delta of width epsilon.
double dirac(double x, double epsilon);
/// 1 for x >= 0, else 0.
int heaviside(double x);

struct LengthArea {
    double length = 0.0;
    double area = 0.0;
};
/// Riemann sums of delta_eps(phi) and H(phi) over the grid.
LengthArea length_area(const LevelSetState& state, double epsilon);

/// Explicit distance-regularized evolution with edge-weighted curvature,
/// edge attraction and balloon terms. Exposed step-wise for inspection.
class LevelSetEvolver {
public:
    /// `image` is gray in [0, 1]. The field starts as the signed distance to
    /// the boundary of `init` (positive inside), clipped to +-c.
    LevelSetEvolver(const GrayImage& image, const BinaryMask& init, const LevelSetParams& params);
    /// Starts from an explicit edge map (g) instead of an image.
    LevelSetEvolver(GrayImage edge_map, const BinaryMask& init, const LevelSetParams& params,
                    std::nullptr_t);

    void step();
    const LevelSetState& state() const { return state_; }
    const GrayImage& edge_map() const { return g_; }
    /// Number of pixels with phi >= 0.
    std::size_t area() const;
    BinaryMask zero_superlevel() const;

private:
    void init_field(const BinaryMask& init);

    LevelSetParams params_;
    GrayImage g_;
    std::vector<double> gx_, gy_;
    LevelSetState state_;
    std::vector<double> nx_, ny_, scratch_;
};

struct LevelSetResult {
    BinaryMask mask;
    int iterations = 0;
    bool converged = false;
    std::vector<double> area_history;
};

/// Evolves until the relative area change stays below the tolerance for the
/// convergence window or max_iters is hit. Returns {phi >= 0}, largest
/// component, holes filled. Throws SegmentationError if the region vanishes
/// or floods the image. With max_iters = 0 the init is returned unchanged.
LevelSetResult evolve_level_set(const GrayImage& img, const BinaryMask& init, const LevelSetParams& params);

// ---------------------------------------------------------------------------
// GrowCut
// ---------------------------------------------------------------------------

enum class SeedLabel : std::uint8_t { Unlabeled = 0, Object = 1, Background = 2 };

struct SeedMap {
    int width = 0;
    int height = 0;
    std::vector<SeedLabel> labels;

    SeedMap() = default;
    SeedMap(int w, int h) : width(w), height(h), labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), SeedLabel::Unlabeled) {}

    SeedLabel at(int x, int y) const {
        return labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)];
    }
    void set(int x, int y, SeedLabel l) {
        labels[static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x)] = l;
    }
    std::size_t count(SeedLabel l) const;
    /// Seeds have strength 1, unlabeled pixels 0.
    double strength(int x, int y) const { return at(x, y) == SeedLabel::Unlabeled ? 0.0 : 1.0; }
};

/// Object seeds: init eroded by a disk (radius 5, reduced when the object
/// is thin); background seeds: a 3-pixel frame plus the complement eroded
/// by 5. Falls back to the centroid pixel when erosion empties the object.
SeedMap auto_seeds(const BinaryMask& init);

/// Decodes a PGM seed image: 0 = background, 255 = object, 128 = unlabeled.
SeedMap seeds_from_gray(const GrayImage& gray);

class GrowCutAutomaton {
public:
    GrowCutAutomaton(const RgbImage& img, const SeedMap& seeds);

    /// One synchronous sweep over the von Neumann neighbourhood. Returns the
    /// number of label changes.
    std::size_t sweep();

    const std::vector<SeedLabel>& labels() const { return labels_; }
    const std::vector<double>& strengths() const { return strength_; }
    BinaryMask object_mask() const;

    /// Attack coefficient g(x) = 1 - x / max_color_norm.
    static double attack(double color_distance);

private:
    const RgbImage& img_;
    std::vector<SeedLabel> labels_, next_labels_;
    std::vector<double> strength_, next_strength_;
};

struct GrowCutResult {
    BinaryMask mask;
    int sweeps = 0;
    bool converged = false;
};

/// Runs sweeps until no label changes or `max_sweeps`; returns the largest
/// object component. Throws std::invalid_argument without object seeds.
GrowCutResult growcut(const RgbImage& img, const SeedMap& seeds, int max_sweeps = 500);

// ---------------------------------------------------------------------------
// Mean shift
// ---------------------------------------------------------------------------

struct MeanShiftParams {
    double hs = 8.0;       ///< spatial bandwidth (pixels)
    double hr = 0.08;      ///< range bandwidth (RGB in [0, 1])
    int min_region = 100;  ///< smaller regions are absorbed by a neighbour
    int max_iters = 20;
    double tol = 0.1;      ///< shift magnitude in bandwidth-normalized units
    /// Clusters smaller than this fraction of the image are not lesion candidates.
    double min_lesion_fraction = 0.01;

    void validate() const;
};

/// Gaussian-profile mean shift m(x) - x in a space whose coordinates are
/// each scaled by the matching bandwidth entry.
std::vector<double> mean_shift_vector(const std::vector<double>& x,
                                      const std::vector<std::vector<double>>& data,
                                      const std::vector<double>& bandwidths);

/// Iterates x <- x + m(x) until |m| (bandwidth-normalized) < tol.
std::vector<double> mean_shift_mode(std::vector<double> x, const std::vector<std::vector<double>>& data,
                                    const std::vector<double>& bandwidths, int max_iters, double tol);

/// Discontinuity-preserving filtering: every pixel takes the range part of
/// its joint spatial-range mode. Returns the three filtered channels.
std::vector<GrayImage> mean_shift_filter(const RgbImage& img, const MeanShiftParams& params);

struct MeanShiftClusters {
    int width = 0;
    int height = 0;
    std::vector<int> labels;  ///< cluster id per pixel
    std::vector<std::array<double, 3>> colors;  ///< mean filtered color per cluster
    std::vector<std::size_t> sizes;
};

/// Groups the filtered image into clusters: adjacent pixels and regions
/// whose colors are within hr are merged, regions below min_region are
/// absorbed into their closest-colored neighbour.
MeanShiftClusters mean_shift_cluster(const std::vector<GrayImage>& filtered, const MeanShiftParams& params);

struct MeanShiftResult {
    BinaryMask mask;
    int cluster_count = 0;
};

/// Lesion = cluster with the lowest mean luminance among those covering at
/// least min_lesion_fraction of the image, largest component. Throws
/// SegmentationError when fewer than two clusters remain.
MeanShiftResult mean_shift_segment(const RgbImage& img, const MeanShiftParams& params = {});

// ---------------------------------------------------------------------------
// Unsupervised pipeline
// ---------------------------------------------------------------------------

struct UnsupervisedStages {
    RgbImage rescaled;
    GrayImage gray;
    BinaryMask init;
    BinaryMask evolved;  ///< at working resolution
};

struct UnsupervisedResult {
    BinaryMask mask;  ///< at input resolution
    LevelSetResult level_set;
    std::optional<UnsupervisedStages> stages;
};

/// Rescale (longest side = working_size) -> gray -> threshold init -> level
/// set -> nearest-neighbour back to the input size.
UnsupervisedResult segment_unsupervised(const RgbImage& img, const LevelSetParams& params = {},
                                        int working_size = 512, bool keep_stages = false);

/// Size that maps the longest side to `longest`, preserving aspect ratio.
std::pair<int, int> working_dimensions(int width, int height, int longest);

}  // namespace dermabcd

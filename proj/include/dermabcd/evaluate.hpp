#pragma once

// Evaluation: border error against a manual mask, classifier rates, and the
// synthetic lesion phantoms used in place of a clinical image database.

#include <cstdint>
#include <vector>

#include "dermabcd/image.hpp"

namespace dermabcd {

/// |auto XOR manual| / |manual| * 100. Throws std::invalid_argument on size
/// mismatch or an empty manual mask.
double border_error(const BinaryMask& automatic, const BinaryMask& manual);

struct ClassMetrics {
    double sn = 0.0;   ///< TP / (TP + FN)
    double sp = 0.0;   ///< TN / (TN + FP)
    double tcr = 0.0;  ///< (TP + TN) / total
};

/// Labels are 1 for malignant, 0 for benign. Throws std::invalid_argument on
/// length mismatch or when the truth holds a single class.
ClassMetrics class_metrics(const std::vector<int>& predictions, const std::vector<int>& truth);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  ///< population standard deviation
};
MeanStd mean_std(const std::vector<double>& values);

enum class PhantomShape { Disk, Ellipse, Blob };

struct Harmonic {
    int k = 2;
    double amplitude = 0.0;
};

struct PhantomSpec {
    int size = 512;
    PhantomShape shape = PhantomShape::Disk;
    double radius = 110.0;         ///< disk radius, ellipse semi-major axis, blob base radius
    double axis_ratio = 0.6;       ///< ellipse minor / major
    double orientation = 0.0;      ///< ellipse rotation (radians)
    std::vector<Harmonic> harmonics;  ///< blob: r(t) = r0 (1 + sum a_k cos(k t + phase_k))
    double center_x = -1.0;        ///< negative = image centre
    double center_y = -1.0;
    Rgb lesion_color{90, 60, 45};
    Rgb skin_color{220, 170, 150};
    /// Fractional darkening of the lesion from rim (0) to centre (this value).
    double center_darkening = 0.0;
    /// Gaussian blur scale of the lesion/skin transition in pixels (0 = hard).
    double edge_softness = 0.0;
    double noise_sigma = 0.0;      ///< per-channel Gaussian noise, [0, 1] units
    int hair_count = 0;
    double hair_width = 3.0;
    Rgb hair_color{35, 25, 20};
    std::uint64_t rng_seed = 1;

    /// Throws std::invalid_argument when the lesion is not darker than the
    /// skin or does not fit the frame with a 10% margin.
    void validate() const;
    /// Largest lesion radius over all directions.
    double max_radius() const;
};

struct Phantom {
    RgbImage image;
    BinaryMask truth;      ///< noiseless, hairless lesion shape
    BinaryMask hair_mask;  ///< pixels touched by a synthetic hair
};

/// Deterministic per seed. Shape, noise and hairs draw from separate random
/// streams, so the truth mask does not depend on noise or hair settings.
Phantom generate_phantom(const PhantomSpec& spec);

/// Harmonic phases drawn from the shape stream (one per harmonic).
std::vector<double> phantom_phases(const PhantomSpec& spec);
/// Lesion boundary radius in direction t (radians) about the centre.
double phantom_radius(const PhantomSpec& spec, double t, const std::vector<double>& phases);

/// Twenty harmonic-blob specs at 512 px with noise 0.05 and five hairs each.
std::vector<PhantomSpec> standard_suite();

}  // namespace dermabcd

#pragma once

// Raster types and pixel-level primitives shared by every stage of the
// pipeline: grayscale conversion, Gaussian filtering, binary morphology,
// connected components and boundary tracing.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace dermabcd {

struct Point {
    int x = 0;
    int y = 0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major single-channel image with real values clamped to [0, 1].
class GrayImage {
public:
    GrayImage() = default;
    GrayImage(int width, int height, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    double at(int x, int y) const { return pixels_[index(x, y)]; }
    double& at(int x, int y) { return pixels_[index(x, y)]; }
    /// Edge-replicated access for coordinates outside the raster.
    double clamped(int x, int y) const;

    std::span<const double> pixels() const { return pixels_; }
    std::span<double> pixels() { return pixels_; }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> pixels_;
};

/// Row-major 8-bit RGB image.
class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {0, 0, 0});

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return pixels_.size(); }
    bool empty() const { return pixels_.empty(); }

    const Rgb& at(int x, int y) const { return pixels_[index(x, y)]; }
    Rgb& at(int x, int y) { return pixels_[index(x, y)]; }

    std::span<const Rgb> pixels() const { return pixels_; }
    std::span<Rgb> pixels() { return pixels_; }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

    /// Extracts one channel as a gray raster scaled to [0, 1].
    GrayImage channel(int c) const;
    /// Replaces one channel from a [0, 1] gray raster (rounded, clamped).
    void set_channel(int c, const GrayImage& values);

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Per-pixel lesion/background decision; true marks the object.
class BinaryMask {
public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t size() const { return bits_.size(); }

    bool at(int x, int y) const { return bits_[index(x, y)] != 0; }
    void set(int x, int y, bool v) { bits_[index(x, y)] = v ? 1 : 0; }
    /// Out-of-range coordinates read as background.
    bool get_or_false(int x, int y) const { return contains(x, y) && at(x, y); }

    bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
    bool same_shape(const BinaryMask& o) const { return width_ == o.width_ && height_ == o.height_; }

    std::span<const std::uint8_t> bits() const { return bits_; }
    std::span<std::uint8_t> bits() { return bits_; }

    std::size_t count() const;
    bool any() const { return count() > 0; }

    BinaryMask operator~() const;
    BinaryMask operator&(const BinaryMask& o) const;
    BinaryMask operator|(const BinaryMask& o) const;
    BinaryMask operator^(const BinaryMask& o) const;

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(x);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> bits_;
};

/// Closed boundary chain of 8-adjacent pixels. The last point connects back
/// to the first; points are stored without the closing duplicate. Traced
/// contours have positive shoelace area in pixel coordinates (x right,
/// y down), i.e. counterclockwise in that frame.
struct Contour {
    std::vector<Point> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Closed real-valued polygon, used for smoothed and synthesized contours.
struct Polygon {
    std::vector<Vec2> points;

    std::size_t size() const { return points.size(); }
    static Polygon from(const Contour& c);
};

enum class SeShape { Disk, Square };

struct StructuringElement {
    SeShape shape = SeShape::Disk;
    int radius = 1;

    static StructuringElement disk(int r) { return {SeShape::Disk, r}; }
    static StructuringElement square(int r) { return {SeShape::Square, r}; }
};

// ---------------------------------------------------------------------------
// Conversion and filtering
// ---------------------------------------------------------------------------

/// ITU-R 601 luma: (0.299 R + 0.587 G + 0.114 B) / 255.
GrayImage to_grayscale(const RgbImage& img);

/// Normalized Gaussian kernel truncated at ceil(3 sigma).
std::vector<double> gaussian_kernel(double sigma);

/// Separable Gaussian convolution with edge replication. Throws on sigma <= 0.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

/// Bilinear resampling to the given size.
GrayImage resize_bilinear(const GrayImage& img, int width, int height);
RgbImage resize_bilinear(const RgbImage& img, int width, int height);
/// Nearest-neighbour resampling (pixel centres mapped proportionally).
BinaryMask resize_nearest(const BinaryMask& mask, int width, int height);

// ---------------------------------------------------------------------------
// Morphology. Pixels outside the raster are ignored by both erosion and
// dilation, so borders neither erode nor grow the object.
// ---------------------------------------------------------------------------

BinaryMask dilate(const BinaryMask& mask, const StructuringElement& se);
BinaryMask erode(const BinaryMask& mask, const StructuringElement& se);
BinaryMask open(const BinaryMask& mask, const StructuringElement& se);
BinaryMask close(const BinaryMask& mask, const StructuringElement& se);

/// Sets every background pixel not 4-connected to the raster border.
BinaryMask fill_holes(const BinaryMask& mask);

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

/// 8-connected components, largest first (ties by raster order of the first
/// pixel).
std::vector<BinaryMask> connected_components(const BinaryMask& mask);

/// Per-pixel 8-connected label image (0 = background, labels from 1) and the
/// number of labels.
struct LabelImage {
    int width = 0;
    int height = 0;
    std::vector<int> labels;
    int count = 0;
};
LabelImage label_components(const BinaryMask& mask);

/// Largest 8-connected component, or an empty mask if there is none.
BinaryMask largest_component(const BinaryMask& mask);

/// Moore-neighbour boundary trace of a single 8-connected component.
/// Throws std::invalid_argument for empty or multi-component masks.
Contour trace_contour(const BinaryMask& mask);

/// Marks the contour pixels and everything they enclose.
BinaryMask fill_contour(const Contour& contour, int width, int height);

std::size_t area(const BinaryMask& mask);
Vec2 centroid(const BinaryMask& mask);
/// Sum of closed-chain step lengths (1 axial, sqrt(2) diagonal).
double perimeter(const Contour& contour);
double perimeter(const Polygon& poly);
/// Signed shoelace area.
double signed_area(const Polygon& poly);

/// Tight bounding box of the true pixels: {min_x, min_y, max_x, max_y}.
struct BoundingBox {
    int min_x = 0;
    int min_y = 0;
    int max_x = -1;
    int max_y = -1;
    int width() const { return max_x - min_x + 1; }
    int height() const { return max_y - min_y + 1; }
};
BoundingBox bounding_box(const BinaryMask& mask);

/// Copies the sub-rectangle [x0, x0 + w) x [y0, y0 + h); pixels outside the
/// source read as background.
BinaryMask crop(const BinaryMask& mask, int x0, int y0, int w, int h);
GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h);

}  // namespace dermabcd

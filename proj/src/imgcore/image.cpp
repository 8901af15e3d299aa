#include "dermabcd/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dermabcd {

GrayImage::GrayImage(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw std::invalid_argument("GrayImage: negative dimensions");
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

double GrayImage::clamped(int x, int y) const {
    x = std::clamp(x, 0, width_ - 1);
    y = std::clamp(y, 0, height_ - 1);
    return at(x, y);
}

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw std::invalid_argument("RgbImage: negative dimensions");
    }
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

GrayImage RgbImage::channel(int c) const {
    if (c < 0 || c > 2) {
        throw std::invalid_argument("RgbImage::channel: index out of range");
    }
    GrayImage out(width_, height_);
    auto dst = out.pixels();
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
        dst[i] = pixels_[i][static_cast<std::size_t>(c)] / 255.0;
    }
    return out;
}

void RgbImage::set_channel(int c, const GrayImage& values) {
    if (c < 0 || c > 2) {
        throw std::invalid_argument("RgbImage::set_channel: index out of range");
    }
    if (values.width() != width_ || values.height() != height_) {
        throw std::invalid_argument("RgbImage::set_channel: size mismatch");
    }
    auto src = values.pixels();
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
        const double v = std::round(std::clamp(src[i], 0.0, 1.0) * 255.0);
        pixels_[i][static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(v);
    }
}

BinaryMask::BinaryMask(int width, int height, bool fill) : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw std::invalid_argument("BinaryMask: negative dimensions");
    }
    bits_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                 fill ? 1 : 0);
}

std::size_t BinaryMask::count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask BinaryMask::operator~() const {
    BinaryMask out(width_, height_);
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        out.bits_[i] = bits_[i] ? 0 : 1;
    }
    return out;
}

namespace {

template <typename Op>
BinaryMask combine(const BinaryMask& a, const BinaryMask& b, Op op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument("BinaryMask: size mismatch");
    }
    BinaryMask out(a.width(), a.height());
    auto da = a.bits();
    auto db = b.bits();
    auto dst = out.bits();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        dst[i] = op(da[i] != 0, db[i] != 0) ? 1 : 0;
    }
    return out;
}

}  // namespace

BinaryMask BinaryMask::operator&(const BinaryMask& o) const {
    return combine(*this, o, [](bool p, bool q) { return p && q; });
}

BinaryMask BinaryMask::operator|(const BinaryMask& o) const {
    return combine(*this, o, [](bool p, bool q) { return p || q; });
}

BinaryMask BinaryMask::operator^(const BinaryMask& o) const {
    return combine(*this, o, [](bool p, bool q) { return p != q; });
}

Polygon Polygon::from(const Contour& c) {
    Polygon p;
    p.points.reserve(c.size());
    for (const auto& pt : c.points) {
        p.points.push_back({static_cast<double>(pt.x), static_cast<double>(pt.y)});
    }
    return p;
}

GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.width(), img.height());
    auto src = img.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const double y = 0.299 * src[i][0] + 0.587 * src[i][1] + 0.114 * src[i][2];
        dst[i] = std::clamp(y / 255.0, 0.0, 1.0);
    }
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
    if (width <= 0 || height <= 0 || img.empty()) {
        throw std::invalid_argument("resize_bilinear: empty target or source");
    }
    if (width == img.width() && height == img.height()) {
        return img;
    }
    GrayImage out(width, height);
    const double sx = static_cast<double>(img.width()) / width;
    const double sy = static_cast<double>(img.height()) / height;
    for (int y = 0; y < height; ++y) {
        const double fy = std::max(0.0, (y + 0.5) * sy - 0.5);
        const int y0 = std::min(static_cast<int>(fy), img.height() - 1);
        const int y1 = std::min(y0 + 1, img.height() - 1);
        const double ty = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::max(0.0, (x + 0.5) * sx - 0.5);
            const int x0 = std::min(static_cast<int>(fx), img.width() - 1);
            const int x1 = std::min(x0 + 1, img.width() - 1);
            const double tx = fx - x0;
            const double top = img.at(x0, y0) * (1 - tx) + img.at(x1, y0) * tx;
            const double bottom = img.at(x0, y1) * (1 - tx) + img.at(x1, y1) * tx;
            out.at(x, y) = top * (1 - ty) + bottom * ty;
        }
    }
    return out;
}

RgbImage resize_bilinear(const RgbImage& img, int width, int height) {
    if (width == img.width() && height == img.height()) {
        return img;
    }
    RgbImage out(width, height);
    for (int c = 0; c < 3; ++c) {
        out.set_channel(c, resize_bilinear(img.channel(c), width, height));
    }
    return out;
}

BinaryMask resize_nearest(const BinaryMask& mask, int width, int height) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("resize_nearest: empty target");
    }
    if (width == mask.width() && height == mask.height()) {
        return mask;
    }
    BinaryMask out(width, height);
    for (int y = 0; y < height; ++y) {
        const int sy = std::min(mask.height() - 1,
                                static_cast<int>((y + 0.5) * mask.height() / height));
        for (int x = 0; x < width; ++x) {
            const int sx = std::min(mask.width() - 1,
                                    static_cast<int>((x + 0.5) * mask.width() / width));
            out.set(x, y, mask.at(sx, sy));
        }
    }
    return out;
}

std::size_t area(const BinaryMask& mask) { return mask.count(); }

Vec2 centroid(const BinaryMask& mask) {
    long long sx = 0;
    long long sy = 0;
    long long n = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                sx += x;
                sy += y;
                ++n;
            }
        }
    }
    if (n == 0) {
        throw std::invalid_argument("centroid: empty mask");
    }
    return {static_cast<double>(sx) / static_cast<double>(n),
            static_cast<double>(sy) / static_cast<double>(n)};
}

BoundingBox bounding_box(const BinaryMask& mask) {
    BoundingBox b{mask.width(), mask.height(), -1, -1};
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                b.min_x = std::min(b.min_x, x);
                b.min_y = std::min(b.min_y, y);
                b.max_x = std::max(b.max_x, x);
                b.max_y = std::max(b.max_y, y);
            }
        }
    }
    if (b.max_x < 0) {
        return {};
    }
    return b;
}

BinaryMask crop(const BinaryMask& mask, int x0, int y0, int w, int h) {
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.set(x, y, mask.get_or_false(x0 + x, y0 + y));
        }
    }
    return out;
}

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h) {
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            out.at(x, y) = img.contains(x0 + x, y0 + y) ? img.at(x0 + x, y0 + y) : 0.0;
        }
    }
    return out;
}

}  // namespace dermabcd

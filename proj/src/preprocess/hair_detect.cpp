#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dermabcd/preprocess.hpp"

namespace dermabcd {

void HairDetectorParams::validate() const {
    if (sigmas.empty()) {
        throw std::invalid_argument("HairDetectorParams: sigmas must not be empty");
    }
    for (double s : sigmas) {
        if (!(s > 0.0)) {
            throw std::invalid_argument("HairDetectorParams: sigmas must be positive");
        }
    }
    if (orientations < 4) {
        throw std::invalid_argument("HairDetectorParams: need at least 4 orientations");
    }
    if (!(response_threshold > 0.0 && response_threshold < 1.0)) {
        throw std::invalid_argument("HairDetectorParams: response_threshold must be in (0,1)");
    }
    if (min_response < 0.0 || min_elongation < 1.0 || min_length < 0.0 || max_half_width < 1) {
        throw std::invalid_argument("HairDetectorParams: invalid refinement limits");
    }
}

void InpaintParams::validate() const {
    if (radius < 1) {
        throw std::invalid_argument("InpaintParams: radius must be >= 1");
    }
}

namespace {

struct DerivativeKernels {
    std::vector<double> g0, g1, g2;
    int radius = 0;
};

// Sampled Gaussian and its first two derivatives, support +-ceil(4 sigma).
DerivativeKernels derivative_kernels(double sigma) {
    DerivativeKernels k;
    k.radius = static_cast<int>(std::ceil(4.0 * sigma));
    const double s2 = sigma * sigma;
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * sigma);
    for (int i = -k.radius; i <= k.radius; ++i) {
        const double g = norm * std::exp(-0.5 * i * i / s2);
        k.g0.push_back(g);
        k.g1.push_back(-i / s2 * g);
        k.g2.push_back((i * i - s2) / (s2 * s2) * g);
    }
    double sum = 0.0;
    for (double v : k.g0) {
        sum += v;
    }
    for (auto& v : k.g0) {
        v /= sum;
    }
    return k;
}

GrayImage separable(const GrayImage& img, const std::vector<double>& kx, const std::vector<double>& ky) {
    const int rx = static_cast<int>(kx.size() / 2);
    const int ry = static_cast<int>(ky.size() / 2);
    const int w = img.width();
    const int h = img.height();
    GrayImage tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            // Correlation with the flipped kernel, i.e. true convolution.
            for (int i = -rx; i <= rx; ++i) {
                acc += kx[static_cast<std::size_t>(rx - i)] * img.clamped(x + i, y);
            }
            tmp.at(x, y) = acc;
        }
    }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -ry; i <= ry; ++i) {
                acc += ky[static_cast<std::size_t>(ry - i)] * tmp.clamped(x, y + i);
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

}  // namespace

GrayImage ridge_response(const GrayImage& img, const HairDetectorParams& params) {
    params.validate();
    GrayImage best(img.width(), img.height(), 0.0);
    std::vector<double> cos_t;
    std::vector<double> sin_t;
    for (int k = 0; k < params.orientations; ++k) {
        const double theta = std::numbers::pi * k / params.orientations;
        cos_t.push_back(std::cos(theta));
        sin_t.push_back(std::sin(theta));
    }
    for (double sigma : params.sigmas) {
        const auto k = derivative_kernels(sigma);
        const auto ix = separable(img, k.g1, k.g0);
        const auto iy = separable(img, k.g0, k.g1);
        const auto ixx = separable(img, k.g2, k.g0);
        const auto iyy = separable(img, k.g0, k.g2);
        const auto ixy = separable(img, k.g1, k.g1);
        const double s2 = sigma * sigma;
        auto out = best.pixels();
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double gx = ix.pixels()[i];
            const double gy = iy.pixels()[i];
            const double hxx = ixx.pixels()[i];
            const double hyy = iyy.pixels()[i];
            const double hxy = ixy.pixels()[i];
            for (std::size_t o = 0; o < cos_t.size(); ++o) {
                const double c = cos_t[o];
                const double s = sin_t[o];
                // Across-ridge curvature, along-ridge curvature, across slope.
                const double dnn = hxx * c * c + 2.0 * hxy * c * s + hyy * s * s;
                const double dtt = hxx * s * s - 2.0 * hxy * c * s + hyy * c * c;
                const double dn = gx * c + gy * s;
                const double r = s2 * (dnn - std::abs(dtt)) - sigma * std::abs(dn);
                if (r > out[i]) {
                    out[i] = r;
                }
            }
        }
    }
    return best;
}

BinaryMask detect_hairs(const GrayImage& img, const HairDetectorParams& params) {
    const auto resp = ridge_response(img, params);
    double peak = 0.0;
    for (double v : resp.pixels()) {
        peak = std::max(peak, v);
    }
    BinaryMask out(img.width(), img.height());
    if (peak <= 0.0) {
        return out;
    }
    const double cut = std::max(params.response_threshold * peak, params.min_response);
    auto src = resp.pixels();
    auto dst = out.bits();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] > 0.0 && src[i] >= cut ? 1 : 0;
    }
    return out;
}

namespace {

struct Moments {
    double major = 0.0;  // eigenvalues of the central second-moment matrix
    double minor = 0.0;
};

Moments second_moments(const BinaryMask& m) {
    double n = 0.0;
    double sx = 0.0;
    double sy = 0.0;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                n += 1.0;
                sx += x;
                sy += y;
            }
        }
    }
    if (n == 0.0) {
        return {};
    }
    const double cx = sx / n;
    const double cy = sy / n;
    double mxx = 0.0;
    double myy = 0.0;
    double mxy = 0.0;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                mxx += (x - cx) * (x - cx);
                myy += (y - cy) * (y - cy);
                mxy += (x - cx) * (y - cy);
            }
        }
    }
    mxx /= n;
    myy /= n;
    mxy /= n;
    const double tr = mxx + myy;
    const double disc = std::sqrt(std::max(0.0, 0.25 * (mxx - myy) * (mxx - myy) + mxy * mxy));
    return {0.5 * tr + disc, std::max(0.0, 0.5 * tr - disc)};
}

}  // namespace

double elongation(const BinaryMask& component) {
    const auto m = second_moments(component);
    if (m.major <= 0.0) {
        return 1.0;
    }
    if (m.minor <= 1e-12) {
        return std::numeric_limits<double>::infinity();
    }
    return std::sqrt(m.major / m.minor);
}

namespace {

// True when a disk erosion of the given radius leaves at most a tenth of the
// component; hair crossings are the only thick parts of a hair network.
bool is_thin(const BinaryMask& comp, int radius) {
    const auto box = bounding_box(comp);
    const int pad = radius + 1;
    const auto local = crop(comp, box.min_x - pad, box.min_y - pad, box.width() + 2 * pad, box.height() + 2 * pad);
    return 10 * erode(local, StructuringElement::disk(radius)).count() <= local.count();
}

}  // namespace

BinaryMask refine_hair_mask(const BinaryMask& mask, const HairDetectorParams& params) {
    params.validate();
    BinaryMask kept(mask.width(), mask.height());
    if (!mask.any()) {
        return kept;
    }
    // The radius-1 lattice disk is a cross, which cannot bridge a gap in a line.
    const auto closed = close(mask, StructuringElement::square(1));
    for (const auto& comp : connected_components(closed)) {
        const auto m = second_moments(comp);
        // Major-axis length of the equivalent uniform bar: sqrt(12 * lambda).
        const double length = std::sqrt(12.0 * m.major);
        if (length < params.min_length) {
            continue;
        }
        // Crossing hairs form networks whose second moments look isotropic;
        // those still count when the component is thin everywhere.
        if (elongation(comp) < params.min_elongation && !is_thin(comp, params.max_half_width)) {
            continue;
        }
        kept = kept | comp;
    }
    if (!kept.any()) {
        return kept;
    }
    return dilate(kept, StructuringElement::disk(1));
}

HairRemovalResult remove_hair(const RgbImage& img, const HairDetectorParams& detector,
                              const InpaintParams& inpaint) {
    const auto gray = to_grayscale(img);
    auto hair = refine_hair_mask(detect_hairs(gray, detector), detector);
    if (!hair.any()) {
        return {img, std::move(hair)};
    }
    auto repaired = inpaint_fmm(img, hair, inpaint);
    return {std::move(repaired), std::move(hair)};
}

}  // namespace dermabcd

#include <algorithm>
#include <array>
#include <cmath>

#include "dermabcd/segment.hpp"

namespace dermabcd {

namespace {

constexpr int kBins = 256;
using Histogram = std::array<double, kBins>;

Histogram histogram(const GrayImage& img) {
    Histogram h{};
    for (double v : img.pixels()) {
        const long b = std::lround(std::clamp(v, 0.0, 1.0) * 255.0);
        h[static_cast<std::size_t>(b)] += 1.0;
    }
    return h;
}

void require_nonconstant(const GrayImage& img) {
    if (img.empty()) {
        throw std::invalid_argument("threshold: empty image");
    }
    const auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
    if (*lo == *hi) {
        throw std::invalid_argument("threshold: constant image");
    }
}

Histogram smooth(const Histogram& h, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    Histogram out{};
    for (int i = 0; i < kBins; ++i) {
        double acc = 0.0;
        double wsum = 0.0;
        for (int j = -r; j <= r; ++j) {
            const int b = i + j;
            if (b < 0 || b >= kBins) {
                continue;
            }
            acc += k[static_cast<std::size_t>(j + r)] * h[static_cast<std::size_t>(b)];
            wsum += k[static_cast<std::size_t>(j + r)];
        }
        out[static_cast<std::size_t>(i)] = acc / wsum;
    }
    return out;
}

// Bin of the lowest histogram value between a and b (inclusive); the middle
// of a flat minimum.
int valley_between(const Histogram& h, int a, int b) {
    const int lo = std::min(a, b);
    const int hi = std::max(a, b);
    double best = h[static_cast<std::size_t>(lo)];
    for (int i = lo; i <= hi; ++i) {
        best = std::min(best, h[static_cast<std::size_t>(i)]);
    }
    int first = -1;
    int last = -1;
    for (int i = lo; i <= hi; ++i) {
        if (h[static_cast<std::size_t>(i)] == best) {
            if (first < 0) {
                first = i;
            }
            last = i;
        } else if (first >= 0) {
            break;
        }
    }
    return (first + last) / 2;
}

}  // namespace

double otsu_threshold(const GrayImage& img) {
    require_nonconstant(img);
    const auto h = histogram(img);
    double total = 0.0;
    double sum = 0.0;
    for (int i = 0; i < kBins; ++i) {
        total += h[static_cast<std::size_t>(i)];
        sum += i * h[static_cast<std::size_t>(i)];
    }
    double w0 = 0.0;
    double sum0 = 0.0;
    double best = -1.0;
    int best_k = 0;
    for (int k = 0; k < kBins - 1; ++k) {
        w0 += h[static_cast<std::size_t>(k)];
        sum0 += k * h[static_cast<std::size_t>(k)];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) {
            continue;
        }
        const double m0 = sum0 / w0;
        const double m1 = (sum - sum0) / w1;
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_k = k;
        }
    }
    return (best_k + 0.5) / 255.0;
}

ThresholdChoice choose_threshold(const GrayImage& img) {
    require_nonconstant(img);
    const auto h = smooth(histogram(img), 2.0);
    const int p1 = static_cast<int>(std::max_element(h.begin(), h.end()) - h.begin());
    // Second mode: the bin standing highest above the valley that separates
    // it from the main peak.
    int p2 = -1;
    double depth = 0.0;
    for (int j = 0; j < kBins; ++j) {
        if (j == p1) {
            continue;
        }
        const int v = valley_between(h, p1, j);
        const double d = h[static_cast<std::size_t>(j)] - h[static_cast<std::size_t>(v)];
        if (d > depth) {
            depth = d;
            p2 = j;
        }
    }
    if (p2 < 0 || depth < 0.05 * h[static_cast<std::size_t>(p1)]) {
        return {otsu_threshold(img), true};
    }
    return {valley_between(h, p1, p2) / 255.0, false};
}

double minimax_threshold(const GrayImage& img) { return choose_threshold(img).value; }

BinaryMask threshold_init(const GrayImage& img) {
    const double t = minimax_threshold(img);
    BinaryMask dark(img.width(), img.height());
    auto src = img.pixels();
    auto dst = dark.bits();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] < t ? 1 : 0;
    }
    auto mask = fill_holes(largest_component(dark));
    if (!mask.any()) {
        throw SegmentationError("threshold_init: no pixel below the threshold");
    }
    return mask;
}

}  // namespace dermabcd

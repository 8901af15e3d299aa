#include "dermabcd/image.hpp"

#include <cmath>

namespace dermabcd {

std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    }
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = v;
        sum += v;
    }
    for (auto& v : k) {
        v /= sum;
    }
    return k;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    const auto k = gaussian_kernel(sigma);
    const int r = static_cast<int>(k.size() / 2);
    const int w = img.width();
    const int h = img.height();

    GrayImage tmp(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                acc += k[static_cast<std::size_t>(i + r)] * img.clamped(x + i, y);
            }
            tmp.at(x, y) = acc;
        }
    }
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i) {
                acc += k[static_cast<std::size_t>(i + r)] * tmp.clamped(x, y + i);
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

}  // namespace dermabcd

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "dermabcd/image.hpp"

namespace dermabcd::testing {

inline constexpr double kPi = 3.14159265358979323846;

inline BinaryMask mask_from(int w, int h, const std::function<bool(double, double)>& inside) {
    BinaryMask m(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            m.set(x, y, inside(x, y));
        }
    }
    return m;
}

inline BinaryMask disk(int w, int h, double cx, double cy, double r) {
    return mask_from(w, h, [=](double x, double y) { return (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r * r; });
}

inline BinaryMask rect(int w, int h, int x0, int y0, int rw, int rh) {
    return mask_from(w, h, [=](double x, double y) { return x >= x0 && x < x0 + rw && y >= y0 && y < y0 + rh; });
}

inline BinaryMask ellipse(int w, int h, double cx, double cy, double a, double b, double theta = 0.0) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return mask_from(w, h, [=](double x, double y) {
        const double u = (x - cx) * c + (y - cy) * s;
        const double v = -(x - cx) * s + (y - cy) * c;
        return (u * u) / (a * a) + (v * v) / (b * b) <= 1.0;
    });
}

/// r(t) = r0 (1 + amp cos(k t + phase)).
inline BinaryMask harmonic_blob(int w, int h, double cx, double cy, double r0, int k, double amp, double phase = 0.3) {
    return mask_from(w, h, [=](double x, double y) {
        const double t = std::atan2(y - cy, x - cx);
        return std::hypot(x - cx, y - cy) <= r0 * (1.0 + amp * std::cos(k * t + phase));
    });
}

inline RgbImage paint(const BinaryMask& m, Rgb lesion, Rgb skin) {
    RgbImage img(m.width(), m.height(), skin);
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                img.at(x, y) = lesion;
            }
        }
    }
    return img;
}

inline GrayImage gray_from(const BinaryMask& m, double inside, double outside) {
    GrayImage g(m.width(), m.height(), outside);
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                g.at(x, y) = inside;
            }
        }
    }
    return g;
}

inline void add_noise(RgbImage& img, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, sigma * 255.0);
    for (auto& px : img.pixels()) {
        for (auto& c : px) {
            c = static_cast<std::uint8_t>(std::clamp(std::lround(c + n(rng)), 0L, 255L));
        }
    }
}

inline BinaryMask translate(const BinaryMask& m, int dx, int dy) {
    BinaryMask out(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y) && out.contains(x + dx, y + dy)) {
                out.set(x + dx, y + dy, true);
            }
        }
    }
    return out;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("dermabcd_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace dermabcd::testing

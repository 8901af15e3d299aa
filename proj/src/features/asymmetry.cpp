#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dermabcd/features.hpp"

namespace dermabcd {

namespace {

void require_pixels(const BinaryMask& mask, std::size_t n, const char* what) {
    if (area(mask) < n) {
        throw std::invalid_argument(std::string(what) + ": mask has too few pixels");
    }
}

// |A ∩ B| / |A ∪ B| where B(p) = A(map(p)).
template <typename Map>
double overlap_ratio(const BinaryMask& a, Map map) {
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            const Point q = map(x, y);
            const bool in_a = a.at(x, y);
            const bool in_b = a.get_or_false(q.x, q.y);
            inter += (in_a && in_b) ? 1 : 0;
            uni += (in_a || in_b) ? 1 : 0;
        }
    }
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace

double asymmetry_index(const BinaryMask& mask) {
    require_pixels(mask, 1, "asymmetry_index");
    std::int64_t n = 0;
    std::int64_t sx = 0;
    std::int64_t sy = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                ++n;
                sx += x;
                sy += y;
            }
        }
    }
    // round(2 S / n - p) in integers: floor((4 S - 2 n p + n) / (2 n)).
    auto rotate = [n](std::int64_t s, int p) {
        const std::int64_t num = 4 * s - 2 * n * p + n;
        const std::int64_t den = 2 * n;
        std::int64_t q = num / den;
        if ((num % den != 0) && ((num < 0) != (den < 0))) {
            --q;
        }
        return static_cast<int>(q);
    };
    return overlap_ratio(mask, [&](int x, int y) { return Point{rotate(sx, x), rotate(sy, y)}; });
}

PrincipalAxes principal_axes(const BinaryMask& mask) {
    require_pixels(mask, 2, "principal_axes");
    PrincipalAxes ax;
    ax.centroid = centroid(mask);
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                const double dx = x - ax.centroid.x;
                const double dy = y - ax.centroid.y;
                a += dx * dx;
                b += dx * dy;
                c += dy * dy;
                ++n;
            }
        }
    }
    a /= static_cast<double>(n);
    b /= static_cast<double>(n);
    c /= static_cast<double>(n);
    const double mean = 0.5 * (a + c);
    const double spread = std::hypot(0.5 * (a - c), b);
    ax.lambda_major = mean + spread;
    ax.lambda_minor = mean - spread;
    const double theta = 0.5 * std::atan2(2.0 * b, a - c);
    ax.major = {std::cos(theta), std::sin(theta)};
    ax.minor = {-std::sin(theta), std::cos(theta)};
    ax.degenerate = (ax.lambda_major - ax.lambda_minor) <= 1e-3 * ax.lambda_major;
    return ax;
}

double reflection_overlap(const BinaryMask& mask, Vec2 centre, Vec2 axis) {
    require_pixels(mask, 1, "reflection_overlap");
    const double len = std::hypot(axis.x, axis.y);
    if (!(len > 0.0)) {
        throw std::invalid_argument("reflection_overlap: zero axis");
    }
    const double ux = axis.x / len;
    const double uy = axis.y / len;
    return overlap_ratio(mask, [&](int x, int y) {
        const double vx = x - centre.x;
        const double vy = y - centre.y;
        const double d = vx * ux + vy * uy;
        const double rx = centre.x + 2.0 * d * ux - vx;
        const double ry = centre.y + 2.0 * d * uy - vy;
        return Point{static_cast<int>(std::floor(rx + 0.5)), static_cast<int>(std::floor(ry + 0.5))};
    });
}

double asymmetry(const BinaryMask& mask) {
    if (!mask.any()) {
        throw std::invalid_argument("asymmetry: empty mask");
    }
    if (area(mask) == 1) {
        return 1.0;
    }
    const auto ax = principal_axes(mask);
    const double s = 1.0 / std::sqrt(2.0);
    const Vec2 axes[4] = {
        ax.major,
        ax.minor,
        {s * (ax.major.x + ax.minor.x), s * (ax.major.y + ax.minor.y)},
        {s * (ax.major.x - ax.minor.x), s * (ax.major.y - ax.minor.y)},
    };
    double best = 0.0;
    for (const auto& u : axes) {
        best = std::max(best, reflection_overlap(mask, ax.centroid, u));
    }
    return best;
}

}  // namespace dermabcd

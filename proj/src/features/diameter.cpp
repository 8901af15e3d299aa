#include <algorithm>
#include <cmath>
#include <cstdint>

#include "dermabcd/features.hpp"

namespace dermabcd {

namespace {

std::int64_t cross(const Point& o, const Point& a, const Point& b) {
    return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) - static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::vector<Point> convex_hull(std::vector<Point> pts) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) {
        return pts;
    }
    // Andrew's monotone chain.
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) {
            --k;
        }
        hull[k++] = p;
    }
    const std::size_t lower = k + 1;
    for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
        while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0) {
            --k;
        }
        hull[k++] = *it;
    }
    hull.resize(k - 1);
    return hull;
}

Diameter diameter(const Contour& contour, std::optional<double> mm_per_px) {
    if (contour.size() < 2) {
        throw std::invalid_argument("diameter: need at least two points");
    }
    if (mm_per_px && !(*mm_per_px > 0.0)) {
        throw std::invalid_argument("diameter: mm_per_px must be positive");
    }
    const auto hull = convex_hull(contour.points);
    std::int64_t best = 0;
    for (std::size_t i = 0; i < hull.size(); ++i) {
        for (std::size_t j = i + 1; j < hull.size(); ++j) {
            const std::int64_t dx = hull[i].x - hull[j].x;
            const std::int64_t dy = hull[i].y - hull[j].y;
            best = std::max(best, dx * dx + dy * dy);
        }
    }
    Diameter d;
    d.pixels = std::sqrt(static_cast<double>(best));
    if (mm_per_px) {
        d.mm = d.pixels * *mm_per_px;
    }
    return d;
}

}  // namespace dermabcd

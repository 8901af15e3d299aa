#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include "dermabcd/features.hpp"
#include "dermabcd/log.hpp"

namespace dermabcd {

double compactness(double perimeter, double area) {
    if (!(area > 0.0) || perimeter < 0.0) {
        throw std::invalid_argument("compactness: area must be positive");
    }
    return perimeter * perimeter / (4.0 * std::numbers::pi * area);
}

double compactness(const BinaryMask& mask) {
    const auto contour = trace_contour(mask);
    return compactness(perimeter(contour), static_cast<double>(area(mask)));
}

double compactness(const Polygon& poly) {
    return compactness(perimeter(poly), std::abs(signed_area(poly)));
}

double fractal_dimension(const Contour& contour) {
    if (contour.size() < 16) {
        throw std::invalid_argument("fractal_dimension: contour needs at least 16 points");
    }
    int min_x = contour.points.front().x;
    int max_x = min_x;
    int min_y = contour.points.front().y;
    int max_y = min_y;
    for (const auto& p : contour.points) {
        min_x = std::min(min_x, p.x);
        max_x = std::max(max_x, p.x);
        min_y = std::min(min_y, p.y);
        max_y = std::max(max_y, p.y);
    }
    const int extent = std::max(max_x - min_x + 1, max_y - min_y + 1);
    std::vector<double> lr;
    std::vector<double> ln;
    for (int r = 2; 4 * r <= extent; r *= 2) {
        std::set<std::pair<int, int>> boxes;
        for (const auto& p : contour.points) {
            boxes.insert({(p.x - min_x) / r, (p.y - min_y) / r});
        }
        lr.push_back(std::log(static_cast<double>(r)));
        ln.push_back(std::log(static_cast<double>(boxes.size())));
    }
    if (lr.size() < 3) {
        throw std::invalid_argument("fractal_dimension: fewer than 3 box scales");
    }
    const double n = static_cast<double>(lr.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        mx += lr[i];
        my += ln[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < lr.size(); ++i) {
        sxy += (lr[i] - mx) * (ln[i] - my);
        sxx += (lr[i] - mx) * (lr[i] - mx);
    }
    return -sxy / sxx;
}

RadialProfile radial_profile(const BinaryMask& mask) {
    const auto contour = trace_contour(mask);
    RadialProfile rp;
    rp.centroid = centroid(mask);
    rp.distances.reserve(contour.size());
    for (const auto& p : contour.points) {
        rp.distances.push_back(std::hypot(p.x - rp.centroid.x, p.y - rp.centroid.y));
        rp.mean += rp.distances.back();
    }
    rp.mean /= static_cast<double>(rp.distances.size());
    return rp;
}

namespace {

RadialProfile checked_profile(const BinaryMask& mask, const char* what) {
    auto rp = radial_profile(mask);
    if (!(rp.mean > 0.0)) {
        throw std::invalid_argument(std::string(what) + ": degenerate lesion (zero mean radius)");
    }
    return rp;
}

}  // namespace

double radial_variance(const BinaryMask& mask) {
    const auto rp = checked_profile(mask, "radial_variance");
    double var = 0.0;
    for (double d : rp.distances) {
        var += (d - rp.mean) * (d - rp.mean);
    }
    var /= static_cast<double>(rp.distances.size());
    return var / (rp.mean * rp.mean);
}

double radial_circle_ratio(const BinaryMask& mask) {
    const auto rp = checked_profile(mask, "radial_circle_ratio");
    return std::numbers::pi * rp.mean * rp.mean / static_cast<double>(area(mask));
}

Polygon smooth_contour(const Polygon& contour, double sigma) {
    if (contour.size() < 3) {
        throw std::invalid_argument("smooth_contour: a closed contour needs at least 3 points");
    }
    const auto k = gaussian_kernel(sigma);
    const auto n = static_cast<std::ptrdiff_t>(contour.size());
    const auto radius = static_cast<std::ptrdiff_t>(k.size() / 2);
    Polygon out;
    out.points.resize(contour.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double x = 0.0;
        double y = 0.0;
        for (std::ptrdiff_t j = -radius; j <= radius; ++j) {
            const auto idx = static_cast<std::size_t>(((i + j) % n + n) % n);
            const double w = k[static_cast<std::size_t>(j + radius)];
            x += w * contour.points[idx].x;
            y += w * contour.points[idx].y;
        }
        out.points[static_cast<std::size_t>(i)] = {x, y};
    }
    return out;
}

Polygon smooth_contour(const Contour& contour, double sigma) { return smooth_contour(Polygon::from(contour), sigma); }

namespace {

// Inclusive Bresenham line.
template <typename Visit>
void bresenham(Point a, Point b, Visit visit) {
    const int dx = std::abs(b.x - a.x);
    const int dy = -std::abs(b.y - a.y);
    const int sx = a.x < b.x ? 1 : -1;
    const int sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    for (;;) {
        visit(a);
        if (a == b) {
            return;
        }
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            a.x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            a.y += sy;
        }
    }
}

}  // namespace

NcdProfile ncd_profile(const GrayImage& gray, const BinaryMask& mask) {
    if (gray.width() != mask.width() || gray.height() != mask.height()) {
        throw std::invalid_argument("ncd_profile: image and mask sizes differ");
    }
    const auto rp = checked_profile(mask, "ncd_profile");
    const auto contour = trace_contour(mask);
    NcdProfile out;
    out.centroid = rp.centroid;
    const Point g{static_cast<int>(std::lround(rp.centroid.x)), static_cast<int>(std::lround(rp.centroid.y))};
    out.path_means.reserve(contour.size());
    for (const auto& p : contour.points) {
        double sum = 0.0;
        int count = 0;
        bresenham(g, p, [&](Point q) {
            sum += 1.0 - gray.at(q.x, q.y);
            ++count;
        });
        out.path_means.push_back(sum / count);
        out.lesion_mean += out.path_means.back();
    }
    out.lesion_mean /= static_cast<double>(out.path_means.size());
    if (!(out.lesion_mean > 0.0)) {
        throw std::invalid_argument("ncd_profile: inverted lesion is black (A_L = 0)");
    }
    out.ncd.reserve(out.path_means.size());
    out.contour.points.reserve(out.path_means.size());
    for (std::size_t i = 0; i < contour.size(); ++i) {
        out.ncd.push_back(out.path_means[i] * 100.0 / out.lesion_mean);
        const double dx = contour.points[i].x - rp.centroid.x;
        const double dy = contour.points[i].y - rp.centroid.y;
        const double len = std::hypot(dx, dy);
        const double r = rp.mean * out.ncd.back() / 100.0;
        const double ux = len > 0.0 ? dx / len : 0.0;
        const double uy = len > 0.0 ? dy / len : 0.0;
        out.contour.points.push_back({rp.centroid.x + r * ux, rp.centroid.y + r * uy});
    }
    return out;
}

Polygon ncd_contour(const GrayImage& gray, const BinaryMask& mask) { return ncd_profile(gray, mask).contour; }

IrregularityResult irregularity(const GrayImage& gray, const BinaryMask& mask, const IrregularityParams& params) {
    if (!(params.sigma_fraction > 0.0) || !(params.stop_epsilon > 0.0) || params.max_iters < 0 ||
        params.presmooth_sigma < 0.0) {
        throw std::invalid_argument("irregularity: invalid parameters");
    }
    const auto ncd = ncd_profile(gray, mask);
    const auto contour = trace_contour(mask);
    if (contour.size() < 3) {
        throw std::invalid_argument("irregularity: lesion boundary too short");
    }
    IrregularityResult res;
    res.target_compactness = compactness(params.presmooth_sigma > 0.0 ? smooth_contour(ncd.contour, params.presmooth_sigma)
                                                                      : ncd.contour);
    res.initial = params.presmooth_sigma > 0.0 ? smooth_contour(contour, params.presmooth_sigma) : Polygon::from(contour);
    const double sigma = std::max(0.5, params.sigma_fraction * static_cast<double>(contour.size()));
    res.smoothed = res.initial;
    while (compactness(res.smoothed) - res.target_compactness >= params.stop_epsilon) {
        if (res.iterations >= params.max_iters) {
            res.converged = false;
            log_warn("irregularity: compactness target not reached after " + std::to_string(res.iterations) +
                      " smoothing passes");
            break;
        }
        res.smoothed = smooth_contour(res.smoothed, sigma);
        ++res.iterations;
    }
    res.index = std::min(1.0, perimeter(res.smoothed) / perimeter(res.initial));
    return res;
}

double irregularity_index(const GrayImage& gray, const BinaryMask& mask, const IrregularityParams& params) {
    return irregularity(gray, mask, params).index;
}

}  // namespace dermabcd

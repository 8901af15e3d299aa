#include <algorithm>
#include <cmath>
#include <limits>

#include "dermabcd/features.hpp"

namespace dermabcd {

Glcm glcm(const GrayImage& gray, const BinaryMask& mask, int ng, Offset offset) {
    if (ng < 2) {
        throw std::invalid_argument("glcm: ng must be at least 2");
    }
    if (offset.dx == 0 && offset.dy == 0) {
        throw std::invalid_argument("glcm: offset must be nonzero");
    }
    if (gray.width() != mask.width() || gray.height() != mask.height()) {
        throw std::invalid_argument("glcm: image and mask sizes differ");
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (mask.at(x, y)) {
                lo = std::min(lo, gray.at(x, y));
                hi = std::max(hi, gray.at(x, y));
            }
        }
    }
    const double span = hi - lo;
    auto level = [&](int x, int y) {
        if (!(span > 0.0)) {
            return 0;
        }
        return std::min(ng - 1, static_cast<int>(std::floor((gray.at(x, y) - lo) / span * ng)));
    };

    Glcm g;
    g.ng = ng;
    g.offset = offset;
    g.p.assign(static_cast<std::size_t>(ng) * static_cast<std::size_t>(ng), 0.0);
    std::size_t pairs = 0;
    for (int y = 0; y < mask.height(); ++y) {
        for (int x = 0; x < mask.width(); ++x) {
            if (!mask.at(x, y) || !mask.get_or_false(x + offset.dx, y + offset.dy)) {
                continue;
            }
            const auto i = static_cast<std::size_t>(level(x, y));
            const auto j = static_cast<std::size_t>(level(x + offset.dx, y + offset.dy));
            const auto n = static_cast<std::size_t>(ng);
            g.p[i * n + j] += 1.0;
            g.p[j * n + i] += 1.0;
            ++pairs;
        }
    }
    if (pairs < 2) {
        throw std::invalid_argument("glcm: fewer than 2 pixel pairs inside the mask");
    }
    const double total = 2.0 * static_cast<double>(pairs);
    for (auto& v : g.p) {
        v /= total;
    }
    return g;
}

Haralick haralick(const Glcm& g) {
    if (g.ng < 2 || g.p.size() != static_cast<std::size_t>(g.ng) * static_cast<std::size_t>(g.ng)) {
        throw std::invalid_argument("haralick: malformed GLCM");
    }
    Haralick h;
    double mi = 0.0;
    double mj = 0.0;
    for (int i = 0; i < g.ng; ++i) {
        for (int j = 0; j < g.ng; ++j) {
            const double p = g.at(i, j);
            mi += i * p;
            mj += j * p;
            h.homogeneity += p / (1.0 + std::abs(i - j));
            h.energy += p * p;
            h.contrast += static_cast<double>((i - j) * (i - j)) * p;
        }
    }
    double vi = 0.0;
    double vj = 0.0;
    double cov = 0.0;
    for (int i = 0; i < g.ng; ++i) {
        for (int j = 0; j < g.ng; ++j) {
            const double p = g.at(i, j);
            vi += (i - mi) * (i - mi) * p;
            vj += (j - mj) * (j - mj) * p;
            cov += (i - mi) * (j - mj) * p;
        }
    }
    const double denom = std::sqrt(vi) * std::sqrt(vj);
    if (denom > 1e-12) {
        h.correlation = std::clamp(cov / denom, -1.0, 1.0);
    } else {
        h.correlation = 0.0;
        h.correlation_defined = false;
    }
    return h;
}

}  // namespace dermabcd

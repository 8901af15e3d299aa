#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "dermabcd/segment.hpp"

namespace dermabcd {

void MeanShiftParams::validate() const {
    if (!(hs > 0.0) || !(hr > 0.0)) {
        throw std::invalid_argument("MeanShiftParams: hs and hr must be positive");
    }
    if (min_region < 1 || max_iters < 1 || !(tol > 0.0) || min_lesion_fraction < 0.0 || min_lesion_fraction >= 1.0) {
        throw std::invalid_argument("MeanShiftParams: min_region, max_iters, tol invalid");
    }
}

std::vector<double> mean_shift_vector(const std::vector<double>& x, const std::vector<std::vector<double>>& data,
                                      const std::vector<double>& bandwidths) {
    if (data.empty()) {
        throw std::invalid_argument("mean_shift_vector: empty data");
    }
    const std::size_t dim = x.size();
    if (bandwidths.size() != dim) {
        throw std::invalid_argument("mean_shift_vector: bandwidth dimension mismatch");
    }
    std::vector<double> d2(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].size() != dim) {
            throw std::invalid_argument("mean_shift_vector: point dimension mismatch");
        }
        double s = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            const double u = (data[i][k] - x[k]) / bandwidths[k];
            s += u * u;
        }
        d2[i] = s;
    }
    // Weights are relative to the nearest point so distant data cannot
    // underflow to an all-zero kernel.
    const double base = *std::min_element(d2.begin(), d2.end());
    std::vector<double> num(dim, 0.0);
    double den = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        const double wgt = std::exp(-0.5 * (d2[i] - base));
        den += wgt;
        for (std::size_t k = 0; k < dim; ++k) {
            num[k] += wgt * data[i][k];
        }
    }
    std::vector<double> m(dim);
    for (std::size_t k = 0; k < dim; ++k) {
        m[k] = num[k] / den - x[k];
    }
    return m;
}

std::vector<double> mean_shift_mode(std::vector<double> x, const std::vector<std::vector<double>>& data,
                                    const std::vector<double>& bandwidths, int max_iters, double tol) {
    for (int it = 0; it < max_iters; ++it) {
        const auto m = mean_shift_vector(x, data, bandwidths);
        double norm2 = 0.0;
        for (std::size_t k = 0; k < x.size(); ++k) {
            x[k] += m[k];
            norm2 += (m[k] / bandwidths[k]) * (m[k] / bandwidths[k]);
        }
        if (std::sqrt(norm2) < tol) {
            break;
        }
    }
    return x;
}

namespace {

// exp(-d2 / 2) tabulated on [0, kMaxD2]; beyond that the kernel is treated
// as zero.
class KernelTable {
public:
    static constexpr double kMaxD2 = 16.0;
    static constexpr int kSteps = 256;

    KernelTable() : table_(static_cast<std::size_t>(kMaxD2 * kSteps) + 2) {
        for (std::size_t i = 0; i < table_.size(); ++i) {
            table_[i] = std::exp(-0.5 * static_cast<double>(i) / kSteps);
        }
    }
    double operator()(double d2) const {
        return table_[static_cast<std::size_t>(d2 * kSteps + 0.5)];
    }

private:
    std::vector<double> table_;
};

}  // namespace

std::vector<GrayImage> mean_shift_filter(const RgbImage& img, const MeanShiftParams& params) {
    params.validate();
    static const KernelTable kernel;
    const int w = img.width();
    const int h = img.height();
    const std::size_t n = img.size();
    std::vector<std::array<double, 3>> color(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            color[i][c] = img.pixels()[i][c] / 255.0;
        }
    }
    const double hs2 = params.hs * params.hs;
    const double hr2 = params.hr * params.hr;
    const int reach = static_cast<int>(std::ceil(params.hs));
    std::vector<GrayImage> out(3, GrayImage(w, h));
    for (int y0 = 0; y0 < h; ++y0) {
        for (int x0 = 0; x0 < w; ++x0) {
            double sx = x0;
            double sy = y0;
            auto mode = color[static_cast<std::size_t>(y0 * w + x0)];
            for (int it = 0; it < params.max_iters; ++it) {
                const int cx = static_cast<int>(std::lround(sx));
                const int cy = static_cast<int>(std::lround(sy));
                double den = 0.0;
                double ax = 0.0;
                double ay = 0.0;
                std::array<double, 3> ac{0.0, 0.0, 0.0};
                for (int qy = std::max(cy - reach, 0); qy <= std::min(cy + reach, h - 1); ++qy) {
                    const double dy2 = (qy - sy) * (qy - sy);
                    for (int qx = std::max(cx - reach, 0); qx <= std::min(cx + reach, w - 1); ++qx) {
                        const double ds = ((qx - sx) * (qx - sx) + dy2) / hs2;
                        if (ds > 1.0) {
                            continue;
                        }
                        const auto& cq = color[static_cast<std::size_t>(qy * w + qx)];
                        const double r0 = cq[0] - mode[0];
                        const double r1 = cq[1] - mode[1];
                        const double r2 = cq[2] - mode[2];
                        const double d2 = ds + (r0 * r0 + r1 * r1 + r2 * r2) / hr2;
                        if (d2 > KernelTable::kMaxD2) {
                            continue;
                        }
                        const double wgt = kernel(d2);
                        den += wgt;
                        ax += wgt * qx;
                        ay += wgt * qy;
                        ac[0] += wgt * cq[0];
                        ac[1] += wgt * cq[1];
                        ac[2] += wgt * cq[2];
                    }
                }
                if (den <= 0.0) {
                    break;
                }
                const double nx = ax / den;
                const double ny = ay / den;
                double shift2 = ((nx - sx) * (nx - sx) + (ny - sy) * (ny - sy)) / hs2;
                for (std::size_t c = 0; c < 3; ++c) {
                    const double v = ac[c] / den;
                    shift2 += (v - mode[c]) * (v - mode[c]) / hr2;
                    mode[c] = v;
                }
                sx = nx;
                sy = ny;
                if (shift2 < params.tol * params.tol) {
                    break;
                }
            }
            for (std::size_t c = 0; c < 3; ++c) {
                out[c].at(x0, y0) = mode[c];
            }
        }
    }
    return out;
}

namespace {

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t a) {
        while (parent_[a] != a) {
            parent_[a] = parent_[parent_[a]];
            a = parent_[a];
        }
        return a;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) {
            return false;
        }
        // The smaller root wins so labels stay independent of merge order.
        if (b < a) {
            std::swap(a, b);
        }
        parent_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

struct RegionStats {
    std::vector<int> labels;
    std::vector<std::array<double, 3>> colors;
    std::vector<std::size_t> sizes;
    std::vector<std::vector<int>> neighbours;
};

double color_dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        s += (a[c] - b[c]) * (a[c] - b[c]);
    }
    return s;
}

RegionStats collect(DisjointSets& sets, const std::vector<std::array<double, 3>>& px, int w, int h) {
    RegionStats r;
    const std::size_t n = px.size();
    r.labels.assign(n, -1);
    std::vector<int> root_label(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t root = sets.find(i);
        if (root_label[root] < 0) {
            root_label[root] = static_cast<int>(r.sizes.size());
            r.sizes.push_back(0);
            r.colors.push_back({0.0, 0.0, 0.0});
        }
        const int l = root_label[root];
        r.labels[i] = l;
        r.sizes[static_cast<std::size_t>(l)] += 1;
        for (std::size_t c = 0; c < 3; ++c) {
            r.colors[static_cast<std::size_t>(l)][c] += px[i][c];
        }
    }
    for (std::size_t l = 0; l < r.sizes.size(); ++l) {
        for (std::size_t c = 0; c < 3; ++c) {
            r.colors[l][c] /= static_cast<double>(r.sizes[l]);
        }
    }
    r.neighbours.assign(r.sizes.size(), {});
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int a = r.labels[static_cast<std::size_t>(y * w + x)];
            if (x + 1 < w) {
                const int b = r.labels[static_cast<std::size_t>(y * w + x + 1)];
                if (a != b) {
                    r.neighbours[static_cast<std::size_t>(a)].push_back(b);
                    r.neighbours[static_cast<std::size_t>(b)].push_back(a);
                }
            }
            if (y + 1 < h) {
                const int b = r.labels[static_cast<std::size_t>((y + 1) * w + x)];
                if (a != b) {
                    r.neighbours[static_cast<std::size_t>(a)].push_back(b);
                    r.neighbours[static_cast<std::size_t>(b)].push_back(a);
                }
            }
        }
    }
    for (auto& nb : r.neighbours) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return r;
}

}  // namespace

MeanShiftClusters mean_shift_cluster(const std::vector<GrayImage>& filtered, const MeanShiftParams& params) {
    params.validate();
    if (filtered.size() != 3) {
        throw std::invalid_argument("mean_shift_cluster: expected three channels");
    }
    const int w = filtered[0].width();
    const int h = filtered[0].height();
    const std::size_t n = filtered[0].size();
    std::vector<std::array<double, 3>> px(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            px[i][c] = filtered[c].pixels()[i];
        }
    }
    const double link2 = 0.25 * params.hr * params.hr;
    DisjointSets sets(n);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y * w + x);
            if (x + 1 < w && color_dist2(px[i], px[i + 1]) < link2) {
                sets.unite(i, i + 1);
            }
            if (y + 1 < h && color_dist2(px[i], px[i + static_cast<std::size_t>(w)]) < link2) {
                sets.unite(i, i + static_cast<std::size_t>(w));
            }
        }
    }
    // Adjacent regions whose mean colors are close are fused until stable.
    RegionStats stats = collect(sets, px, w, h);
    for (bool merged = true; merged;) {
        merged = false;
        std::vector<std::size_t> rep(stats.sizes.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            rep[static_cast<std::size_t>(stats.labels[i])] = sets.find(i);
        }
        for (std::size_t a = 0; a < stats.sizes.size(); ++a) {
            for (int b : stats.neighbours[a]) {
                if (color_dist2(stats.colors[a], stats.colors[static_cast<std::size_t>(b)]) < link2) {
                    merged |= sets.unite(rep[a], rep[static_cast<std::size_t>(b)]);
                }
            }
        }
        if (merged) {
            stats = collect(sets, px, w, h);
        }
    }
    // Small regions join their closest-colored neighbour.
    while (stats.sizes.size() > 1) {
        std::vector<std::size_t> rep(stats.sizes.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            rep[static_cast<std::size_t>(stats.labels[i])] = sets.find(i);
        }
        bool merged = false;
        for (std::size_t a = 0; a < stats.sizes.size(); ++a) {
            if (stats.sizes[a] >= static_cast<std::size_t>(params.min_region) || stats.neighbours[a].empty()) {
                continue;
            }
            int best = -1;
            double best_d = std::numeric_limits<double>::infinity();
            for (int b : stats.neighbours[a]) {
                const double d = color_dist2(stats.colors[a], stats.colors[static_cast<std::size_t>(b)]);
                if (d < best_d) {
                    best_d = d;
                    best = b;
                }
            }
            merged |= sets.unite(rep[a], rep[static_cast<std::size_t>(best)]);
        }
        if (!merged) {
            break;
        }
        stats = collect(sets, px, w, h);
    }
    MeanShiftClusters out;
    out.width = w;
    out.height = h;
    out.labels = std::move(stats.labels);
    out.colors = std::move(stats.colors);
    out.sizes = std::move(stats.sizes);
    return out;
}

MeanShiftResult mean_shift_segment(const RgbImage& img, const MeanShiftParams& params) {
    const auto clusters = mean_shift_cluster(mean_shift_filter(img, params), params);
    if (clusters.sizes.size() < 2) {
        throw SegmentationError("mean_shift_segment: image collapsed to a single cluster");
    }
    const auto floor = static_cast<std::size_t>(params.min_lesion_fraction * static_cast<double>(img.size()));
    std::size_t darkest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < clusters.colors.size(); ++l) {
        if (clusters.sizes[l] < floor) {
            continue;
        }
        const auto& c = clusters.colors[l];
        const double luma = 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2];
        if (luma < best) {
            best = luma;
            darkest = l;
        }
    }
    BinaryMask m(clusters.width, clusters.height);
    auto bits = m.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = clusters.labels[i] == static_cast<int>(darkest) ? 1 : 0;
    }
    return {largest_component(m), static_cast<int>(clusters.sizes.size())};
}

}  // namespace dermabcd

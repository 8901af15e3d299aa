#include <algorithm>
#include <cmath>
#include <limits>

#include "dermabcd/segment.hpp"

namespace dermabcd {

std::size_t SeedMap::count(SeedLabel l) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

namespace {

// Largest r >= 1 whose disk erosion leaves something, capped at `cap`; 0 if
// even r = 1 empties the mask.
int inscribed_radius(const BinaryMask& m, int cap) {
    int r = 0;
    while (r < cap && erode(m, StructuringElement::disk(r + 1)).any()) {
        ++r;
    }
    return r;
}

}  // namespace

SeedMap auto_seeds(const BinaryMask& init) {
    if (!init.any()) {
        throw std::invalid_argument("auto_seeds: empty init mask");
    }
    const int w = init.width();
    const int h = init.height();
    SeedMap seeds(w, h);

    const int r_in = inscribed_radius(init, 10);
    BinaryMask object(w, h);
    if (r_in == 0) {
        // Centroid fallback: the init pixel closest to the centroid.
        const Vec2 c = centroid(init);
        double best = std::numeric_limits<double>::infinity();
        Point pick;
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                const double d = (x - c.x) * (x - c.x) + (y - c.y) * (y - c.y);
                if (init.at(x, y) && d < best) {
                    best = d;
                    pick = {x, y};
                }
            }
        }
        object.set(pick.x, pick.y, true);
    } else {
        object = erode(init, StructuringElement::disk(std::clamp(r_in / 2, 1, 5)));
    }

    const BinaryMask outside = ~init;
    BinaryMask background = erode(outside, StructuringElement::disk(5));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool frame = x < 3 || y < 3 || x >= w - 3 || y >= h - 3;
            if (frame && outside.at(x, y)) {
                background.set(x, y, true);
            }
        }
    }
    if (!background.any()) {
        throw SegmentationError("auto_seeds: no room for background seeds");
    }
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (object.at(x, y)) {
                seeds.set(x, y, SeedLabel::Object);
            } else if (background.at(x, y)) {
                seeds.set(x, y, SeedLabel::Background);
            }
        }
    }
    return seeds;
}

SeedMap seeds_from_gray(const GrayImage& gray) {
    SeedMap seeds(gray.width(), gray.height());
    for (int y = 0; y < gray.height(); ++y) {
        for (int x = 0; x < gray.width(); ++x) {
            const double v = gray.at(x, y);
            if (v < 0.25) {
                seeds.set(x, y, SeedLabel::Background);
            } else if (v > 0.75) {
                seeds.set(x, y, SeedLabel::Object);
            }
        }
    }
    return seeds;
}

double GrowCutAutomaton::attack(double color_distance) {
    static const double max_norm = std::sqrt(3.0) * 255.0;
    return std::clamp(1.0 - color_distance / max_norm, 0.0, 1.0);
}

GrowCutAutomaton::GrowCutAutomaton(const RgbImage& img, const SeedMap& seeds)
    : img_(img), labels_(seeds.labels), strength_(seeds.labels.size(), 0.0) {
    if (seeds.width != img.width() || seeds.height != img.height()) {
        throw std::invalid_argument("growcut: seed map size does not match image");
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] != SeedLabel::Unlabeled) {
            strength_[i] = 1.0;
        }
    }
    next_labels_ = labels_;
    next_strength_ = strength_;
}

std::size_t GrowCutAutomaton::sweep() {
    const int w = img_.width();
    const int h = img_.height();
    constexpr int dx[4] = {1, -1, 0, 0};
    constexpr int dy[4] = {0, 0, 1, -1};
    std::size_t changes = 0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t p = static_cast<std::size_t>(y * w + x);
            SeedLabel label = labels_[p];
            double theta = strength_[p];
            const Rgb& cp = img_.at(x, y);
            for (int k = 0; k < 4; ++k) {
                const int qx = x + dx[k];
                const int qy = y + dy[k];
                if (qx < 0 || qy < 0 || qx >= w || qy >= h) {
                    continue;
                }
                const std::size_t q = static_cast<std::size_t>(qy * w + qx);
                if (strength_[q] <= theta) {
                    continue;
                }
                const Rgb& cq = img_.at(qx, qy);
                double d2 = 0.0;
                for (std::size_t c = 0; c < 3; ++c) {
                    const double d = static_cast<double>(cp[c]) - static_cast<double>(cq[c]);
                    d2 += d * d;
                }
                const double force = attack(std::sqrt(d2)) * strength_[q];
                if (force > theta) {
                    theta = force;
                    label = labels_[q];
                }
            }
            if (label != labels_[p] || theta != strength_[p]) {
                ++changes;
            }
            next_labels_[p] = label;
            next_strength_[p] = theta;
        }
    }
    labels_.swap(next_labels_);
    strength_.swap(next_strength_);
    return changes;
}

BinaryMask GrowCutAutomaton::object_mask() const {
    BinaryMask m(img_.width(), img_.height());
    auto bits = m.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = labels_[i] == SeedLabel::Object ? 1 : 0;
    }
    return m;
}

GrowCutResult growcut(const RgbImage& img, const SeedMap& seeds, int max_sweeps) {
    if (seeds.count(SeedLabel::Object) == 0) {
        throw std::invalid_argument("growcut: no object seeds");
    }
    if (max_sweeps < 1) {
        throw std::invalid_argument("growcut: max_sweeps must be >= 1");
    }
    GrowCutAutomaton ca(img, seeds);
    GrowCutResult result;
    for (int s = 1; s <= max_sweeps; ++s) {
        result.sweeps = s;
        if (ca.sweep() == 0) {
            result.converged = true;
            break;
        }
    }
    result.mask = largest_component(ca.object_mask());
    return result;
}

}  // namespace dermabcd

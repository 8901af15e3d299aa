// Fast-marching inpainting after Telea: pixels are filled in order of their
// arrival time from the mask boundary, each from a weighted first-order
// extrapolation of the already-known pixels in a disk around it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "dermabcd/preprocess.hpp"

namespace dermabcd {

namespace {

enum class Flag : std::uint8_t { Known, Band, Inside };

constexpr double kInf = std::numeric_limits<double>::infinity();

class FastMarchingInpainter {
public:
    FastMarchingInpainter(std::vector<GrayImage>& channels, const BinaryMask& mask, int radius)
        : ch_(channels), w_(mask.width()), h_(mask.height()), radius_(radius),
          flag_(mask.size(), Flag::Known), t_(mask.size(), 0.0) {
        for (std::size_t i = 0; i < flag_.size(); ++i) {
            if (mask.bits()[i]) {
                flag_[i] = Flag::Inside;
                t_[i] = kInf;
            }
        }
        // Known pixels touching the hole seed the narrow band at T = 0.
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                if (flag_[idx(x, y)] != Flag::Known) {
                    continue;
                }
                if (touches_inside(x, y)) {
                    flag_[idx(x, y)] = Flag::Band;
                    heap_.push({0.0, x, y});
                }
            }
        }
    }

    void run() {
        while (!heap_.empty()) {
            const auto top = heap_.top();
            heap_.pop();
            const std::size_t pi = idx(top.x, top.y);
            if (flag_[pi] == Flag::Known) {
                continue;
            }
            flag_[pi] = Flag::Known;
            constexpr int dx[4] = {1, -1, 0, 0};
            constexpr int dy[4] = {0, 0, 1, -1};
            for (int k = 0; k < 4; ++k) {
                const int nx = top.x + dx[k];
                const int ny = top.y + dy[k];
                if (nx < 0 || ny < 0 || nx >= w_ || ny >= h_) {
                    continue;
                }
                const std::size_t ni = idx(nx, ny);
                if (flag_[ni] != Flag::Inside) {
                    continue;
                }
                t_[ni] = arrival_time(nx, ny);
                fill(nx, ny);
                flag_[ni] = Flag::Band;
                heap_.push({t_[ni], nx, ny});
            }
        }
    }

private:
    struct Node {
        double t;
        int x;
        int y;
        bool operator>(const Node& o) const {
            if (t != o.t) {
                return t > o.t;
            }
            if (y != o.y) {
                return y > o.y;
            }
            return x > o.x;
        }
    };

    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x);
    }

    bool valued(int x, int y) const {
        return x >= 0 && y >= 0 && x < w_ && y < h_ && flag_[idx(x, y)] != Flag::Inside;
    }

    bool touches_inside(int x, int y) const {
        constexpr int dx[4] = {1, -1, 0, 0};
        constexpr int dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const int nx = x + dx[k];
            const int ny = y + dy[k];
            if (nx >= 0 && ny >= 0 && nx < w_ && ny < h_ && flag_[idx(nx, ny)] == Flag::Inside) {
                return true;
            }
        }
        return false;
    }

    double time_at(int x, int y) const { return valued(x, y) ? t_[idx(x, y)] : kInf; }

    // First-order upwind solution of |grad T| = 1.
    double arrival_time(int x, int y) const {
        const double a = std::min(time_at(x - 1, y), time_at(x + 1, y));
        const double b = std::min(time_at(x, y - 1), time_at(x, y + 1));
        if (std::isinf(a) && std::isinf(b)) {
            return kInf;
        }
        if (std::isinf(a) || std::isinf(b) || std::abs(a - b) >= 1.0) {
            return std::min(a, b) + 1.0;
        }
        return 0.5 * (a + b + std::sqrt(2.0 - (a - b) * (a - b)));
    }

    // Centered difference where both neighbours carry values, one-sided otherwise.
    template <typename Get>
    static double diff(bool lo_ok, bool hi_ok, Get get, double centre) {
        if (lo_ok && hi_ok) {
            return 0.5 * (get(1) - get(-1));
        }
        if (hi_ok) {
            return get(1) - centre;
        }
        if (lo_ok) {
            return centre - get(-1);
        }
        return 0.0;
    }

    void fill(int x, int y) {
        const double tp = t_[idx(x, y)];
        const double tgx = diff(valued(x - 1, y), valued(x + 1, y),
                                [&](int d) { return t_[idx(x + d, y)]; }, tp);
        const double tgy = diff(valued(x, y - 1), valued(x, y + 1),
                                [&](int d) { return t_[idx(x, y + d)]; }, tp);
        const std::size_t nch = ch_.size();
        std::vector<double> acc(nch, 0.0);
        std::vector<double> ref(nch, 0.0);
        bool have_ref = false;
        double wsum = 0.0;
        const int r = radius_;
        for (int dy = -r; dy <= r; ++dy) {
            for (int dx = -r; dx <= r; ++dx) {
                if (dx * dx + dy * dy > r * r || (dx == 0 && dy == 0)) {
                    continue;
                }
                const int qx = x + dx;
                const int qy = y + dy;
                if (!valued(qx, qy)) {
                    continue;
                }
                const double len2 = dx * dx + dy * dy;
                double dir = std::abs(dx * tgx + dy * tgy) / std::sqrt(len2);
                if (dir < 1e-6) {
                    dir = 1e-6;
                }
                const double dst = 1.0 / len2;
                const double lev = 1.0 / (1.0 + std::abs(t_[idx(qx, qy)] - tp));
                const double weight = dir * dst * lev;
                const bool xl = valued(qx - 1, qy);
                const bool xh = valued(qx + 1, qy);
                const bool yl = valued(qx, qy - 1);
                const bool yh = valued(qx, qy + 1);
                for (std::size_t c = 0; c < nch; ++c) {
                    const auto& img = ch_[c];
                    const double iq = img.at(qx, qy);
                    if (!have_ref) {
                        ref[c] = iq;
                    }
                    const double gx = diff(xl, xh, [&](int d) { return img.at(qx + d, qy); }, iq);
                    const double gy = diff(yl, yh, [&](int d) { return img.at(qx, qy + d); }, iq);
                    // Extrapolate I(q) back to p = q - (dx, dy).
                    acc[c] += weight * ((iq - ref[c]) - (gx * dx + gy * dy));
                }
                have_ref = true;
                wsum += weight;
            }
        }
        for (std::size_t c = 0; c < nch; ++c) {
            ch_[c].at(x, y) = wsum > 0.0 ? ref[c] + acc[c] / wsum : ref[c];
        }
    }

    std::vector<GrayImage>& ch_;
    int w_;
    int h_;
    int radius_;
    std::vector<Flag> flag_;
    std::vector<double> t_;
    std::priority_queue<Node, std::vector<Node>, std::greater<>> heap_;
};

void check_inputs(int w, int h, const BinaryMask& mask, const InpaintParams& params) {
    params.validate();
    if (mask.width() != w || mask.height() != h) {
        throw std::invalid_argument("inpaint_fmm: mask size does not match image");
    }
    if (mask.count() == mask.size()) {
        throw std::invalid_argument("inpaint_fmm: mask covers the whole image");
    }
}

}  // namespace

GrayImage inpaint_fmm(const GrayImage& img, const BinaryMask& mask, const InpaintParams& params) {
    check_inputs(img.width(), img.height(), mask, params);
    std::vector<GrayImage> ch{img};
    if (!mask.any()) {
        return img;
    }
    FastMarchingInpainter(ch, mask, params.radius).run();
    auto& out = ch.front();
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (mask.bits()[i]) {
            out.pixels()[i] = std::clamp(out.pixels()[i], 0.0, 1.0);
        }
    }
    return std::move(out);
}

RgbImage inpaint_fmm(const RgbImage& img, const BinaryMask& mask, const InpaintParams& params) {
    check_inputs(img.width(), img.height(), mask, params);
    if (!mask.any()) {
        return img;
    }
    // Channels share the marching order; each is filled independently.
    std::vector<GrayImage> ch{img.channel(0), img.channel(1), img.channel(2)};
    FastMarchingInpainter(ch, mask, params.radius).run();
    RgbImage out = img;
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!mask.at(x, y)) {
                continue;
            }
            for (int c = 0; c < 3; ++c) {
                const double v = std::clamp(ch[static_cast<std::size_t>(c)].at(x, y), 0.0, 1.0);
                out.at(x, y)[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    return out;
}

}  // namespace dermabcd

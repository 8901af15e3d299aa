#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "dermabcd/evaluate.hpp"

namespace dermabcd {

namespace {

constexpr std::uint64_t kShapeStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
constexpr std::uint64_t kHairStream = 3;

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id)};
    return std::mt19937_64(seq);
}

double luma(const Rgb& c) { return 0.299 * c[0] + 0.587 * c[1] + 0.114 * c[2]; }

double centre_x(const PhantomSpec& s) { return s.center_x < 0.0 ? (s.size - 1) / 2.0 : s.center_x; }
double centre_y(const PhantomSpec& s) { return s.center_y < 0.0 ? (s.size - 1) / 2.0 : s.center_y; }

}  // namespace

std::vector<double> phantom_phases(const PhantomSpec& spec) {
    auto rng = stream(spec.rng_seed, kShapeStream);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::vector<double> out;
    for (std::size_t i = 0; i < spec.harmonics.size(); ++i) {
        out.push_back(phase(rng));
    }
    return out;
}

double phantom_radius(const PhantomSpec& spec, double t, const std::vector<double>& phases) {
    switch (spec.shape) {
        case PhantomShape::Disk:
            return spec.radius;
        case PhantomShape::Ellipse: {
            const double a = spec.radius;
            const double b = spec.radius * spec.axis_ratio;
            const double u = t - spec.orientation;
            return a * b / std::hypot(b * std::cos(u), a * std::sin(u));
        }
        case PhantomShape::Blob: {
            double f = 1.0;
            for (std::size_t i = 0; i < spec.harmonics.size(); ++i) {
                const auto& hk = spec.harmonics[i];
                f += hk.amplitude * std::cos(hk.k * t + phases[i]);
            }
            return spec.radius * f;
        }
    }
    return spec.radius;
}

double PhantomSpec::max_radius() const {
    switch (shape) {
        case PhantomShape::Disk:
        case PhantomShape::Ellipse:
            return radius;
        case PhantomShape::Blob: {
            double f = 1.0;
            for (const auto& hk : harmonics) {
                f += std::abs(hk.amplitude);
            }
            return radius * f;
        }
    }
    return radius;
}

void PhantomSpec::validate() const {
    if (size < 16) {
        throw std::invalid_argument("PhantomSpec: size must be at least 16");
    }
    if (!(radius > 0.0) || !(axis_ratio > 0.0 && axis_ratio <= 1.0)) {
        throw std::invalid_argument("PhantomSpec: invalid radius or axis ratio");
    }
    double min_factor = 1.0;
    for (const auto& hk : harmonics) {
        if (hk.k < 1) {
            throw std::invalid_argument("PhantomSpec: harmonic order must be >= 1");
        }
        min_factor -= std::abs(hk.amplitude);
    }
    if (shape == PhantomShape::Blob && min_factor <= 0.0) {
        throw std::invalid_argument("PhantomSpec: harmonic amplitudes must sum below 1");
    }
    if (!(luma(lesion_color) * (1.0 - center_darkening) < luma(skin_color)) || !(luma(lesion_color) < luma(skin_color))) {
        throw std::invalid_argument("PhantomSpec: lesion must be darker than skin");
    }
    if (center_darkening < 0.0 || center_darkening >= 1.0 || edge_softness < 0.0 || noise_sigma < 0.0) {
        throw std::invalid_argument("PhantomSpec: darkening, softness or noise out of range");
    }
    if (hair_count < 0 || !(hair_width > 0.0)) {
        throw std::invalid_argument("PhantomSpec: invalid hair settings");
    }
    const double margin = 0.1 * size;
    const double r = max_radius();
    const double cx = centre_x(*this);
    const double cy = centre_y(*this);
    if (cx - r < margin || cy - r < margin || cx + r > size - 1 - margin || cy + r > size - 1 - margin) {
        throw std::invalid_argument("PhantomSpec: lesion does not fit the frame with a 10% margin");
    }
}

namespace {

struct Segment {
    Vec2 a;
    Vec2 b;
};

double distance_to_segment(double px, double py, const Segment& s) {
    const double vx = s.b.x - s.a.x;
    const double vy = s.b.y - s.a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0.0 ? ((px - s.a.x) * vx + (py - s.a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(px - (s.a.x + t * vx), py - (s.a.y + t * vy));
}

// A gently curving polyline through a random interior point.
std::vector<Segment> random_hair(std::mt19937_64& rng, int size) {
    std::uniform_real_distribution<double> pos(0.15 * size, 0.85 * size);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::uniform_real_distribution<double> length(0.5 * size, 0.9 * size);
    std::normal_distribution<double> bend(0.0, 0.08);
    const Vec2 mid{pos(rng), pos(rng)};
    const double theta = angle(rng);
    const double len = length(rng);
    constexpr int kPieces = 8;
    const double step = len / kPieces;
    std::vector<Vec2> pts;
    Vec2 p{mid.x - 0.5 * len * std::cos(theta), mid.y - 0.5 * len * std::sin(theta)};
    double dir = theta;
    pts.push_back(p);
    for (int i = 0; i < kPieces; ++i) {
        dir += bend(rng);
        p = {p.x + step * std::cos(dir), p.y + step * std::sin(dir)};
        pts.push_back(p);
    }
    std::vector<Segment> segs;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        segs.push_back({pts[i], pts[i + 1]});
    }
    return segs;
}

}  // namespace

Phantom generate_phantom(const PhantomSpec& spec) {
    spec.validate();
    const int n = spec.size;
    const auto phases = phantom_phases(spec);
    const double cx = centre_x(spec);
    const double cy = centre_y(spec);

    Phantom out;
    out.truth = BinaryMask(n, n);
    GrayImage shade(n, n);  // lesion darkening factor per pixel
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            const double rho = std::hypot(dx, dy);
            const double r = phantom_radius(spec, std::atan2(dy, dx), phases);
            out.truth.set(x, y, rho <= r);
            shade.at(x, y) = 1.0 - spec.center_darkening * std::max(0.0, 1.0 - rho / r);
        }
    }
    GrayImage cover(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            cover.at(x, y) = out.truth.at(x, y) ? 1.0 : 0.0;
        }
    }
    if (spec.edge_softness > 0.0) {
        cover = gaussian_blur(cover, spec.edge_softness);
    }

    std::vector<GrayImage> ch(3, GrayImage(n, n));
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            const double a = cover.at(x, y);
            for (std::size_t c = 0; c < 3; ++c) {
                const double lesion = spec.lesion_color[c] / 255.0 * shade.at(x, y);
                const double skin = spec.skin_color[c] / 255.0;
                ch[c].at(x, y) = a * lesion + (1.0 - a) * skin;
            }
        }
    }

    if (spec.noise_sigma > 0.0) {
        auto rng = stream(spec.rng_seed, kNoiseStream);
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (int y = 0; y < n; ++y) {
            for (int x = 0; x < n; ++x) {
                for (std::size_t c = 0; c < 3; ++c) {
                    ch[c].at(x, y) += noise(rng);
                }
            }
        }
    }

    out.hair_mask = BinaryMask(n, n);
    if (spec.hair_count > 0) {
        auto rng = stream(spec.rng_seed, kHairStream);
        const double half = 0.5 * spec.hair_width;
        for (int hcount = 0; hcount < spec.hair_count; ++hcount) {
            for (const auto& seg : random_hair(rng, n)) {
                const int x0 = std::max(0, static_cast<int>(std::floor(std::min(seg.a.x, seg.b.x) - half - 1)));
                const int x1 = std::min(n - 1, static_cast<int>(std::ceil(std::max(seg.a.x, seg.b.x) + half + 1)));
                const int y0 = std::max(0, static_cast<int>(std::floor(std::min(seg.a.y, seg.b.y) - half - 1)));
                const int y1 = std::min(n - 1, static_cast<int>(std::ceil(std::max(seg.a.y, seg.b.y) + half + 1)));
                for (int y = y0; y <= y1; ++y) {
                    for (int x = x0; x <= x1; ++x) {
                        const double cov = std::clamp(half + 0.5 - distance_to_segment(x, y, seg), 0.0, 1.0);
                        if (cov <= 0.0) {
                            continue;
                        }
                        out.hair_mask.set(x, y, true);
                        for (std::size_t c = 0; c < 3; ++c) {
                            auto& v = ch[c].at(x, y);
                            // Overlapping segments darken monotonically.
                            v = std::min(v, cov * spec.hair_color[c] / 255.0 + (1.0 - cov) * v);
                        }
                    }
                }
            }
        }
    }

    out.image = RgbImage(n, n);
    for (int y = 0; y < n; ++y) {
        for (int x = 0; x < n; ++x) {
            for (std::size_t c = 0; c < 3; ++c) {
                const double v = std::clamp(ch[c].at(x, y), 0.0, 1.0);
                out.image.at(x, y)[c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
            }
        }
    }
    return out;
}

std::vector<PhantomSpec> standard_suite() {
    std::vector<PhantomSpec> suite;
    auto rng = stream(20240501, 0);
    std::uniform_real_distribution<double> radius(80.0, 120.0);
    std::uniform_real_distribution<double> a2(0.0, 0.2);
    std::uniform_real_distribution<double> a3(0.0, 0.1);
    std::uniform_real_distribution<double> a5(0.0, 0.05);
    std::uniform_real_distribution<double> dark(0.0, 0.4);
    std::uniform_int_distribution<int> shift(-20, 20);
    std::uniform_int_distribution<int> tone(-15, 15);
    for (int i = 0; i < 20; ++i) {
        PhantomSpec s;
        s.size = 512;
        s.shape = PhantomShape::Blob;
        s.radius = radius(rng);
        s.harmonics = {{2, a2(rng)}, {3, a3(rng)}, {5, a5(rng)}};
        s.center_x = 255.5 + shift(rng);
        s.center_y = 255.5 + shift(rng);
        const int t1 = tone(rng);
        const int t2 = tone(rng);
        s.lesion_color = {static_cast<std::uint8_t>(100 + t1), static_cast<std::uint8_t>(65 + t1),
                          static_cast<std::uint8_t>(50 + t1)};
        s.skin_color = {static_cast<std::uint8_t>(215 + t2), static_cast<std::uint8_t>(165 + t2),
                        static_cast<std::uint8_t>(145 + t2)};
        s.center_darkening = dark(rng);
        s.edge_softness = 2.0;
        s.noise_sigma = 0.05;
        s.hair_count = 5;
        s.hair_width = 3.0;
        s.rng_seed = 1000 + static_cast<std::uint64_t>(i);
        suite.push_back(s);
    }
    return suite;
}

}  // namespace dermabcd

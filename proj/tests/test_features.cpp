#include <gtest/gtest.h>

#include <numeric>

#include "dermabcd/evaluate.hpp"
#include "dermabcd/features.hpp"
#include "support.hpp"

using namespace dermabcd;
using namespace dermabcd::testing;

namespace {

// Forward-maps every lesion pixel through p -> round(2c) - p and counts
// the overlap with the original set.
double rotate_overlap_oracle(const BinaryMask& m) {
    double sx = 0.0;
    double sy = 0.0;
    std::vector<Point> pts;
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                pts.push_back({x, y});
                sx += x;
                sy += y;
            }
        }
    }
    const int kx = static_cast<int>(std::floor(2.0 * sx / static_cast<double>(pts.size()) + 0.5));
    const int ky = static_cast<int>(std::floor(2.0 * sy / static_cast<double>(pts.size()) + 0.5));
    BinaryMask b(m.width(), m.height());
    for (const auto& p : pts) {
        if (b.contains(kx - p.x, ky - p.y)) {
            b.set(kx - p.x, ky - p.y, true);
        }
    }
    return static_cast<double>((m & b).count()) / static_cast<double>((m | b).count());
}

// Reflection across the line through c at angle theta, written as the
// matrix [cos 2t, sin 2t; sin 2t, -cos 2t].
double reflect_overlap_oracle(const BinaryMask& m, Vec2 c, double theta) {
    const double c2 = std::cos(2.0 * theta);
    const double s2 = std::sin(2.0 * theta);
    BinaryMask b(m.width(), m.height());
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            const double u = x - c.x;
            const double v = y - c.y;
            const double rx = c.x + c2 * u + s2 * v;
            const double ry = c.y + s2 * u - c2 * v;
            const int qx = static_cast<int>(std::floor(rx + 0.5));
            const int qy = static_cast<int>(std::floor(ry + 0.5));
            b.set(x, y, m.contains(qx, qy) && m.at(qx, qy));
        }
    }
    return static_cast<double>((m & b).count()) / static_cast<double>((m | b).count());
}

double degrees(Vec2 axis) {
    double a = std::atan2(axis.y, axis.x) * 180.0 / kPi;
    while (a < -90.0) {
        a += 180.0;
    }
    while (a >= 90.0) {
        a -= 180.0;
    }
    return a;
}

Polygon circle_polygon(double cx, double cy, double r, int n) {
    Polygon p;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * i / n;
        p.points.push_back({cx + r * std::cos(t), cy + r * std::sin(t)});
    }
    return p;
}

Vec2 mean_point(const Polygon& p) {
    Vec2 c{0.0, 0.0};
    for (const auto& q : p.points) {
        c.x += q.x;
        c.y += q.y;
    }
    c.x /= static_cast<double>(p.size());
    c.y /= static_cast<double>(p.size());
    return c;
}

// Turning angle over mean adjacent edge length.
double max_curvature(const Polygon& p) {
    const std::size_t n = p.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& a = p.points[(i + n - 1) % n];
        const auto& b = p.points[i];
        const auto& c = p.points[(i + 1) % n];
        const double t1 = std::atan2(b.y - a.y, b.x - a.x);
        const double t2 = std::atan2(c.y - b.y, c.x - b.x);
        double turn = std::abs(t2 - t1);
        if (turn > kPi) {
            turn = 2.0 * kPi - turn;
        }
        const double len = 0.5 * (std::hypot(b.x - a.x, b.y - a.y) + std::hypot(c.x - b.x, c.y - b.y));
        worst = std::max(worst, turn / len);
    }
    return worst;
}

void append_segment(Contour& c, Point a, Point b) {
    const int steps = std::max(std::abs(b.x - a.x), std::abs(b.y - a.y));
    for (int s = 0; s < steps; ++s) {
        const double t = static_cast<double>(s) / steps;
        const Point q{static_cast<int>(std::lround(a.x + t * (b.x - a.x))),
                      static_cast<int>(std::lround(a.y + t * (b.y - a.y)))};
        if (c.points.empty() || !(c.points.back() == q)) {
            c.points.push_back(q);
        }
    }
}

// Koch snowflake after `depth` subdivisions, rasterized as a closed chain.
Contour koch_contour(double side, int depth) {
    std::vector<Vec2> v{{0.0, 0.0}, {side, 0.0}, {side / 2.0, side * std::sqrt(3.0) / 2.0}};
    for (int d = 0; d < depth; ++d) {
        std::vector<Vec2> next;
        for (std::size_t i = 0; i < v.size(); ++i) {
            const Vec2 a = v[i];
            const Vec2 b = v[(i + 1) % v.size()];
            const Vec2 e{(b.x - a.x) / 3.0, (b.y - a.y) / 3.0};
            const Vec2 p1{a.x + e.x, a.y + e.y};
            const Vec2 p2{a.x + 2.0 * e.x, a.y + 2.0 * e.y};
            // Outward bump for a clockwise-in-screen winding.
            const double c = std::cos(-kPi / 3.0);
            const double s = std::sin(-kPi / 3.0);
            const Vec2 tip{p1.x + c * e.x - s * e.y, p1.y + s * e.x + c * e.y};
            next.insert(next.end(), {a, p1, tip, p2});
        }
        v = std::move(next);
    }
    Contour out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % v.size()];
        append_segment(out, {static_cast<int>(std::lround(a.x + 10)), static_cast<int>(std::lround(a.y + 200))},
                       {static_cast<int>(std::lround(b.x + 10)), static_cast<int>(std::lround(b.y + 200))});
    }
    return out;
}

// Least-squares box-counting slope using a bitmap grid per scale.
double box_count_oracle(const Contour& c) {
    int x0 = c.points[0].x;
    int y0 = c.points[0].y;
    int x1 = x0;
    int y1 = y0;
    for (const auto& p : c.points) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    const int extent = std::max(x1 - x0 + 1, y1 - y0 + 1);
    std::vector<double> xs;
    std::vector<double> ys;
    for (int r = 2; r <= extent / 4; r *= 2) {
        const int gw = (x1 - x0) / r + 1;
        const int gh = (y1 - y0) / r + 1;
        std::vector<char> hit(static_cast<std::size_t>(gw * gh), 0);
        for (const auto& p : c.points) {
            hit[static_cast<std::size_t>(((p.y - y0) / r) * gw + (p.x - x0) / r)] = 1;
        }
        xs.push_back(std::log(r));
        ys.push_back(std::log(std::accumulate(hit.begin(), hit.end(), 0.0)));
    }
    const double n = static_cast<double>(xs.size());
    const double sx = std::accumulate(xs.begin(), xs.end(), 0.0);
    const double sy = std::accumulate(ys.begin(), ys.end(), 0.0);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Mean distance from the centre to an a x b ellipse boundary. An 8-connected
// trace spaces its points by the chessboard step, so the weight is
// max(|dx|, |dy|) rather than arc length.
double ellipse_mean_radius(double a, double b) {
    const int n = 200000;
    double len = 0.0;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * kPi * (i + 0.5) / n;
        const double ds = std::max(std::abs(a * std::sin(t)), std::abs(b * std::cos(t)));
        len += ds;
        acc += ds * std::hypot(a * std::cos(t), b * std::sin(t));
    }
    return acc / len;
}

GrayImage two_tone(const BinaryMask& m, double split_x, double left, double right) {
    GrayImage g(m.width(), m.height(), 0.85);
    for (int y = 0; y < m.height(); ++y) {
        for (int x = 0; x < m.width(); ++x) {
            if (m.at(x, y)) {
                g.at(x, y) = x < split_x ? left : right;
            }
        }
    }
    return g;
}

PhantomSpec blob_spec(double scale) {
    PhantomSpec s;
    s.shape = PhantomShape::Blob;
    s.size = static_cast<int>(std::lround(512 * scale));
    s.radius = 110.0 * scale;
    s.harmonics = {{3, 0.15}, {5, 0.06}};
    s.edge_softness = 1.0;
    s.center_darkening = 0.3;
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// Asymmetry
// ---------------------------------------------------------------------------

TEST(AsymmetryIndex, CenteredDiskIsSymmetric) {
    EXPECT_NEAR(asymmetry_index(disk(101, 101, 50, 50, 30)), 1.0, 0.02);
    EXPECT_NEAR(asymmetry_index(disk(100, 100, 47.3, 52.6, 30)), 1.0, 0.02);
}

TEST(AsymmetryIndex, RightTriangleMatchesForwardRotationOracle) {
    const auto tri = mask_from(100, 100, [](double x, double y) { return x >= 20 && y >= 20 && (x - 20) + (y - 20) < 60; });
    const double v = asymmetry_index(tri);
    EXPECT_NEAR(v, rotate_overlap_oracle(tri), 1e-6);
    EXPECT_LT(v, 0.6);
}

TEST(AsymmetryIndex, MatchesOracleOnBlobs) {
    for (int k = 2; k <= 5; ++k) {
        const auto m = harmonic_blob(140, 130, 69.7, 64.2, 40, k, 0.25, 0.1 * k);
        EXPECT_NEAR(asymmetry_index(m), rotate_overlap_oracle(m), 1e-6) << k;
    }
}

TEST(AsymmetryIndex, EmptyMaskRejected) {
    EXPECT_THROW(asymmetry_index(BinaryMask(10, 10)), std::invalid_argument);
}

TEST(PrincipalAxes, AxisAlignedRectangle) {
    const auto ax = principal_axes(rect(80, 80, 20, 35, 40, 10));
    EXPECT_NEAR(degrees(ax.major), 0.0, 1.0);
    EXPECT_FALSE(ax.degenerate);
    EXPECT_NEAR(ax.major.x * ax.minor.x + ax.major.y * ax.minor.y, 0.0, 1e-12);
}

TEST(PrincipalAxes, RotatedRectangle) {
    const double t = 30.0 * kPi / 180.0;
    const auto r = mask_from(120, 120, [=](double x, double y) {
        const double u = (x - 60) * std::cos(t) + (y - 60) * std::sin(t);
        const double v = -(x - 60) * std::sin(t) + (y - 60) * std::cos(t);
        return std::abs(u) <= 20 && std::abs(v) <= 5;
    });
    EXPECT_NEAR(degrees(principal_axes(r).major), 30.0, 1.0);
}

TEST(PrincipalAxes, DiskIsDegenerate) {
    EXPECT_TRUE(principal_axes(disk(101, 101, 50, 50, 30)).degenerate);
    EXPECT_THROW(principal_axes(rect(5, 5, 2, 2, 1, 1)), std::invalid_argument);
}

TEST(Asymmetry, DiskAndRectangle) {
    EXPECT_NEAR(asymmetry(disk(101, 101, 50, 50, 30)), 1.0, 0.02);
    EXPECT_NEAR(asymmetry(rect(80, 80, 20, 35, 40, 10)), 1.0, 0.03);
}

TEST(Asymmetry, ReflectionMatchesMatrixOracle) {
    const auto m = harmonic_blob(160, 160, 80, 80, 45, 3, 0.3);
    const Vec2 c = centroid(m);
    for (double theta : {0.0, 0.4, 1.1, 2.5}) {
        EXPECT_NEAR(reflection_overlap(m, c, {std::cos(theta), std::sin(theta)}), reflect_overlap_oracle(m, c, theta),
                    1e-6)
            << theta;
    }
}

TEST(Asymmetry, BlobMatchesFourAxisOracle) {
    const auto m = harmonic_blob(160, 160, 80, 80, 45, 3, 0.3);
    const auto ax = principal_axes(m);
    const double t0 = std::atan2(ax.major.y, ax.major.x);
    double best = 0.0;
    for (int k = 0; k < 4; ++k) {
        best = std::max(best, reflect_overlap_oracle(m, ax.centroid, t0 + k * kPi / 4.0));
    }
    EXPECT_NEAR(asymmetry(m), best, 1e-6);
}

TEST(Asymmetry, TranslationAndQuarterTurns) {
    const auto m = harmonic_blob(150, 150, 70, 72, 40, 3, 0.25);
    const auto moved = translate(m, 9, -5);
    EXPECT_DOUBLE_EQ(asymmetry_index(moved), asymmetry_index(m));
    EXPECT_DOUBLE_EQ(asymmetry(moved), asymmetry(m));
    BinaryMask turned(150, 150);
    for (int y = 0; y < 150; ++y) {
        for (int x = 0; x < 150; ++x) {
            turned.set(149 - y, x, m.at(x, y));
        }
    }
    EXPECT_NEAR(asymmetry_index(turned), asymmetry_index(m), 0.02);
    EXPECT_NEAR(asymmetry(turned), asymmetry(m), 0.02);
}

// ---------------------------------------------------------------------------
// Border
// ---------------------------------------------------------------------------

TEST(Compactness, DiskNearOne) {
    const double c = compactness(disk(240, 240, 120, 120, 100));
    EXPECT_GE(c, 0.85);
    EXPECT_LE(c, 1.15);
}

TEST(Compactness, AnalyticSquare) {
    EXPECT_NEAR(compactness(40.0, 100.0), 4.0 / kPi, 1e-12);
    Polygon sq{{{0, 0}, {10, 0}, {10, 10}, {0, 10}}};
    EXPECT_NEAR(compactness(sq), 4.0 / kPi, 1e-12);
}

TEST(Compactness, BlobExceedsDisk) {
    const auto blob = harmonic_blob(200, 200, 100, 100, 60, 5, 0.2);
    const double r = std::sqrt(static_cast<double>(area(blob)) / kPi);
    EXPECT_GT(compactness(blob), compactness(disk(200, 200, 100, 100, r)));
}

TEST(Compactness, MultiComponentRejected) {
    EXPECT_THROW(compactness(rect(30, 30, 0, 0, 4, 4) | rect(30, 30, 20, 20, 4, 4)), std::invalid_argument);
}

TEST(FractalDimension, CircleAndLine) {
    const double dc = fractal_dimension(trace_contour(disk(240, 240, 120, 120, 100)));
    EXPECT_GE(dc, 0.95);
    EXPECT_LE(dc, 1.05);

    Contour line;
    for (int x = 0; x < 200; ++x) {
        line.points.push_back({x, 50 + x / 3});
    }
    const double dl = fractal_dimension(line);
    EXPECT_GE(dl, 0.95);
    EXPECT_LE(dl, 1.05);
}

TEST(FractalDimension, KochContourIsRough) {
    const auto koch = koch_contour(162.0, 3);
    const double d = fractal_dimension(koch);
    EXPECT_NEAR(d, box_count_oracle(koch), 1e-9);
    EXPECT_GT(d, 1.15);
}

TEST(FractalDimension, ShortContourRejected) {
    Contour c;
    for (int i = 0; i < 10; ++i) {
        c.points.push_back({i, 0});
    }
    EXPECT_THROW(fractal_dimension(c), std::invalid_argument);
}

TEST(RadialVariance, DiskIsNearZero) { EXPECT_LT(radial_variance(disk(240, 240, 120, 120, 100)), 0.001); }

TEST(RadialVariance, EllipseMatchesDirectSum) {
    const auto m = ellipse(200, 140, 100, 70, 80, 40);
    const auto c = trace_contour(m);
    const auto g = centroid(m);
    double mean = 0.0;
    for (const auto& p : c.points) {
        mean += std::hypot(p.x - g.x, p.y - g.y);
    }
    mean /= static_cast<double>(c.size());
    double var = 0.0;
    for (const auto& p : c.points) {
        const double d = std::hypot(p.x - g.x, p.y - g.y) - mean;
        var += d * d;
    }
    var /= static_cast<double>(c.size());
    EXPECT_NEAR(radial_variance(m), var / (mean * mean), 1e-9);
}

TEST(RadialVariance, ScaleInvariant) {
    const auto small = ellipse(200, 140, 100, 70, 80, 40);
    const auto big = ellipse(400, 280, 200, 140, 160, 80);
    EXPECT_NEAR(radial_variance(big) / radial_variance(small), 1.0, 0.02);
}

TEST(RadialCircleRatio, DiskNearOne) { EXPECT_NEAR(radial_circle_ratio(disk(240, 240, 120, 120, 100)), 1.0, 0.03); }

TEST(RadialCircleRatio, FourToOneEllipseMatchesQuadrature) {
    const double a = 120.0;
    const double b = 30.0;
    const double m = ellipse_mean_radius(a, b);
    const double expected = m * m / (a * b);
    const double got = radial_circle_ratio(ellipse(300, 100, 150, 50, a, b));
    EXPECT_GT(got, 1.2);
    EXPECT_NEAR(got / expected, 1.0, 0.02);
}

TEST(RadialCircleRatio, TranslationInvariant) {
    const auto m = harmonic_blob(160, 160, 75, 80, 40, 3, 0.2);
    EXPECT_DOUBLE_EQ(radial_circle_ratio(translate(m, 11, -7)), radial_circle_ratio(m));
}

TEST(SmoothContour, CircleShrinksAboutFixedCentre) {
    const auto c = circle_polygon(40.0, -12.0, 50.0, 180);
    const auto s = smooth_contour(c, 4.0);
    ASSERT_EQ(s.size(), c.size());
    const Vec2 m = mean_point(s);
    EXPECT_NEAR(m.x, 40.0, 0.1);
    EXPECT_NEAR(m.y, -12.0, 0.1);
    for (const auto& p : s.points) {
        EXPECT_LT(std::hypot(p.x - 40.0, p.y + 12.0), 50.0);
        EXPECT_GT(std::hypot(p.x - 40.0, p.y + 12.0), 49.0);
    }
}

TEST(SmoothContour, RepeatedSmoothingNeverGrowsArea) {
    auto p = Polygon::from(trace_contour(harmonic_blob(200, 200, 100, 100, 60, 5, 0.25)));
    double prev = std::abs(signed_area(p));
    for (int i = 0; i < 40; ++i) {
        p = smooth_contour(p, 6.0);
        const double a = std::abs(signed_area(p));
        EXPECT_LE(a, prev + 1e-9) << i;
        prev = a;
    }
}

TEST(SmoothContour, SquareCornersSoften) {
    const auto sq = Polygon::from(trace_contour(rect(60, 60, 10, 10, 40, 40)));
    EXPECT_LT(max_curvature(smooth_contour(sq, 2.0)), max_curvature(sq));
}

TEST(SmoothContour, OpenContourRejected) {
    Polygon two{{{0, 0}, {1, 1}}};
    EXPECT_THROW(smooth_contour(two, 1.0), std::invalid_argument);
}

TEST(Ncd, UniformLesionGivesCircle) {
    const auto m = harmonic_blob(160, 160, 80, 80, 45, 3, 0.2);
    const auto prof = ncd_profile(gray_from(m, 0.3, 0.9), m);
    for (double v : prof.ncd) {
        EXPECT_NEAR(v, 100.0, 1e-9);
    }
    const auto rp = radial_profile(m);
    for (const auto& p : prof.contour.points) {
        EXPECT_NEAR(std::hypot(p.x - prof.centroid.x, p.y - prof.centroid.y), rp.mean, 1e-9);
    }
}

TEST(Ncd, BulgesTowardDarkHalf) {
    const auto m = disk(160, 160, 80, 80, 50);
    const auto prof = ncd_profile(two_tone(m, 80.0, 0.2, 0.6), m);
    const auto c = trace_contour(m);
    double dark = 0.0;
    double light = 0.0;
    int nd = 0;
    int nl = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const auto& q = prof.contour.points[i];
        const double r = std::hypot(q.x - prof.centroid.x, q.y - prof.centroid.y);
        if (c.points[i].x < 70) {
            dark += r;
            ++nd;
        } else if (c.points[i].x > 90) {
            light += r;
            ++nl;
        }
    }
    EXPECT_GT(dark / nd, light / nl);
}

TEST(Ncd, MeanIsExactlyHundred) {
    for (int k = 2; k <= 5; ++k) {
        const auto m = harmonic_blob(160, 160, 80, 80, 45, k, 0.2);
        GrayImage g(160, 160, 0.9);
        for (int y = 0; y < 160; ++y) {
            for (int x = 0; x < 160; ++x) {
                g.at(x, y) = 0.2 + 0.5 * (std::sin(0.11 * x * k) * std::cos(0.07 * y) + 1.0) / 2.0;
            }
        }
        const auto prof = ncd_profile(g, m);
        const double mean = std::accumulate(prof.ncd.begin(), prof.ncd.end(), 0.0) / static_cast<double>(prof.ncd.size());
        EXPECT_NEAR(mean, 100.0, 1e-9);
    }
}

TEST(Ncd, BlackInvertedLesionRejected) {
    const auto m = disk(40, 40, 20, 20, 10);
    EXPECT_THROW(ncd_profile(GrayImage(40, 40, 1.0), m), std::invalid_argument);
}

TEST(Irregularity, UniformDiskStaysNearOne) {
    const auto m = disk(200, 200, 100, 100, 60);
    EXPECT_GE(irregularity_index(gray_from(m, 0.3, 0.85), m), 0.98);
}

TEST(Irregularity, FiveLobedBlobScoresLower) {
    const auto d = disk(200, 200, 100, 100, 60);
    const auto b = harmonic_blob(200, 200, 100, 100, 60, 5, 0.25);
    const double id = irregularity_index(gray_from(d, 0.3, 0.85), d);
    const double ib = irregularity_index(gray_from(b, 0.3, 0.85), b);
    EXPECT_GT(ib, 0.0);
    EXPECT_LT(ib, id - 0.05);
}

TEST(Irregularity, CapReportsNonConvergence) {
    const auto b = harmonic_blob(200, 200, 100, 100, 60, 5, 0.25);
    IrregularityParams p;
    p.max_iters = 1;
    const auto res = irregularity(gray_from(b, 0.3, 0.85), b, p);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.iterations, 1);
    EXPECT_GT(res.index, 0.0);
    EXPECT_LE(res.index, 1.0);
}

// ---------------------------------------------------------------------------
// Color texture
// ---------------------------------------------------------------------------

TEST(Glcm, TwoByTwoHandCase) {
    GrayImage g(2, 2, 0.0);
    g.at(0, 1) = 1.0;
    g.at(1, 1) = 1.0;
    const auto m = glcm(g, BinaryMask(2, 2, true), 2, {1, 0});
    EXPECT_DOUBLE_EQ(m.at(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(m.at(1, 1), 0.5);
    EXPECT_DOUBLE_EQ(m.at(0, 1), 0.0);
    EXPECT_DOUBLE_EQ(m.at(1, 0), 0.0);
    const auto h = haralick(m);
    EXPECT_DOUBLE_EQ(h.energy, 0.5);
    EXPECT_DOUBLE_EQ(h.contrast, 0.0);
    EXPECT_DOUBLE_EQ(h.homogeneity, 1.0);
    EXPECT_NEAR(h.correlation, 1.0, 1e-12);
    EXPECT_TRUE(h.correlation_defined);
}

TEST(Glcm, ConstantLesion) {
    const auto m = disk(40, 40, 20, 20, 12);
    const auto g = glcm(gray_from(m, 0.4, 0.9), m, 32, {1, 1});
    EXPECT_DOUBLE_EQ(g.at(0, 0), 1.0);
    const auto h = haralick(g);
    EXPECT_DOUBLE_EQ(h.energy, 1.0);
    EXPECT_DOUBLE_EQ(h.contrast, 0.0);
    EXPECT_DOUBLE_EQ(h.homogeneity, 1.0);
    EXPECT_DOUBLE_EQ(h.correlation, 0.0);
    EXPECT_FALSE(h.correlation_defined);
}

TEST(Glcm, Checkerboard) {
    GrayImage g(16, 16, 0.0);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            g.at(x, y) = (x + y) % 2 == 0 ? 0.2 : 0.8;
        }
    }
    const auto m = glcm(g, BinaryMask(16, 16, true), 2, {1, 0});
    EXPECT_DOUBLE_EQ(m.at(0, 1), 0.5);
    EXPECT_DOUBLE_EQ(m.at(1, 0), 0.5);
    const auto h = haralick(m);
    EXPECT_DOUBLE_EQ(h.contrast, 1.0);
    EXPECT_NEAR(h.correlation, -1.0, 1e-12);
}

TEST(Glcm, RangesSymmetryAndNormalization) {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Offset offsets[] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}, {2, -3}};
    for (int trial = 0; trial < 10; ++trial) {
        const auto m = harmonic_blob(64, 64, 32, 32, 20, 2 + trial % 4, 0.2);
        GrayImage g(64, 64);
        for (auto& v : g.pixels()) {
            v = u(rng);
        }
        const int ng = 2 + trial * 3;
        for (const auto off : offsets) {
            const auto c = glcm(g, m, ng, off);
            double sum = 0.0;
            for (int i = 0; i < ng; ++i) {
                for (int j = 0; j < ng; ++j) {
                    EXPECT_GE(c.at(i, j), 0.0);
                    EXPECT_DOUBLE_EQ(c.at(i, j), c.at(j, i));
                    sum += c.at(i, j);
                }
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
            const auto h = haralick(c);
            EXPECT_GT(h.energy, 0.0);
            EXPECT_LE(h.energy, 1.0);
            EXPECT_GT(h.homogeneity, 0.0);
            EXPECT_LE(h.homogeneity, 1.0);
            EXPECT_GE(h.contrast, 0.0);
            EXPECT_LE(h.contrast, static_cast<double>((ng - 1) * (ng - 1)));
            EXPECT_GE(h.correlation, -1.0);
            EXPECT_LE(h.correlation, 1.0);
        }
    }
}

TEST(Glcm, Rejections) {
    const auto m = disk(20, 20, 10, 10, 5);
    const GrayImage g(20, 20, 0.5);
    EXPECT_THROW(glcm(g, m, 1, {1, 0}), std::invalid_argument);
    EXPECT_THROW(glcm(g, m, 8, {0, 0}), std::invalid_argument);
    EXPECT_THROW(glcm(g, rect(20, 20, 3, 3, 1, 1), 8, {1, 0}), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// Diameter
// ---------------------------------------------------------------------------

TEST(Diameter, TwoPoints) {
    const auto d = diameter(Contour{{{0, 0}, {3, 4}}}, 0.1);
    EXPECT_DOUBLE_EQ(d.pixels, 5.0);
    ASSERT_TRUE(d.mm.has_value());
    EXPECT_DOUBLE_EQ(*d.mm, 0.5);
    EXPECT_THROW(diameter(Contour{{{2, 2}}}), std::invalid_argument);
}

TEST(Diameter, DiskAndBruteForce) {
    const auto c = trace_contour(disk(240, 240, 120, 120, 100));
    EXPECT_NEAR(diameter(c).pixels, 200.0, 2.0);
    for (const auto& m : {harmonic_blob(200, 200, 100, 100, 60, 3, 0.3), ellipse(200, 200, 100, 100, 80, 30, 0.7),
                          rect(50, 50, 3, 7, 30, 11)}) {
        const auto ct = trace_contour(m);
        double best = 0.0;
        for (const auto& a : ct.points) {
            for (const auto& b : ct.points) {
                best = std::max(best, std::hypot(a.x - b.x, a.y - b.y));
            }
        }
        EXPECT_DOUBLE_EQ(diameter(ct).pixels, best);
        const auto box = bounding_box(m);
        EXPECT_GE(diameter(ct).pixels, std::max(box.width(), box.height()) - 1.0);
    }
}

// ---------------------------------------------------------------------------
// Feature vector
// ---------------------------------------------------------------------------

TEST(ExtractFeatures, DiskPhantomAnchors) {
    PhantomSpec s;
    s.size = 320;
    s.radius = 100;
    const auto p = generate_phantom(s);
    const auto f = extract_features(p.image, p.truth);
    EXPECT_NEAR(f.asymmetry_index, 1.0, 0.02);
    EXPECT_NEAR(f.asymmetry, 1.0, 0.02);
    EXPECT_NEAR(f.compactness, 1.0, 0.15);
    EXPECT_LT(f.radial_variance, 0.001);
    EXPECT_NEAR(f.contrast, 0.0, 1e-12);
    EXPECT_NEAR(f.diameter, 200.0, 2.0);
}

TEST(ExtractFeatures, TranslationGivesIdenticalVector) {
    auto build = [](int dx, int dy) {
        const auto m = harmonic_blob(200, 200, 90 + dx, 95 + dy, 50, 3, 0.25);
        RgbImage img(200, 200, {220, 170, 150});
        for (int y = 0; y < 200; ++y) {
            for (int x = 0; x < 200; ++x) {
                if (m.at(x, y)) {
                    const int u = x - dx;
                    const int v = y - dy;
                    const auto shade = static_cast<std::uint8_t>(u < 90 ? 60 + (u * 7 + v * 13) % 20 : 120 + (u * v) % 25);
                    img.at(x, y) = {shade, static_cast<std::uint8_t>(shade / 2), 40};
                }
            }
        }
        return std::pair{img, m};
    };
    const auto [img0, m0] = build(0, 0);
    const auto [img1, m1] = build(17, -9);
    FeatureConfig cfg;
    cfg.mm_per_px = 0.05;
    const auto a = extract_features(img0, m0, cfg);
    const auto b = extract_features(img1, m1, cfg);
    EXPECT_EQ(a.values(), b.values());
    EXPECT_EQ(a.diameter_mm, b.diameter_mm);
    for (double v : a.values()) {
        EXPECT_TRUE(std::isfinite(v));
    }
}

TEST(ExtractFeatures, ShapeFeaturesScaleInvariant) {
    const auto base = generate_phantom(blob_spec(1.0));
    const auto f0 = extract_features(base.image, base.truth);
    for (double scale : {0.5, 2.0}) {
        const auto p = generate_phantom(blob_spec(scale));
        const auto f = extract_features(p.image, p.truth);
        EXPECT_NEAR(f.compactness / f0.compactness, 1.0, 0.03) << scale;
        EXPECT_NEAR(f.radial_variance / f0.radial_variance, 1.0, 0.03) << scale;
        EXPECT_NEAR(f.irregularity_index / f0.irregularity_index, 1.0, 0.03) << scale;
        EXPECT_NEAR(f.asymmetry_index / f0.asymmetry_index, 1.0, 0.03) << scale;
        EXPECT_NEAR(f.asymmetry / f0.asymmetry, 1.0, 0.03) << scale;
    }
}

TEST(ExtractFeatures, ColumnContract) {
    const auto& names = FeatureVector::column_names();
    const std::vector<std::string> expected{"asym_idx", "asym",  "compact", "radial_var", "irreg",
                                            "corr",     "homog", "energy",  "contrast",   "diam_px"};
    ASSERT_EQ(names.size(), expected.size());
    for (std::size_t i = 0; i < names.size(); ++i) {
        EXPECT_EQ(names[i], expected[i]);
    }
}

TEST(ExtractFeatures, Rejections) {
    EXPECT_THROW(extract_features(RgbImage(20, 20, {200, 200, 200}), BinaryMask(20, 20)), std::invalid_argument);
    EXPECT_THROW(extract_features(RgbImage(20, 20, {200, 200, 200}), BinaryMask(21, 20, true)), std::invalid_argument);
}

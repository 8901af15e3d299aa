#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dermabcd/segment.hpp"

namespace dermabcd {

void LevelSetParams::validate() const {
    if (!(sigma > 0.0) || !(epsilon > 0.0) || !(c > 0.0) || !(tau > 0.0) || mu < 0.0) {
        throw std::invalid_argument("LevelSetParams: sigma, epsilon, c, tau must be positive and mu non-negative");
    }
    if (!(tau * mu < 0.25)) {
        throw std::invalid_argument("LevelSetParams: tau * mu must be below 0.25");
    }
    if (!std::isfinite(nu) || !std::isfinite(lambda) || !(intensity_scale > 0.0)) {
        throw std::invalid_argument("LevelSetParams: nu, lambda, intensity_scale invalid");
    }
    if (max_iters < 0 || !(convergence_tol > 0.0) || convergence_window < 1) {
        throw std::invalid_argument("LevelSetParams: invalid stopping rule");
    }
}

double dirac(double x, double epsilon) {
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("dirac: epsilon must be positive");
    }
    if (std::abs(x) > epsilon) {
        return 0.0;
    }
    return (1.0 + std::cos(std::numbers::pi * x / epsilon)) / (2.0 * epsilon);
}

int heaviside(double x) { return x >= 0.0 ? 1 : 0; }

LevelSetState init_phi(const BinaryMask& mask, const LevelSetParams& params) {
    params.validate();
    if (!mask.any()) {
        throw std::invalid_argument("init_phi: empty mask");
    }
    LevelSetState s;
    s.width = mask.width();
    s.height = mask.height();
    s.phi.resize(mask.size());
    auto bits = mask.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        s.phi[i] = -params.epsilon * (0.5 - (bits[i] ? 1.0 : 0.0));
    }
    return s;
}

LengthArea length_area(const LevelSetState& state, double epsilon) {
    LengthArea la;
    for (double v : state.phi) {
        la.length += dirac(v, epsilon);
        la.area += heaviside(v);
    }
    return la;
}

namespace {

// Central differences with replicated borders (zero flux at the edge).
void gradient(const std::vector<double>& f, int w, int h, std::vector<double>& fx, std::vector<double>& fy) {
    fx.resize(f.size());
    fy.resize(f.size());
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            fx[i] = 0.5 * (f[static_cast<std::size_t>(y * w + xp)] - f[static_cast<std::size_t>(y * w + xm)]);
            fy[i] = 0.5 * (f[static_cast<std::size_t>(yp * w + x)] - f[static_cast<std::size_t>(ym * w + x)]);
        }
    }
}

std::vector<double> to_vector(const GrayImage& img) { return {img.pixels().begin(), img.pixels().end()}; }

}  // namespace

GrayImage edge_indicator(const GrayImage& img, double sigma) {
    const auto smooth = gaussian_blur(img, sigma);
    std::vector<double> gx;
    std::vector<double> gy;
    gradient(to_vector(smooth), img.width(), img.height(), gx, gy);
    GrayImage g(img.width(), img.height());
    auto out = g.pixels();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = 1.0 / (1.0 + gx[i] * gx[i] + gy[i] * gy[i]);
    }
    return g;
}

namespace {

GrayImage scaled_edge_map(const GrayImage& image, const LevelSetParams& params) {
    params.validate();
    GrayImage scaled = image;
    for (auto& v : scaled.pixels()) {
        v *= params.intensity_scale;
    }
    return edge_indicator(scaled, params.sigma);
}

}  // namespace

LevelSetEvolver::LevelSetEvolver(const GrayImage& image, const BinaryMask& init, const LevelSetParams& params)
    : LevelSetEvolver(scaled_edge_map(image, params), init, params, nullptr) {}

LevelSetEvolver::LevelSetEvolver(GrayImage edge_map, const BinaryMask& init, const LevelSetParams& params,
                                 std::nullptr_t)
    : params_(params), g_(std::move(edge_map)) {
    params_.validate();
    if (init.width() != g_.width() || init.height() != g_.height()) {
        throw std::invalid_argument("LevelSetEvolver: init size does not match image");
    }
    if (!init.any()) {
        throw std::invalid_argument("LevelSetEvolver: empty init mask");
    }
    gradient(to_vector(g_), g_.width(), g_.height(), gx_, gy_);
    init_field(init);
}

void LevelSetEvolver::init_field(const BinaryMask& init) {
    // Signed distance to the region boundary, clipped to +-c: the zero level
    // sits half a pixel outside the boundary pixels and the field is flat
    // beyond c.
    const int w = init.width();
    const int h = init.height();
    const double c = params_.c;
    const int reach = static_cast<int>(std::ceil(c + 0.5));
    state_.width = w;
    state_.height = h;
    state_.iteration = 0;
    state_.phi.assign(init.size(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const bool in = init.at(x, y);
            double best2 = std::numeric_limits<double>::infinity();
            for (int dy = -reach; dy <= reach; ++dy) {
                for (int dx = -reach; dx <= reach; ++dx) {
                    const int qx = x + dx;
                    const int qy = y + dy;
                    if (init.contains(qx, qy) && init.at(qx, qy) != in) {
                        best2 = std::min(best2, static_cast<double>(dx * dx + dy * dy));
                    }
                }
            }
            const double d = std::min(c, std::sqrt(best2) - 0.5);
            state_.phi[static_cast<std::size_t>(y * w + x)] = in ? d : -d;
        }
    }
}

void LevelSetEvolver::step() {
    const int w = state_.width;
    const int h = state_.height;
    auto& phi = state_.phi;
    std::vector<double> px;
    std::vector<double> py;
    gradient(phi, w, h, px, py);
    nx_.resize(phi.size());
    ny_.resize(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double s = std::sqrt(px[i] * px[i] + py[i] * py[i]);
        nx_[i] = px[i] / (s + 1e-10);
        ny_[i] = py[i] / (s + 1e-10);
    }
    std::vector<double> nxx;
    std::vector<double> dummy;
    std::vector<double> nyy;
    gradient(nx_, w, h, nxx, dummy);
    gradient(ny_, w, h, dummy, nyy);
    scratch_.resize(phi.size());
    const auto g = g_.pixels();
    const double eps = params_.epsilon;
    for (int y = 0; y < h; ++y) {
        const int ym = std::max(y - 1, 0);
        const int yp = std::min(y + 1, h - 1);
        for (int x = 0; x < w; ++x) {
            const int xm = std::max(x - 1, 0);
            const int xp = std::min(x + 1, w - 1);
            const std::size_t i = static_cast<std::size_t>(y * w + x);
            const double lap = phi[static_cast<std::size_t>(y * w + xm)] + phi[static_cast<std::size_t>(y * w + xp)] +
                               phi[static_cast<std::size_t>(ym * w + x)] + phi[static_cast<std::size_t>(yp * w + x)] -
                               4.0 * phi[i];
            const double kappa = nxx[i] + nyy[i];
            const double zeta = lap - kappa;
            double xi = 0.0;
            if (std::abs(phi[i]) <= eps) {
                const double d = dirac(phi[i], eps);
                // div(g N) = grad g . N + g div N; the balloon pushes phi down,
                // so nu > 0 moves the front into the lesion.
                const double edge = d * (gx_[i] * nx_[i] + gy_[i] * ny_[i] + g[i] * kappa);
                xi = params_.lambda * edge - params_.nu * g[i] * d;
            }
            scratch_[i] = phi[i] + params_.tau * (params_.mu * zeta + xi);
        }
    }
    phi.swap(scratch_);
    ++state_.iteration;
}

std::size_t LevelSetEvolver::area() const {
    return static_cast<std::size_t>(std::count_if(state_.phi.begin(), state_.phi.end(), [](double v) { return v >= 0.0; }));
}

BinaryMask LevelSetEvolver::zero_superlevel() const {
    BinaryMask m(state_.width, state_.height);
    auto bits = m.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
        bits[i] = state_.phi[i] >= 0.0 ? 1 : 0;
    }
    return m;
}

LevelSetResult evolve_level_set(const GrayImage& img, const BinaryMask& init, const LevelSetParams& params) {
    params.validate();
    if (!init.any()) {
        throw std::invalid_argument("evolve_level_set: empty init mask");
    }
    LevelSetResult result;
    if (params.max_iters == 0) {
        result.mask = init;
        result.converged = true;
        return result;
    }
    LevelSetEvolver ev(img, init, params);
    const std::size_t total = init.size();
    double prev = static_cast<double>(ev.area());
    result.area_history.push_back(prev);
    int quiet = 0;
    for (int k = 0; k < params.max_iters; ++k) {
        ev.step();
        const auto a = static_cast<double>(ev.area());
        result.area_history.push_back(a);
        result.iterations = k + 1;
        if (a == 0.0 || a == static_cast<double>(total)) {
            throw SegmentationError(a == 0.0 ? "evolve_level_set: contour vanished"
                                             : "evolve_level_set: contour flooded the image");
        }
        quiet = std::abs(a - prev) / prev < params.convergence_tol ? quiet + 1 : 0;
        prev = a;
        if (quiet >= params.convergence_window) {
            result.converged = true;
            break;
        }
    }
    result.mask = fill_holes(largest_component(ev.zero_superlevel()));
    return result;
}

}  // namespace dermabcd

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "dermabcd/classify.hpp"

namespace dermabcd {

void MlpConfig::validate() const {
    if (hidden.empty() || hidden.size() > 2) {
        throw std::invalid_argument("MlpConfig: one or two hidden layers required");
    }
    for (int n : hidden) {
        if (n < 1) {
            throw std::invalid_argument("MlpConfig: hidden layers need at least one unit");
        }
    }
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw std::invalid_argument("MlpConfig: learning_rate must be finite and non-negative");
    }
    if (epochs < 1) {
        throw std::invalid_argument("MlpConfig: epochs must be >= 1");
    }
    if (batch_size < 0) {
        throw std::invalid_argument("MlpConfig: batch_size must be >= 0");
    }
    if (!(target_error >= 0.0)) {
        throw std::invalid_argument("MlpConfig: target_error must be non-negative");
    }
}

std::vector<int> MlpConfig::layout(int inputs) const {
    std::vector<int> l{inputs};
    l.insert(l.end(), hidden.begin(), hidden.end());
    l.push_back(1);
    return l;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Mlp::Mlp(const std::vector<int>& layout) {
    if (layout.size() < 2 || layout.back() != 1) {
        throw std::invalid_argument("Mlp: layout must have >= 2 layers and a single output");
    }
    for (std::size_t i = 0; i + 1 < layout.size(); ++i) {
        if (layout[i] < 1 || layout[i + 1] < 1) {
            throw std::invalid_argument("Mlp: layer sizes must be positive");
        }
        Layer l;
        l.inputs = layout[i];
        l.outputs = layout[i + 1];
        l.weights.assign(static_cast<std::size_t>(l.inputs * l.outputs), 0.0);
        l.bias.assign(static_cast<std::size_t>(l.outputs), 0.0);
        layers_.push_back(std::move(l));
    }
}

Mlp Mlp::random(const std::vector<int>& layout, WeightInit init, std::uint64_t seed) {
    Mlp net(layout);
    std::mt19937_64 rng(seed);
    const double lo = init == WeightInit::Unit ? 0.0 : -0.5;
    std::uniform_real_distribution<double> u(lo, lo + 1.0);
    for (auto& l : net.layers_) {
        for (auto& w : l.weights) {
            w = u(rng);
        }
        for (auto& b : l.bias) {
            b = u(rng);
        }
    }
    return net;
}

std::vector<int> Mlp::layout() const {
    std::vector<int> out;
    if (layers_.empty()) {
        return out;
    }
    out.push_back(layers_.front().inputs);
    for (const auto& l : layers_) {
        out.push_back(l.outputs);
    }
    return out;
}

std::vector<std::vector<double>> Mlp::activations(const std::vector<double>& x) const {
    if (layers_.empty()) {
        throw std::logic_error("Mlp: empty network");
    }
    if (static_cast<int>(x.size()) != inputs()) {
        throw std::invalid_argument("Mlp: input size mismatch");
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("Mlp: non-finite input");
        }
    }
    std::vector<std::vector<double>> acts{x};
    for (const auto& l : layers_) {
        const auto& in = acts.back();
        std::vector<double> out(static_cast<std::size_t>(l.outputs));
        for (int o = 0; o < l.outputs; ++o) {
            double z = l.bias[static_cast<std::size_t>(o)];
            for (int i = 0; i < l.inputs; ++i) {
                z += l.w(o, i) * in[static_cast<std::size_t>(i)];
            }
            out[static_cast<std::size_t>(o)] = sigmoid(z);
        }
        acts.push_back(std::move(out));
    }
    return acts;
}

double Mlp::forward(const std::vector<double>& x) const { return activations(x).back().front(); }

namespace {

void check_batch(const Batch& batch) {
    if (batch.x.empty() || batch.x.size() != batch.t.size()) {
        throw std::invalid_argument("Batch: empty or inputs/targets length mismatch");
    }
}

}  // namespace

double mean_squared_error(const Mlp& net, const Batch& batch) {
    check_batch(batch);
    double e = 0.0;
    for (std::size_t n = 0; n < batch.x.size(); ++n) {
        const double d = net.forward(batch.x[n]) - batch.t[n];
        e += d * d;
    }
    return e / static_cast<double>(batch.x.size());
}

Gradient backprop_gradient(const Mlp& net, const Batch& batch) {
    check_batch(batch);
    const auto& layers = net.layers();
    Gradient g;
    for (const auto& l : layers) {
        g.weights.emplace_back(l.weights.size(), 0.0);
        g.bias.emplace_back(l.bias.size(), 0.0);
    }
    const double scale = 2.0 / static_cast<double>(batch.x.size());
    for (std::size_t n = 0; n < batch.x.size(); ++n) {
        const auto acts = net.activations(batch.x[n]);
        // delta = dE/dz for the current layer.
        const double y = acts.back().front();
        std::vector<double> delta{scale * (y - batch.t[n]) * y * (1.0 - y)};
        for (std::size_t li = layers.size(); li-- > 0;) {
            const auto& l = layers[li];
            const auto& in = acts[li];
            for (int o = 0; o < l.outputs; ++o) {
                const double d = delta[static_cast<std::size_t>(o)];
                g.bias[li][static_cast<std::size_t>(o)] += d;
                for (int i = 0; i < l.inputs; ++i) {
                    g.weights[li][static_cast<std::size_t>(o * l.inputs + i)] += d * in[static_cast<std::size_t>(i)];
                }
            }
            if (li == 0) {
                break;
            }
            std::vector<double> prev(static_cast<std::size_t>(l.inputs), 0.0);
            for (int i = 0; i < l.inputs; ++i) {
                double s = 0.0;
                for (int o = 0; o < l.outputs; ++o) {
                    s += l.w(o, i) * delta[static_cast<std::size_t>(o)];
                }
                const double a = in[static_cast<std::size_t>(i)];
                prev[static_cast<std::size_t>(i)] = s * a * (1.0 - a);
            }
            delta = std::move(prev);
        }
    }
    return g;
}

namespace {

bool all_finite(const Mlp& net) {
    for (const auto& l : net.layers()) {
        for (double w : l.weights) {
            if (!std::isfinite(w)) {
                return false;
            }
        }
        for (double b : l.bias) {
            if (!std::isfinite(b)) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace

TrainResult train(const Batch& data, const MlpConfig& cfg) {
    cfg.validate();
    check_batch(data);
    const int inputs = static_cast<int>(data.x.front().size());
    return train(Mlp::random(cfg.layout(inputs), cfg.weight_init, cfg.rng_seed), data, cfg);
}

TrainResult train(Mlp net, const Batch& data, const MlpConfig& cfg) {
    cfg.validate();
    check_batch(data);
    const std::size_t n = data.x.size();
    const std::size_t per_update = cfg.batch_size == 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(cfg.batch_size));
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.rng_seed), static_cast<std::uint32_t>(cfg.rng_seed >> 32), 0x5eedu};
    std::mt19937_64 order_rng(seq);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult res;
    double err = mean_squared_error(net, data);
    res.error_curve.push_back(err);
    Batch chunk;
    for (int e = 0; e < cfg.epochs && !(err < cfg.target_error); ++e) {
        if (per_update < n) {
            std::shuffle(order.begin(), order.end(), order_rng);
        }
        for (std::size_t start = 0; start < n; start += per_update) {
            const std::size_t stop = std::min(n, start + per_update);
            chunk.x.clear();
            chunk.t.clear();
            for (std::size_t k = start; k < stop; ++k) {
                chunk.x.push_back(data.x[order[k]]);
                chunk.t.push_back(data.t[order[k]]);
            }
            const auto g = backprop_gradient(net, chunk);
            auto& layers = net.layers();
            for (std::size_t li = 0; li < layers.size(); ++li) {
                for (std::size_t k = 0; k < layers[li].weights.size(); ++k) {
                    layers[li].weights[k] -= cfg.learning_rate * g.weights[li][k];
                }
                for (std::size_t k = 0; k < layers[li].bias.size(); ++k) {
                    layers[li].bias[k] -= cfg.learning_rate * g.bias[li][k];
                }
            }
        }
        ++res.epochs_run;
        err = mean_squared_error(net, data);
        if (!std::isfinite(err) || !all_finite(net)) {
            throw std::runtime_error("train: error or weights became non-finite at epoch " +
                                     std::to_string(res.epochs_run));
        }
        res.error_curve.push_back(err);
    }
    res.net = std::move(net);
    return res;
}

}  // namespace dermabcd

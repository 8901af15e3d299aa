#pragma once

// Sigmoid multilayer perceptron trained by backpropagation on
// min-max normalized feature vectors, plus the repeated holdout protocol.

#include <cstdint>
#include <string>
#include <vector>

#include "dermabcd/evaluate.hpp"
#include "dermabcd/features.hpp"

namespace dermabcd {

enum class WeightInit { Unit, Symmetric };  ///< uniform [0, 1] or [-0.5, 0.5]

struct MlpConfig {
    std::vector<int> hidden{2};  ///< units per hidden layer (one or two layers)
    double learning_rate = 0.1;
    int epochs = 100;
    double target_error = 0.1;   ///< stop once the mean squared error drops below
    int batch_size = 1;          ///< samples per update; 0 = full batch
    WeightInit weight_init = WeightInit::Unit;
    std::uint64_t rng_seed = 1;

    void validate() const;
    /// {inputs, hidden..., 1}.
    std::vector<int> layout(int inputs = static_cast<int>(FeatureVector::kSize)) const;
};

struct Layer {
    int inputs = 0;
    int outputs = 0;
    std::vector<double> weights;  ///< outputs x inputs, row-major
    std::vector<double> bias;

    double& w(int o, int i) { return weights[static_cast<std::size_t>(o * inputs + i)]; }
    double w(int o, int i) const { return weights[static_cast<std::size_t>(o * inputs + i)]; }
};

class Mlp {
public:
    Mlp() = default;
    /// Zero-initialized network. The layout must have at least two entries
    /// and end in a single output.
    explicit Mlp(const std::vector<int>& layout);
    static Mlp random(const std::vector<int>& layout, WeightInit init, std::uint64_t seed);

    std::vector<int> layout() const;
    int inputs() const { return layers_.empty() ? 0 : layers_.front().inputs; }
    std::vector<Layer>& layers() { return layers_; }
    const std::vector<Layer>& layers() const { return layers_; }

    /// Output score in (0, 1). Throws std::invalid_argument on size mismatch
    /// or non-finite input.
    double forward(const std::vector<double>& x) const;

    /// Per-layer activations, input first.
    std::vector<std::vector<double>> activations(const std::vector<double>& x) const;

private:
    std::vector<Layer> layers_;
};

double sigmoid(double z);

/// One training sample set: rows of inputs and 0/1 targets.
struct Batch {
    std::vector<std::vector<double>> x;
    std::vector<double> t;
};

/// E = (1/N) sum (y - t)^2.
double mean_squared_error(const Mlp& net, const Batch& batch);

/// Gradient of mean_squared_error, laid out like the network's layers.
struct Gradient {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> bias;
};
Gradient backprop_gradient(const Mlp& net, const Batch& batch);

struct TrainResult {
    Mlp net;
    std::vector<double> error_curve;  ///< error before the first epoch and after each one
    int epochs_run = 0;
};

/// Gradient descent from a network drawn with cfg's seed. Each epoch visits
/// the samples in a seeded shuffled order, updating after every batch_size
/// samples. Stops after cfg.epochs or once the error is below
/// cfg.target_error. Throws std::runtime_error when the error becomes
/// non-finite.
TrainResult train(const Batch& data, const MlpConfig& cfg);
/// Same, continuing from `net`.
TrainResult train(Mlp net, const Batch& data, const MlpConfig& cfg);

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

struct Record {
    std::string id;
    std::vector<double> features;
    int label = 0;  ///< 1 malignant, 0 benign
};

/// Per-feature min-max scaling. Constant features map to 0.
struct Normalization {
    std::vector<double> min;
    std::vector<double> max;

    static Normalization fit(const std::vector<Record>& rows);
    std::vector<double> apply(const std::vector<double>& x) const;
};

/// Rejects duplicate ids, mixed feature lengths and labels outside {0, 1}.
void validate_records(const std::vector<Record>& rows, bool require_both_labels);

struct Model {
    Mlp net;
    Normalization norm;
    MlpConfig config;

    double score(const std::vector<double>& raw) const { return net.forward(norm.apply(raw)); }
    int predict(const std::vector<double>& raw) const { return score(raw) >= 0.5 ? 1 : 0; }
};

/// Fits normalization on `rows`, then trains.
Model fit_model(const std::vector<Record>& rows, const MlpConfig& cfg);

std::string model_to_json(const Model& model);
/// Throws std::invalid_argument on malformed documents.
Model model_from_json(const std::string& text);

struct HoldoutSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Stratified shuffle split: each class contributes round(fraction * n_c)
/// rows to training, clamped so both sides keep at least one row per class.
HoldoutSplit stratified_split(const std::vector<Record>& rows, double train_fraction, std::uint64_t seed);

struct HoldoutRun {
    Model model;  ///< normalization fitted on the training rows only
    ClassMetrics metrics;
};

/// Normalizes on split.train, trains with cfg and scores split.test.
HoldoutRun holdout_run(const std::vector<Record>& rows, const HoldoutSplit& split, const MlpConfig& cfg);

/// Seed of run r in holdout_eval; used for both the split and training.
std::uint64_t holdout_seed(std::uint64_t base, int run);

struct HoldoutReport {
    std::vector<ClassMetrics> runs;
    ClassMetrics mean;
};

/// Repeated holdout: run r draws a stratified split and trains with
/// holdout_seed(cfg.rng_seed, r).
HoldoutReport holdout_eval(const std::vector<Record>& rows, const MlpConfig& cfg, double train_fraction = 0.7,
                           int runs = 100);

}  // namespace dermabcd

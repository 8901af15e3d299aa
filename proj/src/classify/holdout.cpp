#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "dermabcd/classify.hpp"

namespace dermabcd {

void validate_records(const std::vector<Record>& rows, bool require_both_labels) {
    if (rows.empty()) {
        throw std::invalid_argument("dataset: no records");
    }
    std::set<std::string> ids;
    bool has[2] = {false, false};
    for (const auto& r : rows) {
        if (!ids.insert(r.id).second) {
            throw std::invalid_argument("dataset: duplicate id '" + r.id + "'");
        }
        if (r.features.size() != rows.front().features.size() || r.features.empty()) {
            throw std::invalid_argument("dataset: inconsistent feature length at '" + r.id + "'");
        }
        if (r.label != 0 && r.label != 1) {
            throw std::invalid_argument("dataset: label must be 0 or 1 at '" + r.id + "'");
        }
        has[r.label] = true;
    }
    if (require_both_labels && !(has[0] && has[1])) {
        throw std::invalid_argument("dataset: both classes must be present");
    }
}

Normalization Normalization::fit(const std::vector<Record>& rows) {
    if (rows.empty()) {
        throw std::invalid_argument("Normalization::fit: no rows");
    }
    Normalization n;
    n.min = rows.front().features;
    n.max = rows.front().features;
    for (const auto& r : rows) {
        if (r.features.size() != n.min.size()) {
            throw std::invalid_argument("Normalization::fit: inconsistent feature length");
        }
        for (std::size_t k = 0; k < n.min.size(); ++k) {
            n.min[k] = std::min(n.min[k], r.features[k]);
            n.max[k] = std::max(n.max[k], r.features[k]);
        }
    }
    return n;
}

std::vector<double> Normalization::apply(const std::vector<double>& x) const {
    if (x.size() != min.size()) {
        throw std::invalid_argument("Normalization::apply: feature length mismatch");
    }
    std::vector<double> out(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double span = max[k] - min[k];
        out[k] = span > 0.0 ? (x[k] - min[k]) / span : 0.0;
    }
    return out;
}

namespace {

Batch make_batch(const std::vector<Record>& rows, const std::vector<std::size_t>& idx, const Normalization& norm) {
    Batch b;
    for (auto i : idx) {
        b.x.push_back(norm.apply(rows[i].features));
        b.t.push_back(static_cast<double>(rows[i].label));
    }
    return b;
}

}  // namespace

std::uint64_t holdout_seed(std::uint64_t base, int run) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(run)};
    std::uint32_t words[2];
    seq.generate(words, words + 2);
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

Model fit_model(const std::vector<Record>& rows, const MlpConfig& cfg) {
    validate_records(rows, true);
    Model m;
    m.config = cfg;
    m.norm = Normalization::fit(rows);
    std::vector<std::size_t> all(rows.size());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    m.net = train(make_batch(rows, all, m.norm), cfg).net;
    return m;
}

HoldoutSplit stratified_split(const std::vector<Record>& rows, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw std::invalid_argument("stratified_split: fraction must be in (0, 1)");
    }
    validate_records(rows, true);
    std::mt19937_64 rng(seed);
    HoldoutSplit split;
    for (int label = 0; label <= 1; ++label) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].label == label) {
                idx.push_back(i);
            }
        }
        if (idx.size() < 2) {
            throw std::invalid_argument("stratified_split: each class needs at least two records");
        }
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n = static_cast<long>(idx.size());
        const long k = std::clamp(std::lround(train_fraction * static_cast<double>(n)), 1L, n - 1);
        split.train.insert(split.train.end(), idx.begin(), idx.begin() + k);
        split.test.insert(split.test.end(), idx.begin() + k, idx.end());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

HoldoutRun holdout_run(const std::vector<Record>& rows, const HoldoutSplit& split, const MlpConfig& cfg) {
    std::vector<Record> train_rows;
    for (auto i : split.train) {
        train_rows.push_back(rows.at(i));
    }
    HoldoutRun run;
    run.model.config = cfg;
    run.model.norm = Normalization::fit(train_rows);
    run.model.net = train(make_batch(rows, split.train, run.model.norm), cfg).net;
    std::vector<int> pred;
    std::vector<int> truth;
    for (auto i : split.test) {
        pred.push_back(run.model.predict(rows.at(i).features));
        truth.push_back(rows.at(i).label);
    }
    run.metrics = class_metrics(pred, truth);
    return run;
}

HoldoutReport holdout_eval(const std::vector<Record>& rows, const MlpConfig& cfg, double train_fraction, int runs) {
    if (runs < 1) {
        throw std::invalid_argument("holdout_eval: runs must be >= 1");
    }
    cfg.validate();
    HoldoutReport report;
    for (int r = 0; r < runs; ++r) {
        const std::uint64_t seed = holdout_seed(cfg.rng_seed, r);
        MlpConfig run_cfg = cfg;
        run_cfg.rng_seed = seed;
        report.runs.push_back(holdout_run(rows, stratified_split(rows, train_fraction, seed), run_cfg).metrics);
    }
    for (const auto& m : report.runs) {
        report.mean.sn += m.sn;
        report.mean.sp += m.sp;
        report.mean.tcr += m.tcr;
    }
    const auto n = static_cast<double>(report.runs.size());
    report.mean.sn /= n;
    report.mean.sp /= n;
    report.mean.tcr /= n;
    return report;
}

std::string model_to_json(const Model& model) {
    using nlohmann::json;
    json layers = json::array();
    for (const auto& l : model.net.layers()) {
        layers.push_back({{"inputs", l.inputs}, {"outputs", l.outputs}, {"weights", l.weights}, {"bias", l.bias}});
    }
    const auto& c = model.config;
    json doc = {
        {"format", "dermabcd-mlp"},
        {"version", 1},
        {"layout", model.net.layout()},
        {"activation", "sigmoid"},
        {"threshold", 0.5},
        {"layers", layers},
        {"normalization", {{"min", model.norm.min}, {"max", model.norm.max}}},
        {"config",
         {{"hidden", c.hidden},
          {"learning_rate", c.learning_rate},
          {"epochs", c.epochs},
          {"batch_size", c.batch_size},
          {"target_error", c.target_error},
          {"weight_init", c.weight_init == WeightInit::Unit ? "unit" : "symmetric"},
          {"rng_seed", c.rng_seed}}},
    };
    return doc.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
    using nlohmann::json;
    try {
        const auto doc = json::parse(text);
        if (doc.at("format").get<std::string>() != "dermabcd-mlp") {
            throw std::invalid_argument("model: unknown format");
        }
        Model m;
        const auto layout = doc.at("layout").get<std::vector<int>>();
        m.net = Mlp(layout);
        const auto& layers = doc.at("layers");
        if (layers.size() != m.net.layers().size()) {
            throw std::invalid_argument("model: layer count does not match layout");
        }
        for (std::size_t i = 0; i < layers.size(); ++i) {
            auto& l = m.net.layers()[i];
            auto w = layers[i].at("weights").get<std::vector<double>>();
            auto b = layers[i].at("bias").get<std::vector<double>>();
            if (w.size() != l.weights.size() || b.size() != l.bias.size()) {
                throw std::invalid_argument("model: weight shapes do not match layout");
            }
            l.weights = std::move(w);
            l.bias = std::move(b);
        }
        m.norm.min = doc.at("normalization").at("min").get<std::vector<double>>();
        m.norm.max = doc.at("normalization").at("max").get<std::vector<double>>();
        if (static_cast<int>(m.norm.min.size()) != m.net.inputs() || m.norm.max.size() != m.norm.min.size()) {
            throw std::invalid_argument("model: normalization size does not match inputs");
        }
        const auto& c = doc.at("config");
        m.config.hidden = c.at("hidden").get<std::vector<int>>();
        m.config.learning_rate = c.at("learning_rate").get<double>();
        m.config.epochs = c.at("epochs").get<int>();
        m.config.batch_size = c.value("batch_size", MlpConfig{}.batch_size);
        m.config.target_error = c.at("target_error").get<double>();
        m.config.weight_init = c.at("weight_init").get<std::string>() == "symmetric" ? WeightInit::Symmetric : WeightInit::Unit;
        m.config.rng_seed = c.at("rng_seed").get<std::uint64_t>();
        return m;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("model: ") + e.what());
    }
}

}  // namespace dermabcd

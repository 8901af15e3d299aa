#include <cstdio>
#include <fstream>
#include <sstream>

#include "dermabcd/cli.hpp"

namespace dermabcd::cli {

using nlohmann::json;

std::string to_string(SegMethod m) {
    switch (m) {
        case SegMethod::LevelSet:
            return "levelset";
        case SegMethod::GrowCut:
            return "growcut";
        case SegMethod::MeanShift:
            return "meanshift";
    }
    return "levelset";
}

SegMethod parse_method(const std::string& name) {
    if (name == "levelset") {
        return SegMethod::LevelSet;
    }
    if (name == "growcut") {
        return SegMethod::GrowCut;
    }
    if (name == "meanshift") {
        return SegMethod::MeanShift;
    }
    throw ConfigError("unknown segmentation method '" + name + "' (levelset, growcut, meanshift)");
}

void PipelineConfig::validate() const {
    try {
        hair.validate();
        inpaint.validate();
        levelset.validate();
        meanshift.validate();
        classifier.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (working_size < 16) {
        throw ConfigError("segmentation.working_size must be at least 16");
    }
    if (growcut_max_sweeps < 1) {
        throw ConfigError("segmentation.growcut.max_sweeps must be positive");
    }
    if (features.ng < 2 || features.offsets.empty()) {
        throw ConfigError("features: ng must be >= 2 and offsets non-empty");
    }
    for (const auto& o : features.offsets) {
        if (o.dx == 0 && o.dy == 0) {
            throw ConfigError("features: zero GLCM offset");
        }
    }
    if (features.mm_per_px && !(*features.mm_per_px > 0.0)) {
        throw ConfigError("features.mm_per_px must be positive");
    }
    if (threads < 0) {
        throw ConfigError("threads must be >= 0");
    }
}

json to_json(const PipelineConfig& c) {
    json offsets = json::array();
    for (const auto& o : c.features.offsets) {
        offsets.push_back({o.dx, o.dy});
    }
    const auto& ls = c.levelset;
    const auto& ms = c.meanshift;
    const auto& ir = c.features.irregularity;
    const auto& mlp = c.classifier;
    return json{
        {"hair",
         {{"enabled", c.hair_removal},
          {"sigmas", c.hair.sigmas},
          {"orientations", c.hair.orientations},
          {"response_threshold", c.hair.response_threshold},
          {"min_response", c.hair.min_response},
          {"min_elongation", c.hair.min_elongation},
          {"min_length", c.hair.min_length},
          {"max_half_width", c.hair.max_half_width},
          {"inpaint_radius", c.inpaint.radius}}},
        {"segmentation",
         {{"method", to_string(c.method)},
          {"working_size", c.working_size},
          {"levelset",
           {{"sigma", ls.sigma},
            {"nu", ls.nu},
            {"mu", ls.mu},
            {"tau", ls.tau},
            {"epsilon", ls.epsilon},
            {"c", ls.c},
            {"lambda", ls.lambda},
            {"intensity_scale", ls.intensity_scale},
            {"max_iters", ls.max_iters},
            {"convergence_tol", ls.convergence_tol},
            {"convergence_window", ls.convergence_window}}},
          {"growcut", {{"max_sweeps", c.growcut_max_sweeps}}},
          {"meanshift",
           {{"hs", ms.hs},
            {"hr", ms.hr},
            {"min_region", ms.min_region},
            {"max_iters", ms.max_iters},
            {"tol", ms.tol},
            {"min_lesion_fraction", ms.min_lesion_fraction}}}}},
        {"features",
         {{"ng", c.features.ng},
          {"offsets", offsets},
          {"mm_per_px", c.features.mm_per_px ? json(*c.features.mm_per_px) : json(nullptr)},
          {"irregularity",
           {{"presmooth_sigma", ir.presmooth_sigma},
            {"sigma_fraction", ir.sigma_fraction},
            {"stop_epsilon", ir.stop_epsilon},
            {"max_iters", ir.max_iters}}}}},
        {"classifier",
         {{"hidden", mlp.hidden},
          {"learning_rate", mlp.learning_rate},
          {"epochs", mlp.epochs},
          {"target_error", mlp.target_error},
          {"batch_size", mlp.batch_size},
          {"weight_init", mlp.weight_init == WeightInit::Unit ? "unit" : "symmetric"},
          {"rng_seed", mlp.rng_seed}}},
        {"io",
         {{"input_dir", c.io.input_dir},
          {"output_dir", c.io.output_dir},
          {"mask_dir", c.io.mask_dir},
          {"labels", c.io.labels},
          {"model", c.io.model}}},
        {"threads", c.threads},
    };
}

namespace {

// Overlays `user` on the defaults, rejecting keys the defaults do not have.
void merge_checked(json& base, const json& user, const std::string& path) {
    if (!user.is_object()) {
        throw ConfigError("config" + (path.empty() ? std::string() : " key '" + path + "'") + " must be an object");
    }
    for (auto it = user.begin(); it != user.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        auto& slot = base[it.key()];
        if (slot.is_object()) {
            merge_checked(slot, it.value(), key);
        } else {
            slot = it.value();
        }
    }
}

template <typename T>
T get(const json& doc, const char* a, const char* b, const char* c = nullptr) {
    const json* node = &doc.at(a).at(b);
    std::string key = std::string(a) + "." + b;
    if (c != nullptr) {
        node = &node->at(c);
        key += std::string(".") + c;
    }
    try {
        return node->get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + key + "' has the wrong type");
    }
}

}  // namespace

PipelineConfig config_from_json(const json& doc) {
    json merged = to_json(PipelineConfig{});
    merge_checked(merged, doc, "");
    PipelineConfig c;
    c.hair_removal = get<bool>(merged, "hair", "enabled");
    c.hair.sigmas = get<std::vector<double>>(merged, "hair", "sigmas");
    c.hair.orientations = get<int>(merged, "hair", "orientations");
    c.hair.response_threshold = get<double>(merged, "hair", "response_threshold");
    c.hair.min_response = get<double>(merged, "hair", "min_response");
    c.hair.min_elongation = get<double>(merged, "hair", "min_elongation");
    c.hair.min_length = get<double>(merged, "hair", "min_length");
    c.hair.max_half_width = get<int>(merged, "hair", "max_half_width");
    c.inpaint.radius = get<int>(merged, "hair", "inpaint_radius");

    c.method = parse_method(get<std::string>(merged, "segmentation", "method"));
    c.working_size = get<int>(merged, "segmentation", "working_size");
    auto& ls = c.levelset;
    ls.sigma = get<double>(merged, "segmentation", "levelset", "sigma");
    ls.nu = get<double>(merged, "segmentation", "levelset", "nu");
    ls.mu = get<double>(merged, "segmentation", "levelset", "mu");
    ls.tau = get<double>(merged, "segmentation", "levelset", "tau");
    ls.epsilon = get<double>(merged, "segmentation", "levelset", "epsilon");
    ls.c = get<double>(merged, "segmentation", "levelset", "c");
    ls.lambda = get<double>(merged, "segmentation", "levelset", "lambda");
    ls.intensity_scale = get<double>(merged, "segmentation", "levelset", "intensity_scale");
    ls.max_iters = get<int>(merged, "segmentation", "levelset", "max_iters");
    ls.convergence_tol = get<double>(merged, "segmentation", "levelset", "convergence_tol");
    ls.convergence_window = get<int>(merged, "segmentation", "levelset", "convergence_window");
    c.growcut_max_sweeps = get<int>(merged, "segmentation", "growcut", "max_sweeps");
    auto& ms = c.meanshift;
    ms.hs = get<double>(merged, "segmentation", "meanshift", "hs");
    ms.hr = get<double>(merged, "segmentation", "meanshift", "hr");
    ms.min_region = get<int>(merged, "segmentation", "meanshift", "min_region");
    ms.max_iters = get<int>(merged, "segmentation", "meanshift", "max_iters");
    ms.tol = get<double>(merged, "segmentation", "meanshift", "tol");
    ms.min_lesion_fraction = get<double>(merged, "segmentation", "meanshift", "min_lesion_fraction");

    c.features.ng = get<int>(merged, "features", "ng");
    c.features.offsets.clear();
    for (const auto& o : merged.at("features").at("offsets")) {
        if (!o.is_array() || o.size() != 2 || !o[0].is_number_integer() || !o[1].is_number_integer()) {
            throw ConfigError("features.offsets entries must be [dx, dy] integer pairs");
        }
        c.features.offsets.push_back({o[0].get<int>(), o[1].get<int>()});
    }
    const auto& mm = merged.at("features").at("mm_per_px");
    if (!mm.is_null()) {
        if (!mm.is_number()) {
            throw ConfigError("features.mm_per_px must be a number or null");
        }
        c.features.mm_per_px = mm.get<double>();
    }
    auto& ir = c.features.irregularity;
    ir.presmooth_sigma = get<double>(merged, "features", "irregularity", "presmooth_sigma");
    ir.sigma_fraction = get<double>(merged, "features", "irregularity", "sigma_fraction");
    ir.stop_epsilon = get<double>(merged, "features", "irregularity", "stop_epsilon");
    ir.max_iters = get<int>(merged, "features", "irregularity", "max_iters");

    auto& mlp = c.classifier;
    mlp.hidden = get<std::vector<int>>(merged, "classifier", "hidden");
    mlp.learning_rate = get<double>(merged, "classifier", "learning_rate");
    mlp.epochs = get<int>(merged, "classifier", "epochs");
    mlp.target_error = get<double>(merged, "classifier", "target_error");
    mlp.batch_size = get<int>(merged, "classifier", "batch_size");
    const auto init = get<std::string>(merged, "classifier", "weight_init");
    if (init != "unit" && init != "symmetric") {
        throw ConfigError("classifier.weight_init must be 'unit' or 'symmetric'");
    }
    mlp.weight_init = init == "unit" ? WeightInit::Unit : WeightInit::Symmetric;
    mlp.rng_seed = get<std::uint64_t>(merged, "classifier", "rng_seed");

    c.io.input_dir = get<std::string>(merged, "io", "input_dir");
    c.io.output_dir = get<std::string>(merged, "io", "output_dir");
    c.io.mask_dir = get<std::string>(merged, "io", "mask_dir");
    c.io.labels = get<std::string>(merged, "io", "labels");
    c.io.model = get<std::string>(merged, "io", "model");
    try {
        c.threads = merged.at("threads").get<int>();
    } catch (const json::exception&) {
        throw ConfigError("config key 'threads' has the wrong type");
    }
    c.validate();
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw ConfigError("override key '" + key + "' is malformed");
        }
        if (!node->is_object()) {
            *node = json::object();
        }
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        start = dot + 1;
    }
}

PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (file) {
        std::string text;
        try {
            text = read_text(*file);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        try {
            doc = json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError("config " + file->string() + ": " + e.what());
        }
    }
    for (const auto& o : overrides) {
        apply_override(doc, o);
    }
    return config_from_json(doc);
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string config_hash(const PipelineConfig& cfg) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(to_json(cfg).dump())));
    return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed for " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int resolve_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace dermabcd::cli

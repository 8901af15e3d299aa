#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "dermabcd/cli.hpp"
#include "dermabcd/image_io.hpp"
#include "dermabcd/log.hpp"

namespace fs = std::filesystem;
using namespace dermabcd;
using namespace dermabcd::cli;

namespace {

constexpr int kOk = 0;
constexpr int kPartial = 1;
constexpr int kUsage = 2;

struct ConfigArgs {
    std::string file;
    std::vector<std::string> overrides;

    void attach(CLI::App* app, const char* flag = "--config") {
        app->add_option(flag, file, "JSON configuration file")->check(CLI::ExistingFile);
        app->add_option("--set", overrides, "Override a config key: dotted.key=value")->take_all();
    }
    PipelineConfig load(const std::vector<std::string>& extra = {}) const {
        auto all = overrides;
        all.insert(all.end(), extra.begin(), extra.end());
        return load_config(file.empty() ? std::nullopt : std::optional<fs::path>(file), all);
    }
};

struct HairArgs {
    std::vector<double> sigmas;
    std::optional<double> threshold;
    std::optional<int> inpaint_radius;

    void attach(CLI::App* app) {
        app->add_option("--hair-sigma", sigmas, "Ridge detector scales (repeatable)")->delimiter(',');
        app->add_option("--hair-threshold", threshold, "Relative ridge response threshold");
        app->add_option("--inpaint-radius", inpaint_radius, "Inpainting neighbourhood radius");
    }
    std::vector<std::string> overrides() const {
        std::vector<std::string> out;
        if (!sigmas.empty()) {
            std::string list = "[";
            for (std::size_t i = 0; i < sigmas.size(); ++i) {
                list += (i ? "," : "") + format_number(sigmas[i]);
            }
            out.push_back("hair.sigmas=" + list + "]");
        }
        if (threshold) {
            out.push_back("hair.response_threshold=" + format_number(*threshold));
        }
        if (inpaint_radius) {
            out.push_back("hair.inpaint_radius=" + std::to_string(*inpaint_radius));
        }
        return out;
    }
};

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) {
        log_warn(w);
    }
}

int cmd_preprocess(const std::string& in, const std::string& out, const std::string& hair_mask, const std::string& debug,
                   const ConfigArgs& cfg_args, const HairArgs& hair) {
    const auto cfg = cfg_args.load(hair.overrides());
    const auto img = read_png(in);
    const auto res = remove_hair(img, cfg.hair, cfg.inpaint);
    write_png(out, res.image);
    if (!hair_mask.empty()) {
        write_mask(hair_mask, res.hair_mask);
    }
    if (!debug.empty()) {
        fs::create_directories(debug);
        write_mask(fs::path(debug) / "hair_raw.pgm", detect_hairs(to_grayscale(img), cfg.hair));
        write_mask(fs::path(debug) / "hair_refined.pgm", res.hair_mask);
    }
    return kOk;
}

int cmd_segment(const std::string& in, const std::string& out, const std::string& method, const std::string& seeds_path,
                const std::string& dump, const ConfigArgs& cfg_args) {
    std::vector<std::string> extra;
    if (!method.empty()) {
        extra.push_back("segmentation.method=" + method);
    }
    const auto cfg = cfg_args.load(extra);
    const auto img = read_png(in);
    std::optional<SeedMap> seeds;
    if (!seeds_path.empty()) {
        if (cfg.method != SegMethod::GrowCut) {
            throw ConfigError("--seeds only applies to --method growcut");
        }
        seeds = seeds_from_gray(read_pgm(seeds_path));
    }
    SegmentStages stages;
    const auto mask = segment_lesion(img, cfg, seeds ? &*seeds : nullptr, dump.empty() ? nullptr : &stages);
    write_mask(out, mask);
    if (!dump.empty()) {
        const fs::path d = dump;
        fs::create_directories(d);
        if (stages.rescaled) {
            write_png(d / "rescaled.png", *stages.rescaled);
        }
        if (stages.gray) {
            write_png(d / "gray.png", *stages.gray);
        }
        if (stages.init) {
            write_mask(d / "init.pgm", *stages.init);
        }
        if (stages.raw) {
            write_mask(d / "raw.pgm", *stages.raw);
        }
        write_mask(d / "final.pgm", mask);
    }
    return kOk;
}

int cmd_features(const std::string& in, const std::string& mask_path, const std::string& out, std::string id,
                 const std::string& label, const ConfigArgs& cfg_args) {
    const auto cfg = cfg_args.load();
    if (id.empty()) {
        id = fs::path(in).stem().string();
    }
    std::optional<int> lab;
    if (!label.empty()) {
        lab = parse_label(label);
        if (!lab) {
            throw ConfigError("unknown label '" + label + "'");
        }
    }
    const auto f = extract_features(read_png(in), read_mask(mask_path), cfg.features);
    const auto table = features_table({FeatureRow{id, f, lab}}, cfg.features.mm_per_px.has_value());
    if (out.empty() || out == "-") {
        std::cout << to_csv(table);
    } else {
        write_text(out, to_csv(table));
    }
    return kOk;
}

int cmd_train(const std::string& features, const std::string& out, int holdout_runs, double split,
              const ConfigArgs& cfg_args) {
    const auto cfg = cfg_args.load();
    const auto data = records_from_table(read_csv(features));
    if (!data.unlabeled_ids.empty()) {
        log_warn(std::to_string(data.unlabeled_ids.size()) + " unlabeled rows ignored");
    }
    try {
        validate_records(data.records, true);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (holdout_runs > 0) {
        const auto rep = holdout_eval(data.records, cfg.classifier, split, holdout_runs);
        std::printf("run,sn,sp,tcr\n");
        for (std::size_t i = 0; i < rep.runs.size(); ++i) {
            std::printf("%zu,%.4f,%.4f,%.4f\n", i, rep.runs[i].sn, rep.runs[i].sp, rep.runs[i].tcr);
        }
        std::printf("mean,%.4f,%.4f,%.4f\n", rep.mean.sn, rep.mean.sp, rep.mean.tcr);
        std::printf("Sn %.2f%%  Sp %.2f%%  TCR %.2f%%\n", 100 * rep.mean.sn, 100 * rep.mean.sp, 100 * rep.mean.tcr);
    }
    if (!out.empty()) {
        write_text(out, model_to_json(fit_model(data.records, cfg.classifier)));
    }
    return kOk;
}

int cmd_classify(const std::string& model_path, const std::string& features, const std::string& out) {
    Model model;
    try {
        model = model_from_json(read_text(model_path));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    auto table = read_csv(features);
    std::vector<int> cols;
    for (const char* name : FeatureVector::column_names()) {
        const int c = table.column(name);
        if (c < 0) {
            throw ConfigError(std::string("features CSV is missing column '") + name + "'");
        }
        cols.push_back(c);
    }
    table.header.emplace_back("prediction");
    table.header.emplace_back("score");
    for (auto& row : table.rows) {
        std::vector<double> x;
        for (int c : cols) {
            x.push_back(std::stod(row[static_cast<std::size_t>(c)]));
        }
        const double s = model.score(x);
        row.push_back(label_name(s >= 0.5 ? 1 : 0));
        row.push_back(format_number(s));
    }
    if (out.empty() || out == "-") {
        std::cout << to_csv(table);
    } else {
        write_text(out, to_csv(table));
    }
    return kOk;
}

int cmd_bench(const ConfigArgs& cfg_args, const std::vector<std::string>& extra, const std::string& out) {
    const auto cfg = cfg_args.load(extra);
    const auto rep = bench_segmentation(cfg);
    print_warnings(rep.warnings);
    if (!out.empty()) {
        write_text(out, to_csv(rep.table()));
    } else {
        std::cout << to_csv(rep.table());
    }
    std::cout << rep.summary() << '\n';
    return kOk;
}

int cmd_borders(const std::string& auto_dir, const std::string& manual_dir, const std::string& out) {
    const auto rep = evaluate_borders(auto_dir, manual_dir);
    print_warnings(rep.warnings);
    if (out.empty() || out == "-") {
        std::cout << to_csv(rep.table());
    } else {
        write_text(out, to_csv(rep.table()));
    }
    return kOk;
}

struct PhantomArgs {
    std::string out;
    int count = 20;
    std::string shape;
    int size = 512;
    double radius = 110.0;
    std::uint64_t seed = 1;
    double noise = 0.0;
    int hairs = 0;
    std::string id = "phantom";
};

int cmd_phantom(const PhantomArgs& a) {
    const fs::path root = a.out;
    std::vector<std::pair<std::string, PhantomSpec>> specs;
    if (a.shape.empty()) {
        const auto suite = standard_suite();
        if (a.count < 1 || a.count > static_cast<int>(suite.size())) {
            throw ConfigError("--count must be in [1, " + std::to_string(suite.size()) + "]");
        }
        for (int i = 0; i < a.count; ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "phantom_%02d", i);
            specs.emplace_back(name, suite[static_cast<std::size_t>(i)]);
        }
    } else {
        PhantomSpec s;
        if (a.shape == "disk") {
            s.shape = PhantomShape::Disk;
        } else if (a.shape == "ellipse") {
            s.shape = PhantomShape::Ellipse;
        } else if (a.shape == "blob") {
            s.shape = PhantomShape::Blob;
            s.harmonics = {{2, 0.1}, {3, 0.05}, {5, 0.03}};
        } else {
            throw ConfigError("--shape must be disk, ellipse or blob");
        }
        s.size = a.size;
        s.radius = a.radius;
        s.rng_seed = a.seed;
        s.noise_sigma = a.noise;
        s.hair_count = a.hairs;
        specs.emplace_back(a.id, s);
    }
    for (const char* sub : {"images", "masks", "hair"}) {
        fs::create_directories(root / sub);
    }
    for (const auto& [name, spec] : specs) {
        Phantom p;
        try {
            p = generate_phantom(spec);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        write_png(root / "images" / (name + ".png"), p.image);
        write_mask(root / "masks" / (name + ".pgm"), p.truth);
        write_mask(root / "hair" / (name + ".pgm"), p.hair_mask);
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dermabcd: dermoscopy lesion segmentation, ABCD features and MLP classification"};
    app.require_subcommand(1);
    std::string log_level;
    app.add_option("--log", log_level, "Log level (error, warn, info, debug); overrides DERMABCD_LOG");

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "Detect and inpaint hairs");
    std::string pre_in, pre_out, pre_mask, pre_debug;
    ConfigArgs pre_cfg;
    HairArgs pre_hair;
    pre->add_option("--in", pre_in, "Input PNG")->required()->check(CLI::ExistingFile);
    pre->add_option("--out", pre_out, "Output PNG")->required();
    pre->add_option("--hair-mask", pre_mask, "Write the refined hair mask (PGM)");
    pre->add_option("--debug", pre_debug, "Directory for raw and refined hair masks");
    pre_cfg.attach(pre);
    pre_hair.attach(pre);

    // segment
    auto* seg = app.add_subcommand("segment", "Segment one lesion");
    std::string seg_in, seg_out, seg_method, seg_seeds, seg_dump;
    ConfigArgs seg_cfg;
    seg->add_option("--in", seg_in, "Input PNG (preprocessed)")->required()->check(CLI::ExistingFile);
    seg->add_option("--out", seg_out, "Output mask (PGM)")->required();
    seg->add_option("--method", seg_method, "levelset, growcut or meanshift")
        ->check(CLI::IsMember({"levelset", "growcut", "meanshift"}));
    seg->add_option("--seeds", seg_seeds, "GrowCut seed PGM (0 background, 255 object, 128 unlabeled)")
        ->check(CLI::ExistingFile);
    seg->add_option("--dump-stages", seg_dump, "Directory for intermediate images");
    seg_cfg.attach(seg, "--params");

    // features
    auto* feat = app.add_subcommand("features", "Extract the ten features of one lesion");
    std::string feat_in, feat_mask, feat_out, feat_id, feat_label;
    ConfigArgs feat_cfg;
    feat->add_option("--in", feat_in, "Input PNG")->required()->check(CLI::ExistingFile);
    feat->add_option("--mask", feat_mask, "Lesion mask (PGM)")->required()->check(CLI::ExistingFile);
    feat->add_option("--out", feat_out, "Output CSV (default stdout)");
    feat->add_option("--id", feat_id, "Row id (default: image stem)");
    feat->add_option("--label", feat_label, "benign or malignant");
    feat_cfg.attach(feat);

    // train
    auto* tr = app.add_subcommand("train", "Train the classifier on a features CSV");
    std::string tr_features, tr_out;
    int tr_holdout = 0;
    double tr_split = 0.7;
    ConfigArgs tr_cfg;
    tr->add_option("--features", tr_features, "Labeled features CSV")->required()->check(CLI::ExistingFile);
    tr->add_option("--out", tr_out, "Model JSON");
    tr->add_option("--holdout", tr_holdout, "Report repeated holdout over this many runs")->check(CLI::NonNegativeNumber);
    tr->add_option("--split", tr_split, "Training fraction for holdout")->check(CLI::Range(0.0, 1.0));
    tr_cfg.attach(tr);

    // classify
    auto* cl = app.add_subcommand("classify", "Score a features CSV with a trained model");
    std::string cl_model, cl_features, cl_out;
    cl->add_option("--model", cl_model, "Model JSON")->required()->check(CLI::ExistingFile);
    cl->add_option("--features", cl_features, "Features CSV")->required()->check(CLI::ExistingFile);
    cl->add_option("--out", cl_out, "Output CSV (default stdout)");

    // bench
    auto* be = app.add_subcommand("bench", "Border error of all three segmentation methods");
    std::string be_in, be_manual, be_out;
    ConfigArgs be_cfg;
    be->add_option("--in", be_in, "Directory of PNG images")->check(CLI::ExistingDirectory);
    be->add_option("--manual", be_manual, "Directory of manual masks <id>.pgm")->check(CLI::ExistingDirectory);
    be->add_option("--out", be_out, "Per-image CSV (default stdout)");
    be_cfg.attach(be);

    // evaluate borders
    auto* ev = app.add_subcommand("evaluate", "Evaluation reports");
    ev->require_subcommand(1);
    auto* evb = ev->add_subcommand("borders", "Border error of automatic against manual masks");
    std::string evb_auto, evb_manual, evb_out;
    evb->add_option("--auto", evb_auto, "Automatic masks directory")->required()->check(CLI::ExistingDirectory);
    evb->add_option("--manual", evb_manual, "Manual masks directory")->required()->check(CLI::ExistingDirectory);
    evb->add_option("--out", evb_out, "Output CSV (default stdout)");

    // phantom
    auto* ph = app.add_subcommand("phantom", "Generate synthetic lesions with ground truth");
    PhantomArgs pa;
    ph->add_option("--out", pa.out, "Output directory (images/, masks/, hair/)")->required();
    ph->add_option("--count", pa.count, "Number of standard-suite phantoms");
    ph->add_option("--shape", pa.shape, "Single phantom instead of the suite: disk, ellipse or blob");
    ph->add_option("--size", pa.size, "Image side (single phantom)");
    ph->add_option("--radius", pa.radius, "Lesion radius (single phantom)");
    ph->add_option("--seed", pa.seed, "RNG seed (single phantom)");
    ph->add_option("--noise", pa.noise, "Noise sigma (single phantom)");
    ph->add_option("--hairs", pa.hairs, "Hair count (single phantom)");
    ph->add_option("--id", pa.id, "File stem (single phantom)");

    // pipeline
    auto* pl = app.add_subcommand("pipeline", "Hair removal, segmentation, features and classification for a directory");
    std::string pl_in, pl_out, pl_masks, pl_labels, pl_model;
    int pl_threads = -1;
    bool pl_dump = false;
    ConfigArgs pl_cfg;
    pl->add_option("--in", pl_in, "Directory of PNG images");
    pl->add_option("--out", pl_out, "Output directory");
    pl->add_option("--labels", pl_labels, "CSV with id,label");
    pl->add_option("--model", pl_model, "Trained model JSON");
    pl->add_option("--threads", pl_threads, "Worker count (0 = all CPUs)");
    pl->add_flag("--dump-stages", pl_dump, "Write intermediate images per lesion");
    pl_cfg.attach(pl);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (!log_level.empty()) {
            set_log_level(parse_log_level(log_level));
        }
        if (pre->parsed()) {
            return cmd_preprocess(pre_in, pre_out, pre_mask, pre_debug, pre_cfg, pre_hair);
        }
        if (seg->parsed()) {
            return cmd_segment(seg_in, seg_out, seg_method, seg_seeds, seg_dump, seg_cfg);
        }
        if (feat->parsed()) {
            return cmd_features(feat_in, feat_mask, feat_out, feat_id, feat_label, feat_cfg);
        }
        if (tr->parsed()) {
            return cmd_train(tr_features, tr_out, tr_holdout, tr_split, tr_cfg);
        }
        if (cl->parsed()) {
            return cmd_classify(cl_model, cl_features, cl_out);
        }
        if (be->parsed()) {
            std::vector<std::string> extra;
            if (!be_in.empty()) {
                extra.push_back("io.input_dir=" + nlohmann::json(be_in).dump());
            }
            if (!be_manual.empty()) {
                extra.push_back("io.mask_dir=" + nlohmann::json(be_manual).dump());
            }
            return cmd_bench(be_cfg, extra, be_out);
        }
        if (evb->parsed()) {
            return cmd_borders(evb_auto, evb_manual, evb_out);
        }
        if (ph->parsed()) {
            return cmd_phantom(pa);
        }
        if (pl->parsed()) {
            std::vector<std::string> extra;
            auto quoted = [](const std::string& s) { return nlohmann::json(s).dump(); };
            if (!pl_in.empty()) {
                extra.push_back("io.input_dir=" + quoted(pl_in));
            }
            if (!pl_out.empty()) {
                extra.push_back("io.output_dir=" + quoted(pl_out));
            }
            if (!pl_labels.empty()) {
                extra.push_back("io.labels=" + quoted(pl_labels));
            }
            if (!pl_model.empty()) {
                extra.push_back("io.model=" + quoted(pl_model));
            }
            if (pl_threads >= 0) {
                extra.push_back("threads=" + std::to_string(pl_threads));
            }
            const auto cfg = pl_cfg.load(extra);
            const auto manifest = run_pipeline(cfg, PipelineOptions{pl_dump});
            std::size_t failed = 0;
            for (const auto& s : manifest.images) {
                failed += s.ok ? 0 : 1;
            }
            std::cerr << manifest.images.size() - failed << " ok, " << failed << " failed\n";
            return manifest.all_ok() ? kOk : kPartial;
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kPartial;
    }
    return kUsage;
}

#include <algorithm>
#include <chrono>
#include <map>
#include <mutex>

#include "dermabcd/cli.hpp"
#include "dermabcd/image_io.hpp"
#include "dermabcd/log.hpp"

namespace dermabcd::cli {

namespace fs = std::filesystem;
using nlohmann::json;

BinaryMask segment_lesion(const RgbImage& img, const PipelineConfig& cfg, const SeedMap* seeds, SegmentStages* stages) {
    switch (cfg.method) {
        case SegMethod::LevelSet: {
            auto res = segment_unsupervised(img, cfg.levelset, cfg.working_size, stages != nullptr);
            if (stages != nullptr && res.stages) {
                stages->rescaled = std::move(res.stages->rescaled);
                stages->gray = std::move(res.stages->gray);
                stages->init = std::move(res.stages->init);
                stages->raw = std::move(res.stages->evolved);
            }
            return res.mask;
        }
        case SegMethod::GrowCut: {
            const auto gray = to_grayscale(img);
            std::optional<BinaryMask> init;
            SeedMap s;
            if (seeds != nullptr) {
                s = *seeds;
            } else {
                init = threshold_init(gray);
                s = auto_seeds(*init);
            }
            auto res = growcut(img, s, cfg.growcut_max_sweeps);
            if (!res.mask.any()) {
                throw SegmentationError("growcut: no object pixels");
            }
            if (stages != nullptr) {
                stages->gray = gray;
                stages->init = init;
                stages->raw = res.mask;
            }
            return res.mask;
        }
        case SegMethod::MeanShift: {
            auto res = mean_shift_segment(img, cfg.meanshift);
            if (stages != nullptr) {
                stages->raw = res.mask;
            }
            return res.mask;
        }
    }
    throw ConfigError("unknown segmentation method");
}

BinaryMask segment_lesion(const RgbImage& img, const PipelineConfig& cfg, SegMethod method) {
    PipelineConfig c = cfg;
    c.method = method;
    return segment_lesion(img, c);
}

bool RunManifest::all_ok() const {
    return std::all_of(images.begin(), images.end(), [](const ImageStatus& s) { return s.ok; });
}

json RunManifest::to_json() const {
    json imgs = json::array();
    for (const auto& s : images) {
        json timings = json::object();
        for (const auto& t : s.timings) {
            timings[t.stage] = t.seconds;
        }
        json entry = {{"id", s.id}, {"status", s.ok ? "ok" : "failed"}, {"timings", timings}, {"outputs", s.outputs}};
        if (!s.ok) {
            entry["stage"] = s.failed_stage;
            entry["reason"] = s.reason;
        }
        imgs.push_back(std::move(entry));
    }
    return json{{"tool", "dermabcd"},   {"version", tool_version}, {"config_hash", config_hash},
                {"images", imgs},       {"outputs", outputs},      {"warnings", warnings}};
}

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
public:
    explicit StageTimer(ImageStatus& status) : status_(status) {}

    template <typename F>
    auto run(const std::string& stage, F f) {
        stage_ = stage;
        const auto t0 = Clock::now();
        auto result = f();
        status_.timings.push_back({stage, std::chrono::duration<double>(Clock::now() - t0).count()});
        return result;
    }
    const std::string& stage() const { return stage_; }

private:
    ImageStatus& status_;
    std::string stage_;
};

struct ImageOutcome {
    ImageStatus status;
    std::optional<FeatureRow> row;
    std::optional<double> score;
};

ImageOutcome process_image(const IngestItem& item, const PipelineConfig& cfg, const std::optional<Model>& model,
                           const PipelineOptions& opt, const fs::path& out_dir) {
    ImageOutcome o;
    o.status.id = item.id;
    StageTimer timer(o.status);
    const fs::path stage_dir = fs::path("stages") / item.id;
    auto record = [&](const fs::path& rel) { o.status.outputs.push_back(rel.generic_string()); };
    try {
        auto img = timer.run("ingest", [&] { return read_png(item.image); });
        if (opt.dump_stages) {
            fs::create_directories(out_dir / stage_dir);
        }
        if (cfg.hair_removal) {
            auto hr = timer.run("preprocess", [&] { return remove_hair(img, cfg.hair, cfg.inpaint); });
            if (opt.dump_stages) {
                write_mask(out_dir / stage_dir / "hair_mask.pgm", hr.hair_mask);
                record(stage_dir / "hair_mask.pgm");
                write_png(out_dir / stage_dir / "hair_removed.png", hr.image);
                record(stage_dir / "hair_removed.png");
            }
            img = std::move(hr.image);
        }
        SegmentStages stages;
        auto mask = timer.run("segment", [&] { return segment_lesion(img, cfg, nullptr, opt.dump_stages ? &stages : nullptr); });
        if (opt.dump_stages) {
            if (stages.gray) {
                write_png(out_dir / stage_dir / "gray.png", *stages.gray);
                record(stage_dir / "gray.png");
            }
            if (stages.init) {
                write_mask(out_dir / stage_dir / "init.pgm", *stages.init);
                record(stage_dir / "init.pgm");
            }
            if (stages.raw) {
                write_mask(out_dir / stage_dir / "raw.pgm", *stages.raw);
                record(stage_dir / "raw.pgm");
            }
        }
        const fs::path mask_rel = fs::path("masks") / (item.id + ".pgm");
        write_mask(out_dir / mask_rel, mask);
        record(mask_rel);
        auto features = timer.run("features", [&] { return extract_features(img, mask, cfg.features); });
        o.row = FeatureRow{item.id, features, item.label};
        if (model) {
            const auto v = features.values();
            o.score = timer.run("classify", [&] { return model->score({v.begin(), v.end()}); });
        }
    } catch (const std::exception& e) {
        o.status.ok = false;
        o.status.failed_stage = timer.stage();
        o.status.reason = e.what();
        o.row.reset();
        o.score.reset();
        log_warn(item.id + ": " + timer.stage() + " failed: " + e.what());
    }
    return o;
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg, const PipelineOptions& options) {
    cfg.validate();
    if (cfg.io.input_dir.empty() || cfg.io.output_dir.empty()) {
        throw ConfigError("pipeline needs io.input_dir and io.output_dir");
    }
    const fs::path out_dir = cfg.io.output_dir;
    std::optional<Model> model;
    if (!cfg.io.model.empty()) {
        try {
            model = model_from_json(read_text(cfg.io.model));
        } catch (const std::exception& e) {
            throw ConfigError(std::string("model: ") + e.what());
        }
    }
    const auto in = ingest(cfg.io.input_dir, cfg.io.labels.empty() ? std::nullopt : std::optional<fs::path>(cfg.io.labels));
    fs::create_directories(out_dir / "masks");

    RunManifest manifest;
    manifest.config_hash = config_hash(cfg);
    manifest.warnings = in.warnings;
    for (const auto& w : in.warnings) {
        log_warn(w);
    }
    std::vector<ImageOutcome> outcomes(in.items.size());
    parallel_for(in.items.size(), cfg.threads, [&](std::size_t i) {
        outcomes[i] = process_image(in.items[i], cfg, model, options, out_dir);
        log_info(in.items[i].id + (outcomes[i].status.ok ? ": ok" : ": failed"));
    });

    std::vector<FeatureRow> rows;
    CsvTable predictions;
    predictions.header = {"id", "prediction", "score"};
    for (auto& o : outcomes) {
        if (o.row) {
            rows.push_back(*o.row);
        }
        if (o.score) {
            predictions.rows.push_back({o.status.id, label_name(*o.score >= 0.5 ? 1 : 0), format_number(*o.score)});
        }
        manifest.images.push_back(std::move(o.status));
    }
    for (const auto& [name, reason] : in.errors) {
        ImageStatus s;
        s.id = name;
        s.ok = false;
        s.failed_stage = "ingest";
        s.reason = reason;
        manifest.images.push_back(std::move(s));
    }
    std::sort(manifest.images.begin(), manifest.images.end(),
              [](const ImageStatus& a, const ImageStatus& b) { return a.id < b.id; });

    write_text(out_dir / "features.csv", to_csv(features_table(rows, cfg.features.mm_per_px.has_value())));
    manifest.outputs.push_back("features.csv");
    if (model) {
        write_text(out_dir / "predictions.csv", to_csv(predictions));
        manifest.outputs.push_back("predictions.csv");
    }
    manifest.outputs.push_back("manifest.json");
    write_text(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
    return manifest;
}

CsvTable BenchReport::table() const {
    CsvTable t;
    t.header = {"id", "levelset", "growcut", "meanshift"};
    for (const auto& r : rows) {
        t.rows.push_back({r.id, format_number(r.levelset), format_number(r.growcut), format_number(r.meanshift)});
    }
    t.rows.push_back({"mean", format_number(levelset.mean), format_number(growcut.mean), format_number(meanshift.mean)});
    t.rows.push_back(
        {"stddev", format_number(levelset.stddev), format_number(growcut.stddev), format_number(meanshift.stddev)});
    return t;
}

std::string BenchReport::summary() const {
    char buf[160];
    std::snprintf(buf, sizeof buf, "Border Error (%%)  GrowCut %.2f  Mean shift %.2f  Level set %.2f  (n=%zu)",
                  growcut.mean, meanshift.mean, levelset.mean, rows.size());
    return buf;
}

BenchReport bench_segmentation(const PipelineConfig& cfg) {
    cfg.validate();
    if (cfg.io.input_dir.empty() || cfg.io.mask_dir.empty()) {
        throw ConfigError("bench needs io.input_dir and io.mask_dir");
    }
    const auto in = ingest(cfg.io.input_dir, std::nullopt);
    BenchReport report;
    report.warnings = in.warnings;
    std::vector<IngestItem> items;
    for (const auto& item : in.items) {
        if (fs::exists(fs::path(cfg.io.mask_dir) / (item.id + ".pgm"))) {
            items.push_back(item);
        } else {
            report.warnings.push_back(item.id + ": no manual mask; skipped");
        }
    }
    std::vector<std::optional<BenchRow>> rows(items.size());
    std::mutex warn_mutex;
    parallel_for(items.size(), cfg.threads, [&](std::size_t i) {
        const auto& item = items[i];
        try {
            const auto manual = read_mask(fs::path(cfg.io.mask_dir) / (item.id + ".pgm"));
            auto img = read_png(item.image);
            if (cfg.hair_removal) {
                img = remove_hair(img, cfg.hair, cfg.inpaint).image;
            }
            auto score = [&](SegMethod m) {
                try {
                    return border_error(segment_lesion(img, cfg, m), manual);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(warn_mutex);
                    report.warnings.push_back(item.id + ": " + to_string(m) + " failed (" + e.what() + "); scored 100%");
                    return 100.0;
                }
            };
            BenchRow r;
            r.id = item.id;
            r.levelset = score(SegMethod::LevelSet);
            r.growcut = score(SegMethod::GrowCut);
            r.meanshift = score(SegMethod::MeanShift);
            rows[i] = r;
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(warn_mutex);
            report.warnings.push_back(item.id + ": " + e.what() + "; skipped");
        }
    });
    std::vector<double> ls;
    std::vector<double> gc;
    std::vector<double> ms;
    for (const auto& r : rows) {
        if (r) {
            report.rows.push_back(*r);
            ls.push_back(r->levelset);
            gc.push_back(r->growcut);
            ms.push_back(r->meanshift);
        }
    }
    if (!report.rows.empty()) {
        report.levelset = mean_std(ls);
        report.growcut = mean_std(gc);
        report.meanshift = mean_std(ms);
    }
    std::sort(report.warnings.begin(), report.warnings.end());
    return report;
}

CsvTable BorderReport::table() const {
    CsvTable t;
    t.header = {"id", "border_error_pct"};
    for (const auto& r : rows) {
        t.rows.push_back({r.id, format_number(r.error_pct)});
    }
    t.rows.push_back({"mean", format_number(summary.mean)});
    t.rows.push_back({"stddev", format_number(summary.stddev)});
    return t;
}

BorderReport evaluate_borders(const fs::path& auto_dir, const fs::path& manual_dir) {
    if (!fs::is_directory(auto_dir) || !fs::is_directory(manual_dir)) {
        throw ConfigError("evaluate borders: --auto and --manual must be directories");
    }
    std::vector<fs::path> manual;
    for (const auto& e : fs::directory_iterator(manual_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".pgm") {
            manual.push_back(e.path());
        }
    }
    std::sort(manual.begin(), manual.end());
    BorderReport report;
    std::vector<double> values;
    for (const auto& m : manual) {
        const std::string id = m.stem().string();
        BorderRow row{id, 100.0};
        const auto a = auto_dir / m.filename();
        try {
            const auto truth = read_mask(m);
            if (fs::exists(a)) {
                row.error_pct = border_error(read_mask(a), truth);
            } else {
                report.warnings.push_back(id + ": no automatic mask; scored 100%");
            }
        } catch (const std::exception& e) {
            report.warnings.push_back(id + ": " + e.what() + "; skipped");
            continue;
        }
        values.push_back(row.error_pct);
        report.rows.push_back(row);
    }
    if (!values.empty()) {
        report.summary = mean_std(values);
    }
    return report;
}

}  // namespace dermabcd::cli

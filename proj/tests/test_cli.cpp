#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <set>

#include "dermabcd/cli.hpp"
#include "dermabcd/image_io.hpp"
#include "support.hpp"

using namespace dermabcd;
using namespace dermabcd::cli;
using namespace dermabcd::testing;
namespace fs = std::filesystem;

namespace {

PhantomSpec small_phantom(int i) {
    PhantomSpec s;
    s.shape = PhantomShape::Blob;
    s.size = 192;
    s.radius = 45.0 + 2.0 * (i % 4);
    s.harmonics = {{3, 0.08}, {5, 0.04}};
    s.edge_softness = 1.0;
    s.center_darkening = 0.2;
    s.noise_sigma = 0.03;
    s.hair_count = i % 3;
    s.rng_seed = 500 + static_cast<std::uint64_t>(i);
    return s;
}

/// Writes `count` small phantoms as <dir>/images/p_XX.png and their truth
/// masks as <dir>/masks/p_XX.pgm.
void write_phantoms(const fs::path& dir, int count) {
    fs::create_directories(dir / "images");
    fs::create_directories(dir / "masks");
    for (int i = 0; i < count; ++i) {
        const auto p = generate_phantom(small_phantom(i));
        char id[16];
        std::snprintf(id, sizeof id, "p_%02d", i);
        write_png(dir / "images" / (std::string(id) + ".png"), p.image);
        write_mask(dir / "masks" / (std::string(id) + ".pgm"), p.truth);
    }
}

PipelineConfig pipeline_config(const fs::path& in, const fs::path& out) {
    PipelineConfig cfg;
    cfg.io.input_dir = in.string();
    cfg.io.output_dir = out.string();
    return cfg;
}

std::vector<std::string> relative_files(const fs::path& root) {
    std::vector<std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            out.push_back(fs::relative(e.path(), root).generic_string());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(DERMABCD_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

FeatureVector sample_features(double seed) {
    FeatureVector f;
    f.asymmetry_index = 0.9 + seed * 1e-3;
    f.asymmetry = 0.8 / 3.0;
    f.compactness = 1.0 + seed / 7.0;
    f.radial_variance = 1e-5 * seed;
    f.irregularity_index = 0.87;
    f.correlation = -0.25;
    f.homogeneity = 0.6;
    f.energy = 1.0 / 9.0;
    f.contrast = 2.5e-3;
    f.diameter = 123.25 + seed;
    return f;
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

TEST(Config, HashStableAcrossIdenticalConfigs) {
    const PipelineConfig a;
    const auto b = config_from_json(to_json(a));
    const auto c = load_config(std::nullopt, {});
    EXPECT_EQ(config_hash(a), config_hash(b));
    EXPECT_EQ(config_hash(a), config_hash(c));
    EXPECT_EQ(config_hash(a).size(), 16u);
    auto d = a;
    d.levelset.nu = 2.0;
    EXPECT_NE(config_hash(d), config_hash(a));
}

TEST(Config, PartialDocumentKeepsDefaults) {
    const auto cfg = config_from_json(nlohmann::json::parse(R"({"segmentation": {"method": "meanshift"}})"));
    EXPECT_EQ(cfg.method, SegMethod::MeanShift);
    EXPECT_EQ(cfg.working_size, PipelineConfig{}.working_size);
    EXPECT_EQ(cfg.features.ng, 32);
}

TEST(Config, UnknownKeysAndBadTypesRejected) {
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"segmentation": {"bogus": 1}})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"colour": true})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"threads": "many"})")), ConfigError);
    EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"segmentation": {"method": "watershed"}})")), ConfigError);
    EXPECT_THROW(parse_method("snake"), ConfigError);
}

TEST(Config, OverridesAndFiles) {
    const auto dir = scratch_dir("config");
    write_text(dir / "cfg.json", R"({"classifier": {"hidden": [3, 2]}, "segmentation": {"levelset": {"nu": 1.0}}})");
    const auto cfg = load_config(dir / "cfg.json", {"segmentation.levelset.nu=2.5", "segmentation.method=growcut",
                                                     "io.output_dir=out dir", "classifier.learning_rate=0.25"});
    EXPECT_EQ(cfg.classifier.hidden, (std::vector<int>{3, 2}));
    EXPECT_DOUBLE_EQ(cfg.levelset.nu, 2.5);
    EXPECT_EQ(cfg.method, SegMethod::GrowCut);
    EXPECT_EQ(cfg.io.output_dir, "out dir");
    EXPECT_DOUBLE_EQ(cfg.classifier.learning_rate, 0.25);
    EXPECT_THROW(load_config(std::nullopt, {"no_equals_sign"}), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, {"segmentation.levelset.zeta=1"}), ConfigError);
    EXPECT_THROW(load_config(dir / "missing.json", {}), ConfigError);
    write_text(dir / "broken.json", "{ not json");
    EXPECT_THROW(load_config(dir / "broken.json", {}), ConfigError);
}

TEST(Config, ValidationRejectsBadValues) {
    EXPECT_THROW(load_config(std::nullopt, {"segmentation.working_size=0"}), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, {"classifier.epochs=0"}), ConfigError);
    EXPECT_THROW(load_config(std::nullopt, {"features.ng=1"}), ConfigError);
}

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

TEST(Csv, LabelsParse) {
    EXPECT_EQ(parse_label("benign"), 0);
    EXPECT_EQ(parse_label("malignant"), 1);
    EXPECT_EQ(parse_label("0"), 0);
    EXPECT_EQ(parse_label("1"), 1);
    EXPECT_FALSE(parse_label("maybe").has_value());
    EXPECT_EQ(label_name(1), "malignant");
    EXPECT_EQ(label_name(0), "benign");
}

TEST(Csv, NumbersRoundTripExactly) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<double>(i % 20) - 10.0);
        EXPECT_EQ(std::stod(format_number(v)), v);
    }
    EXPECT_EQ(format_number(0.1), "0.1");
    EXPECT_EQ(format_number(2.0), "2");
}

TEST(Csv, FeatureTableRoundTrip) {
    const auto dir = scratch_dir("csv");
    std::vector<FeatureRow> rows{{"b", sample_features(2), 1}, {"a", sample_features(1), 0}, {"c", sample_features(3), std::nullopt}};
    const auto table = features_table(rows, false);
    EXPECT_EQ(table.header, feature_csv_header(false));
    EXPECT_EQ(table.rows[0][0], "a");
    write_text(dir / "f.csv", to_csv(table));
    const auto back = read_csv(dir / "f.csv");
    EXPECT_EQ(back.header, table.header);
    EXPECT_EQ(back.rows, table.rows);
    const auto rec = records_from_table(back);
    ASSERT_EQ(rec.records.size(), 2u);
    EXPECT_EQ(rec.unlabeled_ids, (std::vector<std::string>{"c"}));
    const auto v = sample_features(1).values();
    EXPECT_EQ(rec.records[0].features, (std::vector<double>(v.begin(), v.end())));
    EXPECT_EQ(rec.records[0].label, 0);
    EXPECT_EQ(rec.records[1].label, 1);
}

TEST(Csv, HeaderContract) {
    EXPECT_EQ(feature_csv_header(false),
              (std::vector<std::string>{"id", "asym_idx", "asym", "compact", "radial_var", "irreg", "corr", "homog",
                                        "energy", "contrast", "diam_px", "label"}));
    const auto mm = feature_csv_header(true);
    EXPECT_EQ(mm[11], "diam_mm");
    EXPECT_EQ(mm.back(), "label");
}

TEST(Csv, RaggedRowsRejected) {
    const auto dir = scratch_dir("ragged");
    write_text(dir / "r.csv", "id,label\na,benign\nb\n");
    EXPECT_THROW(read_csv(dir / "r.csv"), std::exception);
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

TEST(Ingest, ThreeLabeledImages) {
    const auto dir = scratch_dir("ingest3");
    for (const char* id : {"x1", "x2", "x3"}) {
        write_png(dir / (std::string(id) + ".png"), RgbImage(4, 4, {10, 20, 30}));
    }
    write_text(dir / "labels.csv", "id,label\nx1,benign\nx2,malignant\nx3,benign\n");
    const auto res = ingest(dir, dir / "labels.csv");
    ASSERT_EQ(res.items.size(), 3u);
    EXPECT_EQ(res.labeled, 3u);
    EXPECT_EQ(res.unlabeled, 0u);
    EXPECT_EQ(res.items[1].id, "x2");
    EXPECT_EQ(res.items[1].label, 1);
    EXPECT_TRUE(res.warnings.empty());
}

TEST(Ingest, LabelRowWithoutImageWarns) {
    const auto dir = scratch_dir("ingest_orphan");
    write_png(dir / "a.png", RgbImage(4, 4, {10, 20, 30}));
    write_text(dir / "labels.csv", "id,label\na,malignant\nghost,benign\n");
    const auto res = ingest(dir, dir / "labels.csv");
    EXPECT_EQ(res.items.size(), 1u);
    ASSERT_EQ(res.warnings.size(), 1u);
    EXPECT_NE(res.warnings[0].find("ghost"), std::string::npos);
}

TEST(Ingest, MixedLabeledAndUnlabeled) {
    const auto dir = scratch_dir("ingest_mixed");
    for (const char* id : {"m1", "m2", "m3", "m4"}) {
        write_png(dir / (std::string(id) + ".png"), RgbImage(4, 4, {10, 20, 30}));
    }
    write_text(dir / "notes.txt", "not an image");
    write_text(dir / "labels.csv", "id,label\nm1,benign\nm3,malignant\nm4,unsure\n");
    const auto res = ingest(dir, dir / "labels.csv");
    EXPECT_EQ(res.items.size(), 4u);
    EXPECT_EQ(res.labeled, 2u);
    EXPECT_EQ(res.unlabeled, 2u);
    EXPECT_FALSE(res.items[3].label.has_value());
    EXPECT_EQ(res.warnings.size(), 1u);
    EXPECT_TRUE(res.errors.empty());
    EXPECT_EQ(ingest(dir, std::nullopt).unlabeled, 4u);
}

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

TEST(Pipeline, TenPhantomsEndToEnd) {
    const auto dir = scratch_dir("pipeline10");
    write_phantoms(dir, 10);
    const auto manifest = run_pipeline(pipeline_config(dir / "images", dir / "out"));
    EXPECT_TRUE(manifest.all_ok());
    ASSERT_EQ(manifest.images.size(), 10u);
    const auto table = read_csv(dir / "out" / "features.csv");
    EXPECT_EQ(table.rows.size(), 10u);

    std::set<std::string> referenced(manifest.outputs.begin(), manifest.outputs.end());
    for (const auto& s : manifest.images) {
        referenced.insert(s.outputs.begin(), s.outputs.end());
        EXPECT_FALSE(s.timings.empty());
    }
    const auto files = relative_files(dir / "out");
    EXPECT_EQ(std::set<std::string>(files.begin(), files.end()), referenced);

    for (int i = 0; i < 10; ++i) {
        char id[16];
        std::snprintf(id, sizeof id, "p_%02d", i);
        const auto automatic = read_mask(dir / "out" / "masks" / (std::string(id) + ".pgm"));
        const auto manual = read_mask(dir / "masks" / (std::string(id) + ".pgm"));
        EXPECT_LT(border_error(automatic, manual), 10.0) << id;
    }
}

TEST(Pipeline, DumpStagesAreReferenced) {
    const auto dir = scratch_dir("pipeline_stages");
    write_phantoms(dir, 2);
    const auto manifest = run_pipeline(pipeline_config(dir / "images", dir / "out"), {true});
    std::set<std::string> referenced(manifest.outputs.begin(), manifest.outputs.end());
    for (const auto& s : manifest.images) {
        referenced.insert(s.outputs.begin(), s.outputs.end());
    }
    EXPECT_TRUE(referenced.count("stages/p_00/hair_mask.pgm"));
    EXPECT_TRUE(referenced.count("stages/p_01/raw.pgm"));
    const auto files = relative_files(dir / "out");
    EXPECT_EQ(std::set<std::string>(files.begin(), files.end()), referenced);
}

TEST(Pipeline, CorruptImageIsIsolatedAndRerunIsByteIdentical) {
    const auto dir = scratch_dir("pipeline_corrupt");
    write_phantoms(dir, 10);
    write_text(dir / "images" / "p_04.png", "this is not a png");

    const std::string base = "pipeline --in " + (dir / "images").string() + " --threads 2 --out ";
    EXPECT_EQ(run_cli(base + (dir / "run1").string()), 1);
    EXPECT_EQ(run_cli(base + (dir / "run2").string()), 1);

    const auto table = read_csv(dir / "run1" / "features.csv");
    EXPECT_EQ(table.rows.size(), 9u);
    const auto manifest = nlohmann::json::parse(read_text(dir / "run1" / "manifest.json"));
    ASSERT_EQ(manifest.at("images").size(), 10u);
    int failed = 0;
    for (const auto& img : manifest.at("images")) {
        if (img.at("status") == "failed") {
            ++failed;
            EXPECT_EQ(img.at("id"), "p_04");
            EXPECT_EQ(img.at("stage"), "ingest");
        }
    }
    EXPECT_EQ(failed, 1);

    EXPECT_EQ(read_text(dir / "run1" / "features.csv"), read_text(dir / "run2" / "features.csv"));
    for (const auto& f : relative_files(dir / "run1" / "masks")) {
        EXPECT_EQ(read_text(dir / "run1" / "masks" / f), read_text(dir / "run2" / "masks" / f)) << f;
    }
}

TEST(Pipeline, ThreadCountDoesNotChangeOutputs) {
    const auto dir = scratch_dir("pipeline_threads");
    write_phantoms(dir, 4);
    auto cfg = pipeline_config(dir / "images", dir / "one");
    cfg.threads = 1;
    run_pipeline(cfg);
    cfg.io.output_dir = (dir / "four").string();
    cfg.threads = 4;
    run_pipeline(cfg);
    EXPECT_EQ(read_text(dir / "one" / "features.csv"), read_text(dir / "four" / "features.csv"));
}

TEST(Pipeline, ModelAddsPredictions) {
    const auto dir = scratch_dir("pipeline_model");
    write_phantoms(dir, 2);
    std::vector<Record> rows;
    for (int i = 0; i < 6; ++i) {
        Record r;
        r.id = "r" + std::to_string(i);
        r.label = i % 2;
        const auto v = sample_features(i * 3.0).values();
        r.features.assign(v.begin(), v.end());
        rows.push_back(r);
    }
    write_text(dir / "model.json", model_to_json(fit_model(rows, MlpConfig{})));
    auto cfg = pipeline_config(dir / "images", dir / "out");
    cfg.io.model = (dir / "model.json").string();
    const auto manifest = run_pipeline(cfg);
    EXPECT_TRUE(manifest.all_ok());
    const auto pred = read_csv(dir / "out" / "predictions.csv");
    EXPECT_EQ(pred.header, (std::vector<std::string>{"id", "prediction", "score"}));
    EXPECT_EQ(pred.rows.size(), 2u);
}

TEST(Pipeline, MissingInputsAreConfigErrors) {
    PipelineConfig cfg;
    EXPECT_THROW(run_pipeline(cfg), ConfigError);
    EXPECT_EQ(run_cli("pipeline --in /nonexistent/dir --out /tmp/dermabcd_never"), 2);
    EXPECT_EQ(run_cli("segment --method watershed --in a.png --out b.pgm"), 2);
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

TEST(Bench, PerfectAndEmptyMasks) {
    const auto dir = scratch_dir("bench_masks");
    fs::create_directories(dir / "manual");
    fs::create_directories(dir / "auto");
    const auto a = disk(64, 64, 32, 32, 15);
    const auto b = rect(64, 64, 10, 10, 30, 20);
    write_mask(dir / "manual" / "a.pgm", a);
    write_mask(dir / "manual" / "b.pgm", b);
    write_mask(dir / "manual" / "c.pgm", b);
    write_mask(dir / "auto" / "a.pgm", a);
    write_mask(dir / "auto" / "b.pgm", b);
    write_mask(dir / "auto" / "c.pgm", BinaryMask(64, 64));

    const auto rep = evaluate_borders(dir / "auto", dir / "manual");
    ASSERT_EQ(rep.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(rep.rows[0].error_pct, 0.0);
    EXPECT_DOUBLE_EQ(rep.rows[1].error_pct, 0.0);
    EXPECT_DOUBLE_EQ(rep.rows[2].error_pct, 100.0);

    fs::remove(dir / "auto" / "b.pgm");
    const auto missing = evaluate_borders(dir / "auto", dir / "manual");
    ASSERT_EQ(missing.rows.size(), 3u);
    EXPECT_DOUBLE_EQ(missing.rows[1].error_pct, 100.0);
    EXPECT_EQ(missing.warnings.size(), 1u);
}

TEST(Bench, ThreeMethodsWithSkippedImage) {
    const auto dir = scratch_dir("bench_methods");
    write_phantoms(dir, 3);
    fs::remove(dir / "masks" / "p_02.pgm");
    auto cfg = pipeline_config(dir / "images", dir / "out");
    cfg.io.mask_dir = (dir / "masks").string();
    const auto rep = bench_segmentation(cfg);
    ASSERT_EQ(rep.rows.size(), 2u);
    EXPECT_EQ(rep.warnings.size(), 1u);
    for (const auto& r : rep.rows) {
        EXPECT_LT(r.levelset, 10.0) << r.id;
        EXPECT_GE(r.growcut, 0.0);
        EXPECT_GE(r.meanshift, 0.0);
    }
    const auto table = rep.table();
    ASSERT_EQ(table.rows.size(), 4u);
    EXPECT_EQ(table.rows[2][0], "mean");
    EXPECT_EQ(table.rows[3][0], "stddev");
    const auto summary = rep.summary();
    EXPECT_NE(summary.find("Border Error"), std::string::npos);
}

TEST(Cli, PhantomAndStageCommands) {
    const auto dir = scratch_dir("cli_commands");
    ASSERT_EQ(run_cli("phantom --out " + dir.string() + " --shape blob --size 160 --radius 40 --seed 3 --hairs 2 --id one"), 0);
    const auto img = dir / "images" / "one.png";
    ASSERT_TRUE(fs::exists(img));
    ASSERT_TRUE(fs::exists(dir / "masks" / "one.pgm"));
    EXPECT_EQ(run_cli("preprocess --in " + img.string() + " --out " + (dir / "clean.png").string()), 0);
    EXPECT_EQ(run_cli("segment --in " + (dir / "clean.png").string() + " --out " + (dir / "seg.pgm").string()), 0);
    EXPECT_EQ(run_cli("features --in " + (dir / "clean.png").string() + " --mask " + (dir / "seg.pgm").string() +
                      " --id one --label malignant --out " + (dir / "f.csv").string()),
              0);
    const auto t = read_csv(dir / "f.csv");
    ASSERT_EQ(t.rows.size(), 1u);
    EXPECT_EQ(t.rows[0][0], "one");
    EXPECT_EQ(t.rows[0].back(), "malignant");
    EXPECT_LT(border_error(read_mask(dir / "seg.pgm"), read_mask(dir / "masks" / "one.pgm")), 10.0);
    EXPECT_EQ(run_cli("features --in " + img.string() + " --mask " + (dir / "missing.pgm").string()), 2);
    write_text(dir / "corrupt.pgm", "P5 garbage");
    EXPECT_EQ(run_cli("features --in " + img.string() + " --mask " + (dir / "corrupt.pgm").string()), 1);
}

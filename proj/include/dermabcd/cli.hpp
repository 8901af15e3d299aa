#pragma once

// Batch orchestration behind the dermabcd command-line tool: configuration,
// dataset ingestion, the per-image pipeline, segmentation benchmarking and
// the CSV/JSON artifacts they produce.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "dermabcd/classify.hpp"
#include "dermabcd/evaluate.hpp"
#include "dermabcd/features.hpp"
#include "dermabcd/preprocess.hpp"
#include "dermabcd/segment.hpp"

namespace dermabcd::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Invalid configuration or usage; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SegMethod { LevelSet, GrowCut, MeanShift };
std::string to_string(SegMethod m);
SegMethod parse_method(const std::string& name);

struct IoConfig {
    std::string input_dir;
    std::string output_dir;
    std::string mask_dir;
    std::string labels;
    std::string model;
};

struct PipelineConfig {
    bool hair_removal = true;
    HairDetectorParams hair;
    InpaintParams inpaint;
    SegMethod method = SegMethod::LevelSet;
    int working_size = 512;
    LevelSetParams levelset;
    int growcut_max_sweeps = 500;
    MeanShiftParams meanshift;
    FeatureConfig features;
    MlpConfig classifier;
    IoConfig io;
    int threads = 0;  ///< 0 = logical CPU count

    void validate() const;
};

nlohmann::json to_json(const PipelineConfig& cfg);
/// Keys missing from `doc` keep their defaults; unknown keys and type
/// mismatches throw ConfigError.
PipelineConfig config_from_json(const nlohmann::json& doc);
/// Applies `dotted.key=value`; the value is parsed as JSON when possible and
/// taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);
PipelineConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides);

std::uint64_t fnv1a64(std::string_view bytes);
/// FNV-1a over the canonical JSON of the fully defaulted config, 16 hex digits.
std::string config_hash(const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Labels and CSV
// ---------------------------------------------------------------------------

/// benign/malignant (or 0/1); nullopt for anything else.
std::optional<int> parse_label(const std::string& text);
std::string label_name(int label);

/// Shortest round-trip-safe decimal form used in every CSV.
std::string format_number(double v);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  ///< -1 when absent
};
/// Plain comma-separated text without quoting; ragged rows throw.
CsvTable read_csv(const std::filesystem::path& path);
std::string to_csv(const CsvTable& table);

struct FeatureRow {
    std::string id;
    FeatureVector features;
    std::optional<int> label;
};
std::vector<std::string> feature_csv_header(bool with_mm);
/// Rows sorted by id.
CsvTable features_table(std::vector<FeatureRow> rows, bool with_mm);

struct LabeledFeatures {
    std::vector<Record> records;
    std::vector<std::string> unlabeled_ids;
};
LabeledFeatures records_from_table(const CsvTable& table);

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

struct IngestItem {
    std::string id;
    std::filesystem::path image;
    std::optional<int> label;
};

struct IngestResult {
    std::vector<IngestItem> items;  ///< sorted by id
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, std::string>> errors;  ///< (id or file, reason)
    std::size_t labeled = 0;
    std::size_t unlabeled = 0;
};

/// PNG files in `dir` (ids = stems) joined with an optional `id,label` CSV.
IngestResult ingest(const std::filesystem::path& dir, const std::optional<std::filesystem::path>& labels);

// ---------------------------------------------------------------------------
// Per-image stages
// ---------------------------------------------------------------------------

struct SegmentStages {
    std::optional<RgbImage> rescaled;
    std::optional<GrayImage> gray;
    std::optional<BinaryMask> init;
    std::optional<BinaryMask> raw;  ///< method output before final cleanup
};

/// Runs the configured method on an already preprocessed image. GrowCut
/// uses `seeds` when given and threshold-derived seeds otherwise.
BinaryMask segment_lesion(const RgbImage& img, const PipelineConfig& cfg, const SeedMap* seeds = nullptr,
                          SegmentStages* stages = nullptr);
BinaryMask segment_lesion(const RgbImage& img, const PipelineConfig& cfg, SegMethod method);

// ---------------------------------------------------------------------------
// Pipeline
// ---------------------------------------------------------------------------

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct ImageStatus {
    std::string id;
    bool ok = true;
    std::string failed_stage;
    std::string reason;
    std::vector<StageTiming> timings;
    std::vector<std::string> outputs;  ///< relative to the output directory
};

struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string config_hash;
    std::vector<ImageStatus> images;  ///< sorted by id
    std::vector<std::string> outputs;  ///< run-level files
    std::vector<std::string> warnings;

    bool all_ok() const;
    nlohmann::json to_json() const;
};

struct PipelineOptions {
    bool dump_stages = false;
};

/// Every image in io.input_dir goes through hair removal, segmentation,
/// feature extraction and (with io.model) classification. Writes
/// features.csv, masks/<id>.pgm, predictions.csv and manifest.json under
/// io.output_dir. Failures are isolated per image.
RunManifest run_pipeline(const PipelineConfig& cfg, const PipelineOptions& options = {});

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

struct BenchRow {
    std::string id;
    double levelset = 0.0;
    double growcut = 0.0;
    double meanshift = 0.0;
};

struct BenchReport {
    std::vector<BenchRow> rows;
    MeanStd levelset;
    MeanStd growcut;
    MeanStd meanshift;
    std::vector<std::string> warnings;

    CsvTable table() const;
    /// One "Border Error" line in percent per method.
    std::string summary() const;
};

/// All three methods on every image of io.input_dir that has a manual mask
/// in io.mask_dir. A failing method scores 100%.
BenchReport bench_segmentation(const PipelineConfig& cfg);

struct BorderRow {
    std::string id;
    double error_pct = 0.0;
};

struct BorderReport {
    std::vector<BorderRow> rows;
    MeanStd summary;
    std::vector<std::string> warnings;

    CsvTable table() const;
};

/// Compares <id>.pgm masks of `auto_dir` against `manual_dir`. A missing
/// automatic mask scores 100%.
BorderReport evaluate_borders(const std::filesystem::path& auto_dir, const std::filesystem::path& manual_dir);

// ---------------------------------------------------------------------------
// Utilities
// ---------------------------------------------------------------------------

int resolve_threads(int requested);

/// Calls f(i) for i in [0, n) on a bounded pool of `threads` workers.
template <typename F>
void parallel_for(std::size_t n, int threads, F f) {
    const auto width = static_cast<std::size_t>(std::max(1, resolve_threads(threads)));
    if (width == 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            f(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(width, n); ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                f(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
}

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace dermabcd::cli

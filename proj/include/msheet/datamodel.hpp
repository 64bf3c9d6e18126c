#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace msheet {

enum class Optimizer { SGD, Adam };

std::string to_string(Optimizer opt);
Optimizer optimizer_from_string(const std::string& s);

// One point in hyperparameter x seed space. Equality over all six fields
// drives default-column sharing; the defaulted ordering (declaration order,
// seed last) is the tie-break order used by model selection.
struct RunConfig {
    double learning_rate = 0.1;
    int batch_size = 128;
    std::string augmentation = "jitter-a";
    Optimizer optimizer = Optimizer::SGD;
    std::string architecture = "mlp-small";
    std::uint64_t seed = 0;

    friend auto operator<=>(const RunConfig&, const RunConfig&) = default;
};

void validate(const RunConfig& run);

// Canonical one-line key, also used as the run directory name stem.
std::string config_key(const RunConfig& run);
std::string config_hash(const RunConfig& run);

// The five hyperparameter axes, by canonical name.
inline constexpr const char* kAxisLearningRate = "learning_rate";
inline constexpr const char* kAxisBatchSize = "batch_size";
inline constexpr const char* kAxisAugmentation = "augmentation";
inline constexpr const char* kAxisOptimizer = "optimizer";
inline constexpr const char* kAxisArchitecture = "architecture";

// Parses `value` and sets the named field. Throws ValidationError on an
// unknown axis name or an unparseable value.
void apply_axis_value(RunConfig& run, const std::string& axis, const std::string& value);

struct GridAxis {
    std::string name;
    std::vector<std::string> values;
};

// One-factor-at-a-time design: each axis varies alone against a shared
// default, crossed with every seed.
struct GridSpec {
    RunConfig default_config;  // seed field ignored
    std::vector<GridAxis> axes;
    std::vector<std::uint64_t> seeds;
};

void validate(const GridSpec& grid);

// Deduplicated { default } + { default with one axis changed }, per seed.
// Count = seeds * (1 + sum(|choices| - 1)) when value lists are unique.
std::vector<RunConfig> expand_grid(const GridSpec& grid);

struct PredictionRecord {
    std::string sample_id;
    std::vector<double> logits;
    int label = 0;
    std::map<std::string, std::string> groups;

    bool operator==(const PredictionRecord&) const = default;
};

struct PredictionSet {
    RunConfig run;
    std::string eval_set = "in-dist";
    std::vector<PredictionRecord> records;

    bool operator==(const PredictionSet&) const = default;
};

void validate(const PredictionSet& set);

// Line-delimited records; the run/eval_set context lives in the manifest,
// not the file, so the caller supplies it.
PredictionSet read_prediction_file(const std::filesystem::path& path, const RunConfig& run = {},
                                   const std::string& eval_set = "in-dist");
void write_prediction_file(const PredictionSet& set, const std::filesystem::path& path);

struct ScoreRecord {
    RunConfig run;
    std::string metric_id;
    double score = 0.0;  // percentage in [0, 100]

    bool operator==(const ScoreRecord&) const = default;
};

void validate(const ScoreRecord& record);

std::vector<ScoreRecord> read_score_file(const std::filesystem::path& path);
void write_score_file(std::span<const ScoreRecord> records, const std::filesystem::path& path);

// Per-run manifest: the six config keys plus eval_set -> prediction path.
struct RunManifest {
    RunConfig run;
    std::map<std::string, std::string> predictions;
};

RunManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

// Write-temp-then-rename; concurrent writers on distinct paths never interfere.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace msheet

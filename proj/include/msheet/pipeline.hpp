#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "msheet/datamodel.hpp"
#include "msheet/metrics.hpp"
#include "msheet/selection.hpp"
#include "msheet/sheets.hpp"
#include "msheet/synthdata.hpp"

namespace msheet {

// Evaluation set derived from the base dataset by a mean shift and a spread
// multiplier, keyed by its eval_set tag.
struct ShiftedSetSpec {
    std::vector<double> shift;
    double stddev_scale = 1.0;

    bool operator==(const ShiftedSetSpec&) const = default;
};

struct PipelineConfig {
    std::filesystem::path output_dir = "out";

    DatasetSpec dataset;  // geometry and skew; samples_per_class set per split
    int train_samples_per_class = 500;
    int eval_samples_per_class = 400;
    std::uint64_t eval_seed = 0;
    std::map<std::string, ShiftedSetSpec> shifted_sets;

    GridSpec grid;
    int epochs = 50;
    std::map<std::string, double> jitter_scales;

    std::vector<MetricSpec> metrics;

    std::vector<std::string> criteria;
    std::vector<double> k_values;
    std::vector<std::string> unforeseen;
};

void validate(const PipelineConfig& config);

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Deterministic dataset materialization: the training split uses
// dataset.seed, in-dist evaluation uses eval_seed, and each shifted set uses
// a stream derived from eval_seed and its tag.
LabeledDataset build_train_set(const PipelineConfig& config);
std::map<std::string, LabeledDataset> build_eval_sets(const PipelineConfig& config);

std::filesystem::path run_dir(const PipelineConfig& config, const RunConfig& run);
std::filesystem::path scores_path(const PipelineConfig& config);

struct TrainGridSummary {
    int trained = 0;
    int skipped = 0;
};

// One directory per grid run holding params, one prediction file per eval
// set, and a manifest written last as the completion record. Runs whose
// manifest already matches are skipped.
TrainGridSummary run_train_grid(const PipelineConfig& config, int jobs = 1);

// One ScoreRecord per (run, metric), in grid-expansion x config-metric order.
void run_eval(const PipelineConfig& config, int jobs = 1);

// Renders one sheet per metric id into sheets/<metric_id>.<ext>.
std::vector<std::filesystem::path> run_sheet(const PipelineConfig& config,
                                             const std::vector<std::string>& metric_ids,
                                             const std::vector<RenderFormat>& formats);

// Renders a bundled reference sheet into sheets/<fixture>.<ext>.
std::vector<std::filesystem::path> render_fixture_sheet(const std::filesystem::path& output_dir,
                                                        const std::string& fixture_name,
                                                        const std::vector<RenderFormat>& formats);

struct SelectSummary {
    bool any_empty = false;
    std::vector<std::filesystem::path> files;
};

// One text + one CSV report per configured k.
SelectSummary run_select(const PipelineConfig& config);

// Human summary of every sheet and selection report, for stdout.
std::string run_report(const PipelineConfig& config);

}  // namespace msheet

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "msheet/datamodel.hpp"

namespace msheet {

// Runs must rank in the best k% on every criterion metric to survive.
struct SelectionSpec {
    std::vector<std::string> criteria;
    double k = 100.0;
};

void validate(const SelectionSpec& spec);

// min/max/range over a score population; undefined (all zero) when count == 0.
struct ScoreStats {
    std::size_t count = 0;
    double min = 0.0;
    double max = 0.0;
    double range = 0.0;
};

struct MetricDistribution {
    std::string metric_id;
    ScoreStats before;
    ScoreStats after;
};

struct SelectionReport {
    std::vector<RunConfig> selected;  // sorted, unique
    std::vector<MetricDistribution> metrics;
    std::string after_label = "after";
};

// First ceil(k/100 * N) configs by descending score; ties broken by the
// RunConfig field order so the result is a deterministic set.
std::vector<RunConfig> top_k(std::span<const ScoreRecord> scores, double k);

// Intersection of per-criterion top_k sets; may be empty.
std::vector<RunConfig> intersect_selection(const SelectionSpec& spec,
                                           std::span<const ScoreRecord> all_scores);

// Before/after score distributions on metrics that played no part in selection.
SelectionReport unforeseen_report(std::span<const RunConfig> selected,
                                  std::span<const ScoreRecord> all_scores,
                                  std::span<const std::string> unforeseen_metric_ids);

std::string render_report_text(const SelectionReport& report);
std::string render_report_csv(const SelectionReport& report);

}  // namespace msheet

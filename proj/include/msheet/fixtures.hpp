#pragma once

#include <string>
#include <vector>

#include "msheet/datamodel.hpp"
#include "msheet/sheets.hpp"

namespace msheet {

// One bundled reference table set: transcribed two-decimal scores plus the
// printed aggregates they came with, for regression checks against
// build_sheet's own arithmetic.
struct Fixture {
    std::string name;
    std::string metric_id;
    std::string dataset;
    GridSpec grid;
    std::vector<ScoreRecord> scores;
    std::vector<std::vector<double>> printed_row_deltas;  // per table, per seed
    std::vector<std::vector<double>> printed_col_deltas;  // per table, per choice
    double printed_delta_max_all = 0.0;
    HeatmapConfig palette;
};

// Ten fixtures: {accuracy, fairness, robustness, privacy, security} for each
// of the two reference datasets.
std::vector<std::string> fixture_names();

Fixture load_fixture(const std::string& name);

}  // namespace msheet

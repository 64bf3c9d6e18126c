#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msheet/datamodel.hpp"
#include "msheet/matrix.hpp"

namespace msheet {

// max - min; the multiplicity aggregate every sheet annotation uses.
double delta_max(std::span<const double> values);

// One hyperparameter axis against every seed. Column 0 is the shared
// default configuration.
struct SheetTable {
    std::string axis_name;
    std::vector<std::string> choices;  // default first
    std::vector<std::uint64_t> seeds;
    Matrix cells;  // seeds x choices, full precision
    std::vector<double> row_deltas;
    std::vector<double> col_deltas;

    bool operator==(const SheetTable&) const = default;
};

struct MultiplicitySheet {
    std::string metric_id;
    std::string dataset;
    RunConfig default_config;  // seed field zero
    std::vector<SheetTable> tables;
    double delta_max_all = 0.0;

    bool operator==(const MultiplicitySheet&) const = default;
};

// Checks the delta identities and the shared default column.
void validate(const MultiplicitySheet& sheet);

MultiplicitySheet build_sheet(std::span<const ScoreRecord> scores, const GridSpec& grid,
                              const std::string& metric_id, const std::string& dataset = "");

struct Rgb {
    int r = 0, g = 0, b = 0;

    bool operator==(const Rgb&) const = default;
};

// Cell backgrounds blend white toward the endpoint color linearly across
// [raw_low, raw_high] for scores and [0, delta_cap] for deltas, clamped.
struct HeatmapConfig {
    double raw_low = 0.0;
    double raw_high = 100.0;
    double delta_cap = 100.0;
    Rgb raw_color{78, 123, 38};
    Rgb delta_color{64, 64, 64};

    bool operator==(const HeatmapConfig&) const = default;
};

// Ranges snapped outward from the sheet's own cells and deltas.
HeatmapConfig fit_palette(const MultiplicitySheet& sheet);

enum class RenderFormat { Text, Csv, Html };

RenderFormat render_format_from_string(const std::string& s);
std::string to_string(RenderFormat format);

// Rounded half-away-from-zero to two decimals; applied at render time only.
std::string format_round2(double value);

std::string render(const MultiplicitySheet& sheet, RenderFormat format,
                   const HeatmapConfig& palette = {});

}  // namespace msheet

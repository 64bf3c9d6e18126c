#include "msheet/sheets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "msheet/errors.hpp"

namespace msheet {

double delta_max(std::span<const double> values) {
    if (values.empty()) throw ValidationError("delta_max of an empty list");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

void validate(const MultiplicitySheet& sheet) {
    if (sheet.tables.empty()) throw ValidationError("sheet has no tables");
    double lo = sheet.tables[0].cells.data[0], hi = lo;
    for (const auto& table : sheet.tables) {
        const std::size_t rows = table.seeds.size(), cols = table.choices.size();
        if (table.cells.rows != rows || table.cells.cols != cols ||
            table.row_deltas.size() != rows || table.col_deltas.size() != cols)
            throw ValidationError("table \"" + table.axis_name + "\" has inconsistent shape");
        if (table.seeds != sheet.tables[0].seeds)
            throw ValidationError("tables disagree on the seed list");
        for (std::size_t i = 0; i < rows; ++i) {
            if (table.row_deltas[i] != delta_max(table.cells.row(i)))
                throw ValidationError("row delta mismatch in \"" + table.axis_name + "\"");
            if (table.cells.at(i, 0) != sheet.tables[0].cells.at(i, 0))
                throw ValidationError("default column differs between tables");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            std::vector<double> col(rows);
            for (std::size_t i = 0; i < rows; ++i) col[i] = table.cells.at(i, j);
            if (table.col_deltas[j] != delta_max(col))
                throw ValidationError("column delta mismatch in \"" + table.axis_name + "\"");
        }
        for (double v : table.cells.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    if (sheet.delta_max_all != hi - lo)
        throw ValidationError("delta_max_all does not equal the cell range");
}

MultiplicitySheet build_sheet(std::span<const ScoreRecord> scores, const GridSpec& grid,
                              const std::string& metric_id, const std::string& dataset) {
    validate(grid);
    if (metric_id.empty()) throw ValidationError("metric_id must be non-empty");

    std::map<std::string, double> by_config;
    for (const auto& record : scores) {
        if (record.metric_id != metric_id) continue;
        auto [it, inserted] = by_config.emplace(config_key(record.run), record.score);
        if (!inserted)
            throw DataError("duplicate score for " + config_key(record.run) + " on \"" +
                            metric_id + "\"");
    }
    auto lookup = [&](const RunConfig& run) {
        auto it = by_config.find(config_key(run));
        if (it == by_config.end())
            throw DataError("no score for " + config_key(run) + " on \"" + metric_id + "\"");
        return it->second;
    };

    MultiplicitySheet sheet;
    sheet.metric_id = metric_id;
    sheet.dataset = dataset;
    sheet.default_config = grid.default_config;
    sheet.default_config.seed = 0;

    double lo = 0.0, hi = 0.0;
    bool first_cell = true;
    for (const auto& axis : grid.axes) {
        SheetTable table;
        table.axis_name = axis.name;
        table.seeds = grid.seeds;
        // default choice first, remaining choices in grid order
        for (const auto& value : axis.values) {
            RunConfig probe = grid.default_config;
            apply_axis_value(probe, axis.name, value);
            if (probe == grid.default_config) table.choices.insert(table.choices.begin(), value);
            else table.choices.push_back(value);
        }
        table.cells = Matrix(grid.seeds.size(), table.choices.size());
        for (std::size_t i = 0; i < grid.seeds.size(); ++i) {
            for (std::size_t j = 0; j < table.choices.size(); ++j) {
                RunConfig run = grid.default_config;
                run.seed = grid.seeds[i];
                apply_axis_value(run, axis.name, table.choices[j]);
                const double score = lookup(run);
                table.cells.at(i, j) = score;
                lo = first_cell ? score : std::min(lo, score);
                hi = first_cell ? score : std::max(hi, score);
                first_cell = false;
            }
            table.row_deltas.push_back(delta_max(table.cells.row(i)));
        }
        for (std::size_t j = 0; j < table.choices.size(); ++j) {
            std::vector<double> col(grid.seeds.size());
            for (std::size_t i = 0; i < col.size(); ++i) col[i] = table.cells.at(i, j);
            table.col_deltas.push_back(delta_max(col));
        }
        sheet.tables.push_back(std::move(table));
    }
    sheet.delta_max_all = hi - lo;
    validate(sheet);
    return sheet;
}

HeatmapConfig fit_palette(const MultiplicitySheet& sheet) {
    validate(sheet);
    double lo = sheet.tables[0].cells.data[0], hi = lo, dmax = 0.0;
    for (const auto& table : sheet.tables) {
        for (double v : table.cells.data) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        for (double d : table.row_deltas) dmax = std::max(dmax, d);
        for (double d : table.col_deltas) dmax = std::max(dmax, d);
    }
    HeatmapConfig palette;
    palette.raw_low = std::floor(lo);
    palette.raw_high = std::ceil(hi);
    if (palette.raw_high == palette.raw_low) palette.raw_high = palette.raw_low + 1.0;
    palette.delta_cap = std::max(1.0, std::ceil(dmax));
    return palette;
}

RenderFormat render_format_from_string(const std::string& s) {
    if (s == "text") return RenderFormat::Text;
    if (s == "csv") return RenderFormat::Csv;
    if (s == "html") return RenderFormat::Html;
    throw ValidationError("unknown render format \"" + s + "\" (expected text, csv, or html)");
}

std::string to_string(RenderFormat format) {
    switch (format) {
        case RenderFormat::Text: return "text";
        case RenderFormat::Csv: return "csv";
        case RenderFormat::Html: return "html";
    }
    throw ValidationError("unknown render format enum value");
}

std::string format_round2(double value) {
    const long long cents = std::llround(value * 100.0);
    const long long mag = cents < 0 ? -cents : cents;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents < 0 ? "-" : "", mag / 100, mag % 100);
    return buf;
}

namespace {

std::string describe_default(const MultiplicitySheet& sheet) {
    std::string out;
    for (const auto& table : sheet.tables) {
        if (!out.empty()) out += "  ";
        out += table.axis_name + "=" + table.choices[0];
    }
    return out;
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string render_text(const MultiplicitySheet& sheet) {
    std::string out = "metric: " + sheet.metric_id + "\n";
    if (!sheet.dataset.empty()) out += "dataset: " + sheet.dataset + "\n";
    out += "default: " + describe_default(sheet) + "\n";
    constexpr std::size_t w = 10;
    for (const auto& table : sheet.tables) {
        out += "\n[" + table.axis_name + "]\n";
        out += pad_left("seed", w);
        for (const auto& choice : table.choices) out += pad_left(choice, w);
        out += pad_left("d_max", w);
        out += '\n';
        for (std::size_t i = 0; i < table.seeds.size(); ++i) {
            out += pad_left(std::to_string(table.seeds[i]), w);
            for (std::size_t j = 0; j < table.choices.size(); ++j)
                out += pad_left(format_round2(table.cells.at(i, j)), w);
            out += pad_left(format_round2(table.row_deltas[i]), w);
            out += '\n';
        }
        out += pad_left("d_max", w);
        for (double d : table.col_deltas) out += pad_left(format_round2(d), w);
        out += '\n';
    }
    out += "\ndelta_max_all: " + format_round2(sheet.delta_max_all) + "\n";
    return out;
}

std::string render_csv(const MultiplicitySheet& sheet) {
    std::string out;
    for (const auto& table : sheet.tables) {
        out += table.axis_name;
        for (const auto& choice : table.choices) out += "," + choice;
        out += ",delta_max\n";
        for (std::size_t i = 0; i < table.seeds.size(); ++i) {
            out += std::to_string(table.seeds[i]);
            for (std::size_t j = 0; j < table.choices.size(); ++j)
                out += "," + format_round2(table.cells.at(i, j));
            out += "," + format_round2(table.row_deltas[i]) + "\n";
        }
        out += "delta_max";
        for (double d : table.col_deltas) out += "," + format_round2(d);
        out += "\n\n";
    }
    out += "delta_max_all," + format_round2(sheet.delta_max_all) + "\n";
    return out;
}

std::string css_blend(const Rgb& color, double t) {
    t = std::clamp(t, 0.0, 1.0);
    auto mix = [t](int c) { return static_cast<int>(std::lround(255.0 + (c - 255.0) * t)); };
    char buf[32];
    std::snprintf(buf, sizeof buf, "rgb(%d,%d,%d)", mix(color.r), mix(color.g), mix(color.b));
    return buf;
}

std::string render_html(const MultiplicitySheet& sheet, const HeatmapConfig& palette) {
    const double raw_span = palette.raw_high - palette.raw_low;
    auto raw_style = [&](double v) {
        return css_blend(palette.raw_color, (v - palette.raw_low) / raw_span);
    };
    auto delta_style = [&](double d) {
        return css_blend(palette.delta_color, d / palette.delta_cap);
    };
    std::string out =
        "<!doctype html>\n<html><head><meta charset=\"utf-8\"><title>" + sheet.metric_id +
        "</title>\n<style>\n"
        "body{font-family:sans-serif;margin:1.5rem;}\n"
        "table{border-collapse:collapse;margin:0.75rem 0;}\n"
        "td,th{border:1px solid #999;padding:0.25rem 0.6rem;text-align:right;}\n"
        "th{background:#eee;}\n"
        "</style></head><body>\n";
    out += "<h1>" + sheet.metric_id + "</h1>\n";
    if (!sheet.dataset.empty()) out += "<p>dataset: " + sheet.dataset + "</p>\n";
    out += "<p>default: " + describe_default(sheet) + "</p>\n";
    for (const auto& table : sheet.tables) {
        out += "<h2>" + table.axis_name + "</h2>\n<table>\n<tr><th>seed</th>";
        for (const auto& choice : table.choices) out += "<th>" + choice + "</th>";
        out += "<th>d_max</th></tr>\n";
        for (std::size_t i = 0; i < table.seeds.size(); ++i) {
            out += "<tr><th>" + std::to_string(table.seeds[i]) + "</th>";
            for (std::size_t j = 0; j < table.choices.size(); ++j) {
                const double v = table.cells.at(i, j);
                out += "<td style=\"background:" + raw_style(v) + "\">" + format_round2(v) +
                       "</td>";
            }
            out += "<td style=\"background:" + delta_style(table.row_deltas[i]) + "\">" +
                   format_round2(table.row_deltas[i]) + "</td></tr>\n";
        }
        out += "<tr><th>d_max</th>";
        for (double d : table.col_deltas)
            out += "<td style=\"background:" + delta_style(d) + "\">" + format_round2(d) + "</td>";
        out += "<td></td></tr>\n</table>\n";
    }
    out += "<p>delta_max_all: <b>" + format_round2(sheet.delta_max_all) + "</b></p>\n";
    out += "</body></html>\n";
    return out;
}

}  // namespace

std::string render(const MultiplicitySheet& sheet, RenderFormat format,
                   const HeatmapConfig& palette) {
    validate(sheet);
    switch (format) {
        case RenderFormat::Text: return render_text(sheet);
        case RenderFormat::Csv: return render_csv(sheet);
        case RenderFormat::Html: return render_html(sheet, palette);
    }
    throw ValidationError("unknown render format enum value");
}

}  // namespace msheet

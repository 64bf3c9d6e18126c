#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "msheet/errors.hpp"
#include "msheet/fixtures.hpp"
#include "msheet/pipeline.hpp"

namespace {

using namespace msheet;

constexpr int kExitValidation = 1;
constexpr int kExitData = 2;
constexpr int kExitEmptySelection = 3;

struct GlobalOptions {
    std::string config_path = "configs/default.json";
    std::string out_override;
    int jobs = 1;
    std::optional<std::uint64_t> seed_override;
};

PipelineConfig load_config(const GlobalOptions& opts) {
    PipelineConfig config = load_pipeline_config(opts.config_path);
    if (!opts.out_override.empty()) config.output_dir = opts.out_override;
    if (opts.seed_override) {
        config.grid.seeds = {*opts.seed_override};
        validate(config);
    }
    return config;
}

std::vector<RenderFormat> parse_formats(const std::string& list) {
    std::vector<RenderFormat> formats;
    std::size_t start = 0;
    while (start <= list.size()) {
        const std::size_t comma = list.find(',', start);
        const std::string token =
            list.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (!token.empty()) formats.push_back(render_format_from_string(token));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (formats.empty()) throw ValidationError("--format needs at least one of text, csv, html");
    return formats;
}

int dispatch(const std::string& command, const GlobalOptions& opts,
             const std::vector<std::string>& sheet_metrics, const std::string& sheet_fixture,
             const std::string& sheet_formats) {
    if (command == "fixtures-list") {
        for (const auto& name : fixture_names()) {
            Fixture fx = load_fixture(name);
            std::printf("%-22s %-16s %-20s delta_max_all %s\n", fx.name.c_str(),
                        fx.dataset.c_str(), fx.metric_id.c_str(),
                        format_round2(fx.printed_delta_max_all).c_str());
        }
        return 0;
    }
    if (command == "sheet" && !sheet_fixture.empty()) {
        const std::filesystem::path out =
            opts.out_override.empty() ? std::filesystem::path("out")
                                      : std::filesystem::path(opts.out_override);
        for (const auto& file :
             render_fixture_sheet(out, sheet_fixture, parse_formats(sheet_formats)))
            std::printf("wrote %s\n", file.string().c_str());
        return 0;
    }

    PipelineConfig config = load_config(opts);
    if (command == "train-grid") {
        TrainGridSummary summary = run_train_grid(config, opts.jobs);
        std::printf("trained %d run(s), skipped %d already-complete run(s)\n", summary.trained,
                    summary.skipped);
        return 0;
    }
    if (command == "eval") {
        run_eval(config, opts.jobs);
        std::printf("wrote %s\n", scores_path(config).string().c_str());
        return 0;
    }
    if (command == "sheet") {
        for (const auto& file :
             run_sheet(config, sheet_metrics, parse_formats(sheet_formats)))
            std::printf("wrote %s\n", file.string().c_str());
        return 0;
    }
    if (command == "select") {
        SelectSummary summary = run_select(config);
        for (const auto& file : summary.files)
            std::printf("wrote %s\n", file.string().c_str());
        if (summary.any_empty) {
            std::fprintf(stderr, "selection is empty for at least one k\n");
            return kExitEmptySelection;
        }
        return 0;
    }
    if (command == "report") {
        std::fputs(run_report(config).c_str(), stdout);
        return 0;
    }
    throw ValidationError("unknown command " + command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"accuracy-under-intervention multiplicity sheets and model selection"};
    app.require_subcommand(1);

    GlobalOptions opts;
    std::uint64_t seed_value = 0;
    auto* seed_opt = app.add_option("--seed-override", seed_value,
                                    "replace the grid seed list with this single seed");
    app.add_option("--config", opts.config_path, "pipeline config file")
        ->capture_default_str();
    app.add_option("--out", opts.out_override, "output directory override");
    app.add_option("--jobs", opts.jobs, "parallel workers")->capture_default_str();

    app.add_subcommand("train-grid", "train every grid run and store its artifacts");
    app.add_subcommand("eval", "score every trained run on every metric");

    auto* sheet = app.add_subcommand("sheet", "build multiplicity sheets from scores");
    std::vector<std::string> sheet_metrics;
    std::string sheet_fixture;
    std::string sheet_formats = "text";
    sheet->add_option("--metric", sheet_metrics, "metric id(s); default: all configured");
    sheet->add_option("--fixture", sheet_fixture, "render a bundled reference sheet instead");
    sheet->add_option("--format", sheet_formats, "comma-separated: text,csv,html")
        ->capture_default_str();

    app.add_subcommand("select", "intersect top-k% runs and report unforeseen metrics");
    app.add_subcommand("report", "print all sheets and selection reports");

    auto* fixtures = app.add_subcommand("fixtures", "bundled reference tables");
    fixtures->add_subcommand("list", "list fixture names");
    fixtures->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    if (seed_opt->count() > 0) opts.seed_override = seed_value;

    std::string command;
    for (auto* sub : app.get_subcommands()) {
        command = sub->get_name();
        if (command == "fixtures") command = "fixtures-list";
    }

    try {
        return dispatch(command, opts, sheet_metrics, sheet_fixture, sheet_formats);
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
}

#include "msheet/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "msheet/attacks.hpp"
#include "msheet/errors.hpp"
#include "msheet/fixtures.hpp"
#include "msheet/rng.hpp"
#include "msheet/toymodel.hpp"

namespace msheet {

using nlohmann::json;

namespace {

// ---- config parsing -------------------------------------------------------

const json& member(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.is_object()) throw ValidationError("config: " + where + " must be an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError("config: " + where + "." + key + " is missing");
    return *it;
}

double get_number(const json& obj, const std::string& key, const std::string& where) {
    const json& v = member(obj, key, where);
    if (!v.is_number()) throw ValidationError("config: " + where + "." + key + " must be a number");
    return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& where) {
    const json& v = member(obj, key, where);
    if (!v.is_number_integer())
        throw ValidationError("config: " + where + "." + key + " must be an integer");
    return v.get<int>();
}

std::uint64_t get_u64(const json& obj, const std::string& key, const std::string& where) {
    const json& v = member(obj, key, where);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw ValidationError("config: " + where + "." + key + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& where) {
    const json& v = member(obj, key, where);
    if (!v.is_string()) throw ValidationError("config: " + where + "." + key + " must be a string");
    return v.get<std::string>();
}

std::vector<double> get_double_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ValidationError("config: " + where + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ValidationError("config: " + where + " must contain only numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<std::string> get_string_list(const json& v, const std::string& where) {
    if (!v.is_array()) throw ValidationError("config: " + where + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& x : v) {
        if (!x.is_string()) throw ValidationError("config: " + where + " must contain only strings");
        out.push_back(x.get<std::string>());
    }
    return out;
}

DatasetSpec parse_dataset(const json& d, PipelineConfig& config) {
    DatasetSpec spec;
    spec.num_classes = get_int(d, "num_classes", "dataset");
    spec.input_dim = get_int(d, "input_dim", "dataset");
    spec.cluster_stddev = get_number(d, "cluster_stddev", "dataset");
    const json& means = member(d, "class_means", "dataset");
    if (!means.is_array())
        throw ValidationError("config: dataset.class_means must be an array of arrays");
    for (std::size_t i = 0; i < means.size(); ++i)
        spec.class_means.push_back(
            get_double_list(means[i], "dataset.class_means[" + std::to_string(i) + "]"));
    spec.skew_attribute = get_string(d, "skew_attribute", "dataset");
    spec.skew_ratio = get_number(d, "skew_ratio", "dataset");
    spec.style_offset = get_double_list(member(d, "style_offset", "dataset"), "dataset.style_offset");
    if (d.contains("extra_attributes")) {
        const json& extras = d["extra_attributes"];
        if (!extras.is_object())
            throw ValidationError("config: dataset.extra_attributes must be an object");
        for (const auto& [name, probs] : extras.items()) {
            if (!probs.is_object())
                throw ValidationError("config: dataset.extra_attributes." + name +
                                      " must map categories to probabilities");
            CategoricalSpec cat;
            for (const auto& [category, p] : probs.items()) {
                if (!p.is_number())
                    throw ValidationError("config: dataset.extra_attributes." + name + "." +
                                          category + " must be a number");
                cat.probabilities[category] = p.get<double>();
            }
            spec.extra_attributes[name] = cat;
        }
    }
    spec.seed = get_u64(d, "seed", "dataset");
    config.eval_seed = get_u64(d, "eval_seed", "dataset");
    config.train_samples_per_class = get_int(d, "train_samples_per_class", "dataset");
    config.eval_samples_per_class = get_int(d, "eval_samples_per_class", "dataset");
    if (d.contains("shifted")) {
        const json& shifted = d["shifted"];
        if (!shifted.is_object())
            throw ValidationError("config: dataset.shifted must map eval_set tags to shift specs");
        for (const auto& [tag, body] : shifted.items()) {
            ShiftedSetSpec s;
            s.shift = get_double_list(member(body, "shift", "dataset.shifted." + tag),
                                      "dataset.shifted." + tag + ".shift");
            s.stddev_scale = get_number(body, "stddev_scale", "dataset.shifted." + tag);
            config.shifted_sets[tag] = s;
        }
    }
    return spec;
}

GridSpec parse_grid(const json& g) {
    GridSpec grid;
    const json& def = member(g, "default", "grid");
    grid.default_config.learning_rate = get_number(def, "learning_rate", "grid.default");
    grid.default_config.batch_size = get_int(def, "batch_size", "grid.default");
    grid.default_config.augmentation = get_string(def, "augmentation", "grid.default");
    grid.default_config.optimizer =
        optimizer_from_string(get_string(def, "optimizer", "grid.default"));
    grid.default_config.architecture = get_string(def, "architecture", "grid.default");
    const json& axes = member(g, "axes", "grid");
    if (!axes.is_array()) throw ValidationError("config: grid.axes must be an array");
    for (std::size_t i = 0; i < axes.size(); ++i) {
        const std::string where = "grid.axes[" + std::to_string(i) + "]";
        GridAxis axis;
        axis.name = get_string(axes[i], "name", where);
        axis.values = get_string_list(member(axes[i], "values", where), where + ".values");
        grid.axes.push_back(axis);
    }
    const json& seeds = member(g, "seeds", "grid");
    if (!seeds.is_array()) throw ValidationError("config: grid.seeds must be an array");
    for (const auto& s : seeds) {
        if (!s.is_number_integer() || s.get<long long>() < 0)
            throw ValidationError("config: grid.seeds must contain non-negative integers");
        grid.seeds.push_back(s.get<std::uint64_t>());
    }
    return grid;
}

MetricSpec parse_metric(const json& m, std::size_t index) {
    const std::string where = "metrics[" + std::to_string(index) + "]";
    MetricSpec spec;
    spec.metric_id = get_string(m, "metric_id", where);
    spec.kind = metric_kind_from_string(get_string(m, "kind", where));
    if (m.contains("eval_set")) spec.eval_set = get_string(m, "eval_set", where);
    if (m.contains("group_filter")) {
        const json& filter = m["group_filter"];
        if (!filter.is_array())
            throw ValidationError("config: " + where + ".group_filter must be an array of pairs");
        for (const auto& pair : filter) {
            if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() ||
                !pair[1].is_string())
                throw ValidationError("config: " + where +
                                      ".group_filter entries must be [attribute, value] pairs");
            spec.group_filter.emplace_back(pair[0].get<std::string>(), pair[1].get<std::string>());
        }
    }
    switch (spec.kind) {
        case MetricKind::OutputNoise:
        case MetricKind::InputNoise: {
            NoiseSpec noise;
            noise.lam = get_number(m, "lambda", where);
            if (m.contains("repetitions")) noise.repetitions = get_int(m, "repetitions", where);
            if (m.contains("seed")) noise.seed = get_u64(m, "seed", where);
            noise.target = spec.kind == MetricKind::OutputNoise ? NoiseTarget::OutputLogits
                                                                : NoiseTarget::InputFeatures;
            spec.noise = noise;
            break;
        }
        case MetricKind::Pgd: {
            AttackSpec attack = pgd_spec(get_number(m, "delta", where));
            if (m.contains("steps")) attack.steps = get_int(m, "steps", where);
            if (m.contains("step_size")) attack.step_size = get_number(m, "step_size", where);
            if (m.contains("random_start")) {
                if (!m["random_start"].is_boolean())
                    throw ValidationError("config: " + where + ".random_start must be a boolean");
                attack.random_start = m["random_start"].get<bool>();
            }
            if (m.contains("seed")) attack.seed = get_u64(m, "seed", where);
            spec.attack = attack;
            break;
        }
        default: break;
    }
    try {
        validate(spec);
    } catch (const ValidationError& e) {
        throw ValidationError("config: " + where + " (" + spec.metric_id + "): " + e.what());
    }
    return spec;
}

// ---- shared helpers -------------------------------------------------------

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kParamsFile = "params.txt";

std::string preds_filename(const std::string& eval_set) { return "preds-" + eval_set + ".jsonl"; }

bool filename_safe(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
            return false;
    return true;
}

// Index-chunked worker pool; rethrows the first failure after joining.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs < 1) throw ValidationError("jobs must be at least 1");
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::vector<std::string> metric_ids(const PipelineConfig& config) {
    std::vector<std::string> ids;
    for (const auto& m : config.metrics) ids.push_back(m.metric_id);
    return ids;
}

const MetricSpec& find_metric(const PipelineConfig& config, const std::string& metric_id) {
    for (const auto& m : config.metrics)
        if (m.metric_id == metric_id) return m;
    std::string available;
    for (const auto& m : config.metrics) {
        if (!available.empty()) available += ", ";
        available += m.metric_id;
    }
    throw ValidationError("unknown metric_id " + metric_id + "; available: " + available);
}

// Completion record check: a run counts as done only if its manifest parses,
// names this exact config, and every referenced artifact is still on disk.
bool run_is_complete(const std::filesystem::path& dir, const RunConfig& run,
                     const std::vector<std::string>& eval_set_tags) {
    const auto manifest_path = dir / kManifestFile;
    if (!std::filesystem::exists(manifest_path)) return false;
    RunManifest manifest = read_manifest(manifest_path);
    if (config_key(manifest.run) != config_key(run))
        throw DataError("run directory " + dir.string() + " holds a manifest for " +
                        config_key(manifest.run) + ", expected " + config_key(run));
    std::set<std::string> tags(eval_set_tags.begin(), eval_set_tags.end());
    std::set<std::string> manifest_tags;
    for (const auto& [tag, file] : manifest.predictions) manifest_tags.insert(tag);
    if (manifest_tags != tags)
        throw DataError("run " + config_key(run) + " was trained with different eval sets; " +
                        "delete " + dir.string() + " to retrain");
    for (const auto& [tag, file] : manifest.predictions)
        if (!std::filesystem::exists(dir / file))
            throw DataError("run " + config_key(run) + " is missing " + (dir / file).string() +
                            "; delete the run directory to retrain");
    if (!std::filesystem::exists(dir / kParamsFile))
        throw DataError("run " + config_key(run) + " is missing " + (dir / kParamsFile).string() +
                        "; delete the run directory to retrain");
    return true;
}

}  // namespace

// ---- config ----------------------------------------------------------------

void validate(const PipelineConfig& config) {
    if (config.output_dir.empty()) throw ValidationError("config: output_dir must be non-empty");
    if (config.train_samples_per_class < 1)
        throw ValidationError("config: dataset.train_samples_per_class must be positive");
    if (config.eval_samples_per_class < 1)
        throw ValidationError("config: dataset.eval_samples_per_class must be positive");

    DatasetSpec probe = config.dataset;
    probe.samples_per_class = config.train_samples_per_class;
    try {
        validate(probe);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config: dataset: ") + e.what());
    }

    for (const auto& [tag, spec] : config.shifted_sets) {
        if (!filename_safe(tag) || tag == "in-dist")
            throw ValidationError("config: dataset.shifted tag '" + tag +
                                  "' must be a fresh filename-safe eval_set name");
        if (spec.shift.size() != static_cast<std::size_t>(config.dataset.input_dim))
            throw ValidationError("config: dataset.shifted." + tag + ".shift needs " +
                                  std::to_string(config.dataset.input_dim) + " values");
        if (!(spec.stddev_scale > 0.0))
            throw ValidationError("config: dataset.shifted." + tag +
                                  ".stddev_scale must be positive");
    }

    try {
        validate(config.grid);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("config: grid: ") + e.what());
    }

    if (config.epochs < 1) throw ValidationError("config: train.epochs must be positive");
    for (const auto& [tag, scale] : config.jitter_scales)
        if (scale < 0.0)
            throw ValidationError("config: train.jitter_scales." + tag + " must be >= 0");

    // Fail fast on augmentation tags train() would reject later.
    std::set<std::string> augmentations{config.grid.default_config.augmentation};
    for (const auto& axis : config.grid.axes)
        if (axis.name == kAxisAugmentation)
            augmentations.insert(axis.values.begin(), axis.values.end());
    for (const auto& tag : augmentations)
        if (!config.jitter_scales.count(tag))
            throw ValidationError("config: train.jitter_scales has no entry for augmentation '" +
                                  tag + "'");

    if (config.metrics.empty()) throw ValidationError("config: metrics must be non-empty");
    std::set<std::string> ids;
    for (const auto& metric : config.metrics) {
        if (!filename_safe(metric.metric_id))
            throw ValidationError("config: metric_id '" + metric.metric_id +
                                  "' must be filename-safe");
        if (!ids.insert(metric.metric_id).second)
            throw ValidationError("config: duplicate metric_id " + metric.metric_id);
        if (metric.eval_set != "in-dist" && !config.shifted_sets.count(metric.eval_set))
            throw ValidationError("config: metric " + metric.metric_id +
                                  " references unknown eval_set " + metric.eval_set);
    }

    for (const auto& id : config.criteria)
        if (!ids.count(id))
            throw ValidationError("config: selection criterion " + id + " is not a configured metric");
    for (const auto& id : config.unforeseen)
        if (!ids.count(id))
            throw ValidationError("config: unforeseen metric " + id + " is not a configured metric");
    for (double k : config.k_values)
        if (!(k > 0.0) || k > 100.0)
            throw ValidationError("config: selection.k_values must lie in (0, 100]");
    if (!config.criteria.empty()) {
        SelectionSpec spec{config.criteria, config.k_values.empty() ? 100.0 : config.k_values[0]};
        try {
            validate(spec);
        } catch (const ValidationError& e) {
            throw ValidationError(std::string("config: selection: ") + e.what());
        }
    }
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    json root;
    try {
        root = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError("config " + path.string() + ": " + e.what());
    }
    PipelineConfig config;
    config.output_dir = get_string(root, "output_dir", "(root)");
    config.dataset = parse_dataset(member(root, "dataset", "(root)"), config);
    config.grid = parse_grid(member(root, "grid", "(root)"));
    const json& train = member(root, "train", "(root)");
    config.epochs = get_int(train, "epochs", "train");
    const json& scales = member(train, "jitter_scales", "train");
    if (!scales.is_object())
        throw ValidationError("config: train.jitter_scales must map tags to scales");
    for (const auto& [tag, scale] : scales.items()) {
        if (!scale.is_number())
            throw ValidationError("config: train.jitter_scales." + tag + " must be a number");
        config.jitter_scales[tag] = scale.get<double>();
    }
    const json& metrics = member(root, "metrics", "(root)");
    if (!metrics.is_array()) throw ValidationError("config: metrics must be an array");
    for (std::size_t i = 0; i < metrics.size(); ++i)
        config.metrics.push_back(parse_metric(metrics[i], i));
    if (root.contains("selection")) {
        const json& sel = root["selection"];
        config.criteria = get_string_list(member(sel, "criteria", "selection"), "selection.criteria");
        for (double k : get_double_list(member(sel, "k_values", "selection"), "selection.k_values"))
            config.k_values.push_back(k);
        config.unforeseen =
            get_string_list(member(sel, "unforeseen", "selection"), "selection.unforeseen");
    }
    validate(config);
    return config;
}

// ---- datasets ---------------------------------------------------------------

LabeledDataset build_train_set(const PipelineConfig& config) {
    DatasetSpec spec = config.dataset;
    spec.samples_per_class = config.train_samples_per_class;
    return generate_skewed(spec, "train");
}

std::map<std::string, LabeledDataset> build_eval_sets(const PipelineConfig& config) {
    std::map<std::string, LabeledDataset> sets;
    DatasetSpec spec = config.dataset;
    spec.samples_per_class = config.eval_samples_per_class;
    spec.seed = config.eval_seed;
    sets.emplace("in-dist", generate_skewed(spec, "in-dist"));
    for (const auto& [tag, shifted] : config.shifted_sets) {
        DatasetSpec variant = spec;
        variant.seed = derive_seed(config.eval_seed, hash_str(tag));
        sets.emplace(tag, generate_shifted(variant, shifted.shift, shifted.stddev_scale, tag));
    }
    return sets;
}

// ---- filesystem layout ------------------------------------------------------

std::filesystem::path run_dir(const PipelineConfig& config, const RunConfig& run) {
    return config.output_dir / "runs" / config_hash(run);
}

std::filesystem::path scores_path(const PipelineConfig& config) {
    return config.output_dir / "scores.jsonl";
}

// ---- train-grid -------------------------------------------------------------

TrainGridSummary run_train_grid(const PipelineConfig& config, int jobs) {
    validate(config);
    const std::vector<RunConfig> runs = expand_grid(config.grid);
    const LabeledDataset train_set = build_train_set(config);
    const std::map<std::string, LabeledDataset> eval_sets = build_eval_sets(config);
    std::vector<std::string> tags;
    for (const auto& [tag, data] : eval_sets) tags.push_back(tag);

    TrainGridSummary summary;
    std::mutex summary_mutex;
    parallel_for(runs.size(), jobs, [&](std::size_t i) {
        const RunConfig& run = runs[i];
        const auto dir = run_dir(config, run);
        if (run_is_complete(dir, run, tags)) {
            std::lock_guard<std::mutex> lock(summary_mutex);
            ++summary.skipped;
            return;
        }

        TrainSpec spec{run, config.epochs, config.jitter_scales};
        TrainResult result = train(spec, train_set);

        std::filesystem::create_directories(dir);
        save_params(result.params, dir / kParamsFile);
        RunManifest manifest;
        manifest.run = run;
        for (const auto& [tag, data] : eval_sets) {
            PredictionSet preds = predict(result.params, data, run);
            write_prediction_file(preds, dir / preds_filename(tag));
            manifest.predictions[tag] = preds_filename(tag);
        }
        write_manifest(manifest, dir / kManifestFile);

        std::lock_guard<std::mutex> lock(summary_mutex);
        ++summary.trained;
    });
    return summary;
}

// ---- eval --------------------------------------------------------------------

void run_eval(const PipelineConfig& config, int jobs) {
    validate(config);
    const std::vector<RunConfig> runs = expand_grid(config.grid);
    const std::map<std::string, LabeledDataset> eval_sets = build_eval_sets(config);
    const bool model_needed =
        std::any_of(config.metrics.begin(), config.metrics.end(),
                    [](const MetricSpec& m) { return needs_model(m.kind); });

    std::vector<std::vector<ScoreRecord>> per_run(runs.size());
    parallel_for(runs.size(), jobs, [&](std::size_t i) {
        const RunConfig& run = runs[i];
        const auto dir = run_dir(config, run);
        if (!std::filesystem::exists(dir / kManifestFile))
            throw DataError("run " + config_key(run) + " has no manifest at " +
                            (dir / kManifestFile).string() + "; run train-grid first");
        RunManifest manifest = read_manifest(dir / kManifestFile);
        if (config_key(manifest.run) != config_key(run))
            throw DataError("run directory " + dir.string() + " holds a manifest for " +
                            config_key(manifest.run) + ", expected " + config_key(run));

        RunArtifacts artifacts;
        artifacts.run = run;
        artifacts.datasets = eval_sets;
        for (const auto& [tag, file] : manifest.predictions) {
            if (!std::filesystem::exists(dir / file))
                throw DataError("run " + config_key(run) + " is missing " + (dir / file).string());
            artifacts.predictions.emplace(tag, read_prediction_file(dir / file, run, tag));
        }
        if (model_needed) {
            if (!std::filesystem::exists(dir / kParamsFile))
                throw DataError("run " + config_key(run) + " is missing " +
                                (dir / kParamsFile).string());
            artifacts.params = load_params(dir / kParamsFile);
        }

        for (const auto& metric : config.metrics)
            per_run[i].push_back(evaluate_metric(metric, artifacts));
    });

    std::vector<ScoreRecord> all;
    all.reserve(runs.size() * config.metrics.size());
    for (const auto& block : per_run) all.insert(all.end(), block.begin(), block.end());
    write_score_file(all, scores_path(config));
}

// ---- sheet -------------------------------------------------------------------

namespace {

std::string format_extension(RenderFormat format) {
    switch (format) {
        case RenderFormat::Text: return ".txt";
        case RenderFormat::Csv: return ".csv";
        case RenderFormat::Html: return ".html";
    }
    throw ValidationError("unknown render format");
}

std::vector<std::filesystem::path> write_sheet_files(const std::filesystem::path& sheets_dir,
                                                     const std::string& stem,
                                                     const MultiplicitySheet& sheet,
                                                     const std::vector<RenderFormat>& formats,
                                                     const HeatmapConfig& palette) {
    std::vector<std::filesystem::path> files;
    for (RenderFormat format : formats) {
        const auto path = sheets_dir / (stem + format_extension(format));
        atomic_write_text(path, render(sheet, format, palette));
        files.push_back(path);
    }
    return files;
}

}  // namespace

std::vector<std::filesystem::path> run_sheet(const PipelineConfig& config,
                                             const std::vector<std::string>& ids,
                                             const std::vector<RenderFormat>& formats) {
    validate(config);
    if (formats.empty()) throw ValidationError("sheet needs at least one output format");
    const std::vector<std::string> chosen = ids.empty() ? metric_ids(config) : ids;
    for (const auto& id : chosen) find_metric(config, id);

    const auto path = scores_path(config);
    if (!std::filesystem::exists(path))
        throw DataError("no score file at " + path.string() + "; run eval first");
    const std::vector<ScoreRecord> scores = read_score_file(path);

    std::vector<std::filesystem::path> files;
    for (const auto& id : chosen) {
        MultiplicitySheet sheet = build_sheet(scores, config.grid, id);
        HeatmapConfig palette = fit_palette(sheet);
        for (auto& file :
             write_sheet_files(config.output_dir / "sheets", id, sheet, formats, palette))
            files.push_back(std::move(file));
    }
    return files;
}

std::vector<std::filesystem::path> render_fixture_sheet(const std::filesystem::path& output_dir,
                                                        const std::string& fixture_name,
                                                        const std::vector<RenderFormat>& formats) {
    if (formats.empty()) throw ValidationError("sheet needs at least one output format");
    const auto names = fixture_names();
    if (std::find(names.begin(), names.end(), fixture_name) == names.end()) {
        std::string available;
        for (const auto& name : names) {
            if (!available.empty()) available += ", ";
            available += name;
        }
        throw ValidationError("unknown fixture " + fixture_name + "; available: " + available);
    }
    Fixture fx = load_fixture(fixture_name);
    MultiplicitySheet sheet = build_sheet(fx.scores, fx.grid, fx.metric_id, fx.dataset);
    return write_sheet_files(output_dir / "sheets", fx.name, sheet, formats, fx.palette);
}

// ---- select ------------------------------------------------------------------

namespace {

std::string k_label(double k) {
    char buf[32];
    if (k == std::floor(k))
        std::snprintf(buf, sizeof buf, "k=%d", static_cast<int>(k));
    else
        std::snprintf(buf, sizeof buf, "k=%g", k);
    return buf;
}

}  // namespace

SelectSummary run_select(const PipelineConfig& config) {
    validate(config);
    if (config.criteria.empty())
        throw ValidationError("config: selection.criteria must be non-empty for select");
    if (config.k_values.empty())
        throw ValidationError("config: selection.k_values must be non-empty for select");
    if (config.unforeseen.empty())
        throw ValidationError("config: selection.unforeseen must be non-empty for select");

    const auto path = scores_path(config);
    if (!std::filesystem::exists(path))
        throw DataError("no score file at " + path.string() + "; run eval first");
    const std::vector<ScoreRecord> scores = read_score_file(path);

    SelectSummary summary;
    for (double k : config.k_values) {
        SelectionSpec spec{config.criteria, k};
        std::vector<RunConfig> selected = intersect_selection(spec, scores);
        SelectionReport report = unforeseen_report(selected, scores, config.unforeseen);
        report.after_label = k_label(k);
        if (selected.empty()) summary.any_empty = true;

        std::string header = "criteria: ";
        for (std::size_t i = 0; i < spec.criteria.size(); ++i)
            header += (i ? ", " : "") + spec.criteria[i];
        header += "\n" + k_label(k) + "\n";

        const auto stem = config.output_dir / "reports" /
                          ("select-k" + k_label(k).substr(2));
        atomic_write_text(stem.string() + ".txt", header + render_report_text(report));
        atomic_write_text(stem.string() + ".csv", render_report_csv(report));
        summary.files.push_back(stem.string() + ".txt");
        summary.files.push_back(stem.string() + ".csv");
    }
    return summary;
}

// ---- report ------------------------------------------------------------------

std::string run_report(const PipelineConfig& config) {
    validate(config);
    const auto path = scores_path(config);
    if (!std::filesystem::exists(path))
        throw DataError("no score file at " + path.string() + "; run eval first");
    const std::vector<ScoreRecord> scores = read_score_file(path);

    std::string out;
    for (const auto& metric : config.metrics) {
        MultiplicitySheet sheet = build_sheet(scores, config.grid, metric.metric_id);
        out += render(sheet, RenderFormat::Text);
        out += "\n";
    }
    if (!config.criteria.empty() && !config.k_values.empty() && !config.unforeseen.empty()) {
        for (double k : config.k_values) {
            SelectionSpec spec{config.criteria, k};
            std::vector<RunConfig> selected = intersect_selection(spec, scores);
            SelectionReport report = unforeseen_report(selected, scores, config.unforeseen);
            report.after_label = k_label(k);
            out += "== selection " + k_label(k) + " ==\n";
            out += render_report_text(report);
            out += "\n";
        }
    }
    return out;
}

}  // namespace msheet

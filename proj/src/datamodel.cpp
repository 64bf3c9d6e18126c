#include "msheet/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "msheet/errors.hpp"
#include "msheet/rng.hpp"

namespace msheet {

using nlohmann::json;

std::string to_string(Optimizer opt) {
    switch (opt) {
        case Optimizer::SGD: return "SGD";
        case Optimizer::Adam: return "Adam";
    }
    throw ValidationError("unknown optimizer enum value");
}

Optimizer optimizer_from_string(const std::string& s) {
    if (s == "SGD" || s == "sgd") return Optimizer::SGD;
    if (s == "Adam" || s == "adam") return Optimizer::Adam;
    throw ValidationError("unknown optimizer \"" + s + "\" (expected SGD or Adam)");
}

void validate(const RunConfig& run) {
    if (!(run.learning_rate > 0.0) || !std::isfinite(run.learning_rate))
        throw ValidationError("learning_rate must be positive and finite");
    if (run.batch_size < 1) throw ValidationError("batch_size must be a positive integer");
    if (run.augmentation.empty()) throw ValidationError("augmentation tag must be non-empty");
    if (run.architecture.empty()) throw ValidationError("architecture tag must be non-empty");
}

std::string config_key(const RunConfig& run) {
    char lr[32];
    auto [lr_end, ec] = std::to_chars(lr, lr + sizeof lr, run.learning_rate);
    char buf[256];
    std::snprintf(buf, sizeof buf, "lr=%.*s|bs=%d|aug=%s|opt=%s|arch=%s|seed=%llu",
                  static_cast<int>(lr_end - lr), lr, run.batch_size, run.augmentation.c_str(),
                  to_string(run.optimizer).c_str(), run.architecture.c_str(),
                  static_cast<unsigned long long>(run.seed));
    return buf;
}

std::string config_hash(const RunConfig& run) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash_str(config_key(run))));
    return buf;
}

void apply_axis_value(RunConfig& run, const std::string& axis, const std::string& value) {
    if (axis == kAxisLearningRate) {
        try {
            size_t pos = 0;
            double v = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            run.learning_rate = v;
        } catch (const std::exception&) {
            throw ValidationError("learning_rate value \"" + value + "\" is not a real number");
        }
    } else if (axis == kAxisBatchSize) {
        try {
            size_t pos = 0;
            int v = std::stoi(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
            run.batch_size = v;
        } catch (const std::exception&) {
            throw ValidationError("batch_size value \"" + value + "\" is not an integer");
        }
    } else if (axis == kAxisAugmentation) {
        run.augmentation = value;
    } else if (axis == kAxisOptimizer) {
        run.optimizer = optimizer_from_string(value);
    } else if (axis == kAxisArchitecture) {
        run.architecture = value;
    } else {
        throw ValidationError("unknown grid axis \"" + axis + "\"");
    }
}

void validate(const GridSpec& grid) {
    validate(grid.default_config);
    if (grid.seeds.empty()) throw ValidationError("grid needs at least one seed");
    std::set<std::uint64_t> seen_seeds(grid.seeds.begin(), grid.seeds.end());
    if (seen_seeds.size() != grid.seeds.size())
        throw ValidationError("grid seeds must be unique");
    std::set<std::string> seen_axes;
    for (const auto& axis : grid.axes) {
        if (!seen_axes.insert(axis.name).second)
            throw ValidationError("duplicate grid axis \"" + axis.name + "\"");
        if (axis.values.empty())
            throw ValidationError("axis \"" + axis.name + "\" has no values");
        bool contains_default = false;
        std::set<std::string> seen_values;
        for (const auto& value : axis.values) {
            if (!seen_values.insert(value).second)
                throw ValidationError("axis \"" + axis.name + "\" repeats value \"" + value + "\"");
            RunConfig probe = grid.default_config;
            apply_axis_value(probe, axis.name, value);
            validate(probe);
            if (probe == grid.default_config) contains_default = true;
        }
        if (!contains_default)
            throw ValidationError("axis \"" + axis.name + "\" does not contain the default value");
    }
}

std::vector<RunConfig> expand_grid(const GridSpec& grid) {
    validate(grid);
    std::vector<RunConfig> out;
    for (std::uint64_t seed : grid.seeds) {
        RunConfig base = grid.default_config;
        base.seed = seed;
        std::vector<RunConfig> per_seed{base};
        for (const auto& axis : grid.axes) {
            for (const auto& value : axis.values) {
                RunConfig candidate = base;
                apply_axis_value(candidate, axis.name, value);
                if (std::find(per_seed.begin(), per_seed.end(), candidate) == per_seed.end())
                    per_seed.push_back(candidate);
            }
        }
        out.insert(out.end(), per_seed.begin(), per_seed.end());
    }
    return out;
}

static json to_json(const RunConfig& run) {
    return json{{"learning_rate", run.learning_rate},
                {"batch_size", run.batch_size},
                {"augmentation", run.augmentation},
                {"optimizer", to_string(run.optimizer)},
                {"architecture", run.architecture},
                {"seed", run.seed}};
}

static RunConfig run_from_json(const json& j) {
    RunConfig run;
    run.learning_rate = j.at("learning_rate").get<double>();
    run.batch_size = j.at("batch_size").get<int>();
    run.augmentation = j.at("augmentation").get<std::string>();
    run.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
    run.architecture = j.at("architecture").get<std::string>();
    run.seed = j.at("seed").get<std::uint64_t>();
    return run;
}

void validate(const PredictionSet& set) {
    if (set.records.empty()) throw DataError("prediction set is empty");
    const size_t classes = set.records.front().logits.size();
    if (classes < 2) throw DataError("logit vectors need at least two classes");
    std::set<std::string> ids;
    for (const auto& rec : set.records) {
        if (rec.logits.size() != classes)
            throw DataError("inconsistent class count for sample \"" + rec.sample_id + "\"");
        if (rec.label < 0 || static_cast<size_t>(rec.label) >= classes)
            throw DataError("label out of range for sample \"" + rec.sample_id + "\"");
        if (!ids.insert(rec.sample_id).second)
            throw DataError("duplicate sample_id \"" + rec.sample_id + "\"");
        for (const auto& logit : rec.logits)
            if (!std::isfinite(logit))
                throw DataError("non-finite logit for sample \"" + rec.sample_id + "\"");
    }
}

PredictionSet read_prediction_file(const std::filesystem::path& path, const RunConfig& run,
                                   const std::string& eval_set) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open prediction file " + path.string());
    PredictionSet set;
    set.run = run;
    set.eval_set = eval_set;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            PredictionRecord rec;
            rec.sample_id = j.at("sample_id").get<std::string>();
            rec.logits = j.at("logits").get<std::vector<double>>();
            rec.label = j.at("label").get<int>();
            rec.groups = j.at("groups").get<std::map<std::string, std::string>>();
            set.records.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed prediction record (" + e.what() + ")");
        }
    }
    validate(set);
    return set;
}

void write_prediction_file(const PredictionSet& set, const std::filesystem::path& path) {
    validate(set);
    std::string out;
    for (const auto& rec : set.records) {
        json j{{"sample_id", rec.sample_id},
               {"logits", rec.logits},
               {"label", rec.label},
               {"groups", rec.groups}};
        out += j.dump();
        out += '\n';
    }
    atomic_write_text(path, out);
}

void validate(const ScoreRecord& record) {
    validate(record.run);
    if (record.metric_id.empty()) throw ValidationError("metric_id must be non-empty");
    if (!std::isfinite(record.score) || record.score < 0.0 || record.score > 100.0)
        throw ValidationError("score for \"" + record.metric_id + "\" outside [0, 100]");
}

std::vector<ScoreRecord> read_score_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open score file " + path.string());
    std::vector<ScoreRecord> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            json j = json::parse(line);
            ScoreRecord rec;
            rec.run = run_from_json(j.at("run"));
            rec.metric_id = j.at("metric_id").get<std::string>();
            rec.score = j.at("score").get<double>();
            validate(rec);
            out.push_back(std::move(rec));
        } catch (const json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed score record (" + e.what() + ")");
        }
    }
    return out;
}

void write_score_file(std::span<const ScoreRecord> records, const std::filesystem::path& path) {
    std::string out;
    for (const auto& rec : records) {
        validate(rec);
        json j{{"run", to_json(rec.run)}, {"metric_id", rec.metric_id}, {"score", rec.score}};
        out += j.dump();
        out += '\n';
    }
    atomic_write_text(path, out);
}

RunManifest read_manifest(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw DataError("malformed manifest " + path.string() + ": " + e.what());
    }
    RunManifest manifest;
    try {
        manifest.run = run_from_json(j);
        manifest.predictions =
            j.at("predictions").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw DataError("manifest " + path.string() + " missing fields: " + e.what());
    }
    validate(manifest.run);
    return manifest;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    validate(manifest.run);
    json j = to_json(manifest.run);
    j["predictions"] = manifest.predictions;
    atomic_write_text(path, j.dump(2) + "\n");
}

void atomic_write_text(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw DataError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace msheet

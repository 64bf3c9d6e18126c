#include "msheet/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "msheet/datamodel.hpp"
#include "msheet/errors.hpp"
#include "msheet/rng.hpp"

namespace msheet {

void validate(const DatasetSpec& spec) {
    if (spec.num_classes < 2) throw ValidationError("num_classes must be at least 2");
    if (spec.input_dim < 1) throw ValidationError("input_dim must be at least 1");
    if (spec.samples_per_class < 1) throw ValidationError("samples_per_class must be at least 1");
    if (spec.class_means.size() != static_cast<size_t>(spec.num_classes))
        throw ValidationError("class_means must have one mean per class");
    for (const auto& mean : spec.class_means)
        if (mean.size() != static_cast<size_t>(spec.input_dim))
            throw ValidationError("class mean length must equal input_dim");
    if (!(spec.cluster_stddev > 0.0)) throw ValidationError("cluster_stddev must be positive");
    if (spec.skew_attribute.empty()) throw ValidationError("skew_attribute must be non-empty");
    if (!(spec.skew_ratio > 0.5) || !(spec.skew_ratio <= 1.0))
        throw ValidationError("skew_ratio must lie in (0.5, 1]");
    if (spec.style_offset.size() != static_cast<size_t>(spec.input_dim))
        throw ValidationError("style_offset length must equal input_dim");
    for (const auto& [name, cat] : spec.extra_attributes) {
        if (name.empty()) throw ValidationError("extra attribute name must be non-empty");
        if (name == spec.skew_attribute || name == kStyleGroupKey)
            throw ValidationError("extra attribute \"" + name + "\" collides with a builtin attribute");
        if (cat.probabilities.empty())
            throw ValidationError("extra attribute \"" + name + "\" has no categories");
        double total = 0.0;
        for (const auto& [value, p] : cat.probabilities) {
            if (value.empty()) throw ValidationError("category value must be non-empty");
            if (!(p >= 0.0)) throw ValidationError("category probability must be nonnegative");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9)
            throw ValidationError("probabilities for \"" + name + "\" must sum to 1");
    }
}

void validate(const LabeledDataset& data) {
    const size_t n = data.labels.size();
    if (n == 0) throw DataError("dataset is empty");
    if (data.num_classes < 2) throw DataError("dataset needs at least two classes");
    if (data.inputs.rows != n || data.ids.size() != n || data.groups.size() != n)
        throw DataError("dataset arrays disagree on sample count");
    std::set<std::string> ids(data.ids.begin(), data.ids.end());
    if (ids.size() != n) throw DataError("duplicate sample ids in dataset");
    for (int label : data.labels)
        if (label < 0 || label >= data.num_classes) throw DataError("label out of range");
    for (double v : data.inputs.data)
        if (!std::isfinite(v)) throw DataError("non-finite input value");
}

std::string majority_style(const DatasetSpec& spec, int cls) {
    return cls < (spec.num_classes + 1) / 2 ? kStyleFirstHalf : kStyleSecondHalf;
}

namespace {

std::string draw_category(const CategoricalSpec& cat, Rng& rng) {
    const double u = rng.uniform();
    double cum = 0.0;
    for (const auto& [value, p] : cat.probabilities) {
        cum += p;
        if (u < cum) return value;
    }
    return cat.probabilities.rbegin()->first;
}

LabeledDataset generate(const DatasetSpec& spec, std::span<const double> shift,
                        double stddev_scale, const std::string& eval_set) {
    validate(spec);
    if (!shift.empty() && shift.size() != static_cast<size_t>(spec.input_dim))
        throw ValidationError("shift length must equal input_dim");
    if (!(stddev_scale > 0.0)) throw ValidationError("stddev_scale must be positive");

    const size_t n = static_cast<size_t>(spec.num_classes) * spec.samples_per_class;
    LabeledDataset data;
    data.inputs = Matrix(n, spec.input_dim);
    data.labels.reserve(n);
    data.ids.reserve(n);
    data.groups.reserve(n);
    data.num_classes = spec.num_classes;
    data.eval_set = eval_set;

    Rng rng(spec.seed);
    size_t row = 0;
    for (int cls = 0; cls < spec.num_classes; ++cls) {
        const std::string majority = majority_style(spec, cls);
        const std::string minority =
            majority == kStyleFirstHalf ? kStyleSecondHalf : kStyleFirstHalf;
        for (int i = 0; i < spec.samples_per_class; ++i, ++row) {
            const bool is_majority = rng.uniform() < spec.skew_ratio;
            const std::string& style = is_majority ? majority : minority;
            for (int d = 0; d < spec.input_dim; ++d) {
                double v = spec.class_means[cls][d] + (shift.empty() ? 0.0 : shift[d]) +
                           stddev_scale * spec.cluster_stddev * rng.normal();
                if (!is_majority) v += spec.style_offset[d];
                data.inputs.at(row, d) = std::clamp(v, 0.0, 1.0);
            }
            std::map<std::string, std::string> groups{
                {spec.skew_attribute, style},
                {kStyleGroupKey, is_majority ? kStyleGroupMajority : kStyleGroupMinority}};
            for (const auto& [name, cat] : spec.extra_attributes)
                groups.emplace(name, draw_category(cat, rng));
            data.labels.push_back(cls);
            data.ids.push_back("c" + std::to_string(cls) + "-i" + std::to_string(i));
            data.groups.push_back(std::move(groups));
        }
    }
    validate(data);
    return data;
}

}  // namespace

LabeledDataset generate_skewed(const DatasetSpec& spec, const std::string& eval_set) {
    return generate(spec, {}, 1.0, eval_set);
}

LabeledDataset generate_shifted(const DatasetSpec& spec, std::span<const double> shift,
                                double stddev_scale, const std::string& eval_set) {
    if (shift.size() != static_cast<size_t>(spec.input_dim))
        throw ValidationError("shift length must equal input_dim");
    return generate(spec, shift, stddev_scale, eval_set);
}

void write_dataset_file(const LabeledDataset& data, const std::filesystem::path& path) {
    validate(data);
    std::string out;
    for (size_t i = 0; i < data.size(); ++i) {
        std::vector<double> input(data.inputs.row(i).begin(), data.inputs.row(i).end());
        nlohmann::json j{{"sample_id", data.ids[i]},
                         {"input", input},
                         {"label", data.labels[i]},
                         {"groups", data.groups[i]}};
        out += j.dump();
        out += '\n';
    }
    atomic_write_text(path, out);
}

}  // namespace msheet

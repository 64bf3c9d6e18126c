#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msheet/matrix.hpp"

namespace msheet {

// Categorical sampler; categories drawn in key order, probabilities sum to 1.
struct CategoricalSpec {
    std::map<std::string, double> probabilities;

    bool operator==(const CategoricalSpec&) const = default;
};

// Gaussian class clusters with a skewed two-style covariate: the first half
// of the classes is majority "color", the second half majority "gray", and
// samples carrying their class's minority style get style_offset added.
struct DatasetSpec {
    int num_classes = 2;
    int input_dim = 2;
    int samples_per_class = 100;
    std::vector<std::vector<double>> class_means;
    double cluster_stddev = 0.1;
    std::string skew_attribute = "style";
    double skew_ratio = 0.95;  // majority fraction, in (0.5, 1]
    std::vector<double> style_offset;
    std::map<std::string, CategoricalSpec> extra_attributes;
    std::uint64_t seed = 0;

    bool operator==(const DatasetSpec&) const = default;
};

inline constexpr const char* kStyleFirstHalf = "color";
inline constexpr const char* kStyleSecondHalf = "gray";
// Derived group attribute marking whether a sample carries its class's
// majority or minority style; lets group filters slice minorities across
// classes with a single (attribute, value) pair.
inline constexpr const char* kStyleGroupKey = "style-group";
inline constexpr const char* kStyleGroupMajority = "majority";
inline constexpr const char* kStyleGroupMinority = "minority";

struct LabeledDataset {
    Matrix inputs;  // N x input_dim, clamped to [0,1]
    std::vector<int> labels;
    std::vector<std::string> ids;
    std::vector<std::map<std::string, std::string>> groups;
    int num_classes = 0;
    std::string eval_set = "in-dist";

    std::size_t size() const { return labels.size(); }

    bool operator==(const LabeledDataset&) const = default;
};

void validate(const DatasetSpec& spec);
void validate(const LabeledDataset& data);

std::string majority_style(const DatasetSpec& spec, int cls);

LabeledDataset generate_skewed(const DatasetSpec& spec, const std::string& eval_set = "in-dist");

// Same construction with every class mean translated by shift and the
// cluster spread scaled; shift=0, scale=1 reproduces generate_skewed exactly.
LabeledDataset generate_shifted(const DatasetSpec& spec, std::span<const double> shift,
                                double stddev_scale, const std::string& eval_set);

// Line-delimited export: sample_id, input, label, groups per line.
void write_dataset_file(const LabeledDataset& data, const std::filesystem::path& path);

}  // namespace msheet

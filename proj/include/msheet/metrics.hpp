#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "msheet/attacks.hpp"
#include "msheet/datamodel.hpp"
#include "msheet/synthdata.hpp"
#include "msheet/toymodel.hpp"

namespace msheet {

enum class MetricKind { Plain, Group, Ood, OutputNoise, InputNoise, Pgd };

std::string to_string(MetricKind kind);
MetricKind metric_kind_from_string(const std::string& s);

// Every metric is accuracy under some intervention: a group restriction, a
// different eval set, noise on logits or inputs, or an adversarial attack.
struct MetricSpec {
    std::string metric_id;
    MetricKind kind = MetricKind::Plain;
    std::vector<std::pair<std::string, std::string>> group_filter;  // conjunction
    std::string eval_set = "in-dist";
    std::optional<NoiseSpec> noise;
    std::optional<AttackSpec> attack;

    bool operator==(const MetricSpec&) const = default;
};

void validate(const MetricSpec& spec);

// True for kinds that need model parameters and raw inputs rather than a
// stored prediction set.
bool needs_model(MetricKind kind);

double plain_accuracy(const PredictionSet& preds);

double group_accuracy(const PredictionSet& preds,
                      const std::vector<std::pair<std::string, std::string>>& filter);

double output_perturbation_accuracy(const PredictionSet& preds, const NoiseSpec& spec);

// Everything evaluate_metric may need for one run. Model-free kinds read
// predictions; model-dependent kinds read params plus the matching dataset.
struct RunArtifacts {
    RunConfig run;
    std::map<std::string, PredictionSet> predictions;  // keyed by eval_set
    std::map<std::string, LabeledDataset> datasets;    // keyed by eval_set
    std::optional<MLPParams> params;
};

ScoreRecord evaluate_metric(const MetricSpec& spec, const RunArtifacts& artifacts);

}  // namespace msheet

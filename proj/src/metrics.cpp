#include "msheet/metrics.hpp"

#include <algorithm>

#include "msheet/errors.hpp"
#include "msheet/rng.hpp"

namespace msheet {

std::string to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::Plain: return "plain";
        case MetricKind::Group: return "group";
        case MetricKind::Ood: return "ood";
        case MetricKind::OutputNoise: return "output_noise";
        case MetricKind::InputNoise: return "input_noise";
        case MetricKind::Pgd: return "pgd";
    }
    throw ValidationError("unknown metric kind enum value");
}

MetricKind metric_kind_from_string(const std::string& s) {
    if (s == "plain") return MetricKind::Plain;
    if (s == "group") return MetricKind::Group;
    if (s == "ood") return MetricKind::Ood;
    if (s == "output_noise") return MetricKind::OutputNoise;
    if (s == "input_noise") return MetricKind::InputNoise;
    if (s == "pgd") return MetricKind::Pgd;
    throw ValidationError("unknown metric kind \"" + s + "\"");
}

bool needs_model(MetricKind kind) {
    return kind == MetricKind::InputNoise || kind == MetricKind::Pgd;
}

void validate(const MetricSpec& spec) {
    if (spec.metric_id.empty()) throw ValidationError("metric_id must be non-empty");
    if (spec.eval_set.empty()) throw ValidationError("metric eval_set must be non-empty");
    switch (spec.kind) {
        case MetricKind::Plain:
            break;
        case MetricKind::Group:
            if (spec.group_filter.empty())
                throw ValidationError("group metric \"" + spec.metric_id + "\" needs a filter");
            for (const auto& [attr, value] : spec.group_filter)
                if (attr.empty() || value.empty())
                    throw ValidationError("group filter entries must be non-empty");
            break;
        case MetricKind::Ood:
            if (spec.eval_set == "in-dist")
                throw ValidationError("ood metric \"" + spec.metric_id +
                                      "\" must target a non-default eval_set");
            break;
        case MetricKind::OutputNoise:
            if (!spec.noise)
                throw ValidationError("output_noise metric \"" + spec.metric_id + "\" needs noise");
            validate(*spec.noise);
            if (spec.noise->target != NoiseTarget::OutputLogits)
                throw ValidationError("output_noise metric \"" + spec.metric_id +
                                      "\" must target output_logits");
            break;
        case MetricKind::InputNoise:
            if (!spec.noise)
                throw ValidationError("input_noise metric \"" + spec.metric_id + "\" needs noise");
            validate(*spec.noise);
            if (spec.noise->target != NoiseTarget::InputFeatures)
                throw ValidationError("input_noise metric \"" + spec.metric_id +
                                      "\" must target input_features");
            break;
        case MetricKind::Pgd:
            if (!spec.attack)
                throw ValidationError("pgd metric \"" + spec.metric_id + "\" needs an attack");
            validate(*spec.attack);
            break;
    }
}

namespace {

double accuracy_over(const std::vector<const PredictionRecord*>& records) {
    std::size_t correct = 0;
    for (const auto* rec : records) correct += argmax_lowest(rec->logits) == rec->label;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(records.size());
}

}  // namespace

double plain_accuracy(const PredictionSet& preds) {
    validate(preds);
    std::vector<const PredictionRecord*> all;
    all.reserve(preds.records.size());
    for (const auto& rec : preds.records) all.push_back(&rec);
    return accuracy_over(all);
}

double group_accuracy(const PredictionSet& preds,
                      const std::vector<std::pair<std::string, std::string>>& filter) {
    validate(preds);
    if (filter.empty()) throw ValidationError("group filter must be non-empty");
    std::vector<const PredictionRecord*> matching;
    for (const auto& rec : preds.records) {
        bool match = true;
        for (const auto& [attr, value] : filter) {
            auto it = rec.groups.find(attr);
            if (it == rec.groups.end() || it->second != value) {
                match = false;
                break;
            }
        }
        if (match) matching.push_back(&rec);
    }
    if (matching.empty()) {
        std::string desc;
        for (const auto& [attr, value] : filter) desc += " " + attr + "=" + value;
        throw DataError("empty group:" + desc);
    }
    return accuracy_over(matching);
}

double output_perturbation_accuracy(const PredictionSet& preds, const NoiseSpec& spec) {
    validate(preds);
    validate(spec);
    if (spec.target != NoiseTarget::OutputLogits)
        throw ValidationError("output perturbation requires target=output_logits");
    if (spec.lam == 0.0) return plain_accuracy(preds);
    std::size_t correct = 0;
    std::vector<double> noisy;
    for (const auto& rec : preds.records) {
        noisy.resize(rec.logits.size());
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            Rng rng(derive_seed(spec.seed, hash_str(rec.sample_id),
                                static_cast<std::uint64_t>(rep)));
            for (std::size_t c = 0; c < noisy.size(); ++c)
                noisy[c] = rec.logits[c] + rng.signed_exponential(spec.lam);
            correct += argmax_lowest(noisy) == rec.label;
        }
    }
    return 100.0 * static_cast<double>(correct) /
           static_cast<double>(preds.records.size() * static_cast<std::size_t>(spec.repetitions));
}

ScoreRecord evaluate_metric(const MetricSpec& spec, const RunArtifacts& artifacts) {
    validate(spec);
    auto predictions_for = [&](const std::string& eval_set) -> const PredictionSet& {
        auto it = artifacts.predictions.find(eval_set);
        if (it == artifacts.predictions.end())
            throw DataError("metric \"" + spec.metric_id + "\": no predictions for eval_set \"" +
                            eval_set + "\" in run " + config_key(artifacts.run));
        return it->second;
    };
    auto dataset_for = [&](const std::string& eval_set) -> const LabeledDataset& {
        auto it = artifacts.datasets.find(eval_set);
        if (it == artifacts.datasets.end())
            throw DataError("metric \"" + spec.metric_id + "\": no dataset for eval_set \"" +
                            eval_set + "\" in run " + config_key(artifacts.run));
        return it->second;
    };
    if (needs_model(spec.kind) && !artifacts.params)
        throw DataError("metric \"" + spec.metric_id + "\": model required for run " +
                        config_key(artifacts.run));

    double score = 0.0;
    switch (spec.kind) {
        case MetricKind::Plain:
        case MetricKind::Ood:
            score = plain_accuracy(predictions_for(spec.eval_set));
            break;
        case MetricKind::Group:
            score = group_accuracy(predictions_for(spec.eval_set), spec.group_filter);
            break;
        case MetricKind::OutputNoise:
            score = output_perturbation_accuracy(predictions_for(spec.eval_set), *spec.noise);
            break;
        case MetricKind::InputNoise:
            score = input_perturbation_accuracy(*artifacts.params, dataset_for(spec.eval_set),
                                                *spec.noise);
            break;
        case MetricKind::Pgd:
            score = pgd_accuracy(*artifacts.params, dataset_for(spec.eval_set), *spec.attack);
            break;
    }
    ScoreRecord record{artifacts.run, spec.metric_id, score};
    validate(record);
    return record;
}

}  // namespace msheet

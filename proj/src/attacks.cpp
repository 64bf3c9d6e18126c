#include "msheet/attacks.hpp"

#include <algorithm>
#include <cmath>

#include "msheet/errors.hpp"
#include "msheet/rng.hpp"

namespace msheet {

void validate(const AttackSpec& spec) {
    if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta))
        throw ValidationError("attack delta must be nonnegative and finite");
    if (spec.steps < 1) throw ValidationError("attack steps must be at least 1");
    if (!(spec.step_size > 0.0)) throw ValidationError("attack step_size must be positive");
}

AttackSpec pgd_spec(double delta, std::uint64_t seed) {
    AttackSpec spec;
    spec.delta = delta;
    spec.steps = 10;
    spec.step_size = delta > 0.0 ? delta / 4.0 : 1.0;
    spec.random_start = false;
    spec.seed = seed;
    return spec;
}

std::string to_string(NoiseTarget target) {
    return target == NoiseTarget::OutputLogits ? "output_logits" : "input_features";
}

NoiseTarget noise_target_from_string(const std::string& s) {
    if (s == "output_logits") return NoiseTarget::OutputLogits;
    if (s == "input_features") return NoiseTarget::InputFeatures;
    throw ValidationError("unknown noise target \"" + s + "\"");
}

void validate(const NoiseSpec& spec) {
    if (!(spec.lam >= 0.0) || !std::isfinite(spec.lam))
        throw ValidationError("noise scale must be nonnegative and finite");
    if (spec.repetitions < 1) throw ValidationError("noise repetitions must be at least 1");
}

std::vector<double> pgd_attack(const MLPParams& params, std::span<const double> input, int label,
                               const AttackSpec& spec, const std::string& sample_id) {
    validate(spec);
    for (double v : input)
        if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("attack input outside [0,1]^d");

    std::vector<double> x(input.begin(), input.end());
    if (spec.random_start && spec.delta > 0.0) {
        Rng rng(derive_seed(spec.seed, hash_str(sample_id)));
        for (std::size_t d = 0; d < x.size(); ++d)
            x[d] = std::clamp(x[d] + rng.uniform(-spec.delta, spec.delta), 0.0, 1.0);
    }
    for (int step = 0; step < spec.steps; ++step) {
        auto grad = input_gradient(params, x, label);
        for (std::size_t d = 0; d < x.size(); ++d) {
            const double sign = grad[d] > 0.0 ? 1.0 : (grad[d] < 0.0 ? -1.0 : 0.0);
            double v = x[d] + spec.step_size * sign;
            v = std::clamp(v, input[d] - spec.delta, input[d] + spec.delta);
            x[d] = std::clamp(v, 0.0, 1.0);
        }
    }
    return x;
}

double pgd_accuracy(const MLPParams& params, const LabeledDataset& data, const AttackSpec& spec) {
    validate(data);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto adv = pgd_attack(params, data.inputs.row(i), data.labels[i], spec, data.ids[i]);
        correct += argmax_lowest(forward_row(params, adv)) == data.labels[i];
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(data.size());
}

double input_perturbation_accuracy(const MLPParams& params, const LabeledDataset& data,
                                   const NoiseSpec& spec) {
    validate(spec);
    validate(data);
    if (spec.target != NoiseTarget::InputFeatures)
        throw ValidationError("input perturbation requires target=input_features");
    std::size_t correct = 0;
    std::vector<double> x(data.inputs.cols);
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto row = data.inputs.row(i);
        for (int rep = 0; rep < spec.repetitions; ++rep) {
            std::copy(row.begin(), row.end(), x.begin());
            if (spec.lam > 0.0) {
                Rng rng(derive_seed(spec.seed, hash_str(data.ids[i]),
                                    static_cast<std::uint64_t>(rep)));
                for (double& v : x) v = std::clamp(v + rng.signed_exponential(spec.lam), 0.0, 1.0);
            }
            correct += argmax_lowest(forward_row(params, x)) == data.labels[i];
        }
    }
    return 100.0 * static_cast<double>(correct) /
           static_cast<double>(data.size() * static_cast<std::size_t>(spec.repetitions));
}

}  // namespace msheet

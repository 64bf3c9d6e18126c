#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "msheet/synthdata.hpp"
#include "msheet/toymodel.hpp"

namespace msheet {

// L-infinity PGD budget and schedule.
struct AttackSpec {
    double delta = 0.0;
    int steps = 10;
    double step_size = 1.0;
    bool random_start = false;
    std::uint64_t seed = 0;

    bool operator==(const AttackSpec&) const = default;
};

void validate(const AttackSpec& spec);

// Default schedule for a budget: 10 steps of delta/4.
AttackSpec pgd_spec(double delta, std::uint64_t seed = 0);

enum class NoiseTarget { OutputLogits, InputFeatures };

std::string to_string(NoiseTarget target);
NoiseTarget noise_target_from_string(const std::string& s);

// lam is the scale (mean) of the symmetrized exponential; each draw is
// Laplace(0, lam) distributed.
struct NoiseSpec {
    double lam = 0.0;
    int repetitions = 100;
    std::uint64_t seed = 0;
    NoiseTarget target = NoiseTarget::OutputLogits;

    bool operator==(const NoiseSpec&) const = default;
};

void validate(const NoiseSpec& spec);

// Untargeted cross-entropy ascent; iterates stay inside the delta-ball
// around `input` intersected with [0,1]^d. Deterministic; the random start
// (when enabled) draws from a stream derived from (spec.seed, sample_id).
std::vector<double> pgd_attack(const MLPParams& params, std::span<const double> input, int label,
                               const AttackSpec& spec, const std::string& sample_id = "");

// Percentage of samples still classified correctly after attacking each one
// independently. Argmax ties resolve to the lowest class index.
double pgd_accuracy(const MLPParams& params, const LabeledDataset& data, const AttackSpec& spec);

// Mean accuracy over spec.repetitions rounds of per-coordinate input noise,
// inputs clamped back to [0,1]. Per-(sample, repetition) noise streams make
// the result independent of evaluation order.
double input_perturbation_accuracy(const MLPParams& params, const LabeledDataset& data,
                                   const NoiseSpec& spec);

}  // namespace msheet

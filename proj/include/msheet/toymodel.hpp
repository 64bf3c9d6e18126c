#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "msheet/datamodel.hpp"
#include "msheet/matrix.hpp"
#include "msheet/rng.hpp"
#include "msheet/synthdata.hpp"

namespace msheet {

// Hidden layer widths for a named architecture; "linear" means no hidden
// layer at all (logits are an affine map of the input).
std::vector<std::size_t> hidden_widths(const std::string& architecture);

// Fully connected net: tanh hidden layers, linear logits. weights[l] has
// shape (fan_in x fan_out); activations are row vectors multiplied from the
// left.
struct MLPParams {
    std::string architecture;
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    bool operator==(const MLPParams&) const = default;
};

void validate(const MLPParams& params);

struct TrainSpec {
    RunConfig run;
    int epochs = 50;
    std::map<std::string, double> jitter_scales;  // augmentation tag -> scale

    bool operator==(const TrainSpec&) const = default;
};

void validate(const TrainSpec& spec);

// Glorot-uniform weights, zero biases.
MLPParams init_params(const std::string& architecture, std::size_t input_dim,
                      std::size_t num_classes, std::uint64_t seed);
// Same, drawing from an existing stream (training consumes one stream in the
// order init -> per-epoch shuffle -> per-batch jitter).
MLPParams init_params(const std::string& architecture, std::size_t input_dim,
                      std::size_t num_classes, Rng& rng);

Matrix forward(const MLPParams& params, const Matrix& inputs);
std::vector<double> forward_row(const MLPParams& params, std::span<const double> input);

// Mean cross-entropy over the batch plus exact analytic gradients in
// MLPParams shape.
std::pair<double, MLPParams> loss_and_grads(const MLPParams& params, const Matrix& inputs,
                                            const std::vector<int>& labels);

// Gradient of single-sample cross-entropy with respect to the input vector.
std::vector<double> input_gradient(const MLPParams& params, std::span<const double> input,
                                   int label);

struct TrainResult {
    MLPParams params;
    std::vector<double> epoch_losses;  // sample-weighted mean loss per epoch
};

TrainResult train(const TrainSpec& spec, const LabeledDataset& data);

PredictionSet predict(const MLPParams& params, const LabeledDataset& data,
                      const RunConfig& run = {});

// Text serialization: shape header plus decimal values, exact round trip.
void save_params(const MLPParams& params, const std::filesystem::path& path);
MLPParams load_params(const std::filesystem::path& path);

}  // namespace msheet

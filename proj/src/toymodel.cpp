#include "msheet/toymodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "msheet/errors.hpp"

namespace msheet {

std::vector<std::size_t> hidden_widths(const std::string& architecture) {
    if (architecture == "linear") return {};
    if (architecture == "mlp-small") return {16};
    if (architecture == "mlp-wide") return {64, 64};
    if (architecture == "mlp-deep") return {32, 32, 32};
    throw ValidationError("unknown architecture \"" + architecture +
                          "\" (known: linear, mlp-small, mlp-wide, mlp-deep)");
}

void validate(const MLPParams& params) {
    auto widths = hidden_widths(params.architecture);
    if (params.input_dim < 1 || params.num_classes < 2)
        throw ValidationError("params need input_dim >= 1 and num_classes >= 2");
    if (params.weights.size() != widths.size() + 1 || params.biases.size() != widths.size() + 1)
        throw ValidationError("layer count does not match architecture");
    std::size_t fan_in = params.input_dim;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const std::size_t fan_out = l < widths.size() ? widths[l] : params.num_classes;
        if (params.weights[l].rows != fan_in || params.weights[l].cols != fan_out)
            throw ValidationError("weight shape mismatch at layer " + std::to_string(l));
        if (params.biases[l].size() != fan_out)
            throw ValidationError("bias shape mismatch at layer " + std::to_string(l));
        fan_in = fan_out;
    }
    for (const auto& w : params.weights)
        for (double v : w.data)
            if (!std::isfinite(v)) throw ValidationError("non-finite weight");
    for (const auto& b : params.biases)
        for (double v : b)
            if (!std::isfinite(v)) throw ValidationError("non-finite bias");
}

void validate(const TrainSpec& spec) {
    validate(spec.run);
    if (spec.epochs < 1) throw ValidationError("epochs must be at least 1");
    auto it = spec.jitter_scales.find(spec.run.augmentation);
    if (it == spec.jitter_scales.end())
        throw ValidationError("no jitter scale for augmentation \"" + spec.run.augmentation + "\"");
    if (!(it->second >= 0.0)) throw ValidationError("jitter scale must be nonnegative");
    hidden_widths(spec.run.architecture);
}

MLPParams init_params(const std::string& architecture, std::size_t input_dim,
                      std::size_t num_classes, Rng& rng) {
    auto widths = hidden_widths(architecture);
    MLPParams params;
    params.architecture = architecture;
    params.input_dim = input_dim;
    params.num_classes = num_classes;
    std::size_t fan_in = input_dim;
    for (std::size_t l = 0; l <= widths.size(); ++l) {
        const std::size_t fan_out = l < widths.size() ? widths[l] : num_classes;
        Matrix w(fan_in, fan_out);
        const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        for (double& v : w.data) v = rng.uniform(-limit, limit);
        params.weights.push_back(std::move(w));
        params.biases.emplace_back(fan_out, 0.0);
        fan_in = fan_out;
    }
    validate(params);
    return params;
}

MLPParams init_params(const std::string& architecture, std::size_t input_dim,
                      std::size_t num_classes, std::uint64_t seed) {
    Rng rng(seed);
    return init_params(architecture, input_dim, num_classes, rng);
}

namespace {

// out = a * w + bias, a is (n x k), w is (k x m)
Matrix affine(const Matrix& a, const Matrix& w, const std::vector<double>& bias) {
    Matrix out(a.rows, w.cols);
    for (std::size_t r = 0; r < a.rows; ++r) {
        double* dst = out.data.data() + r * out.cols;
        for (std::size_t c = 0; c < w.cols; ++c) dst[c] = bias[c];
        const double* src = a.data.data() + r * a.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double av = src[k];
            const double* wrow = w.data.data() + k * w.cols;
            for (std::size_t c = 0; c < w.cols; ++c) dst[c] += av * wrow[c];
        }
    }
    return out;
}

// Forward pass keeping every activation; activations[0] is the input batch,
// the last entry is the logits (no tanh on the output layer).
std::vector<Matrix> forward_trace(const MLPParams& params, const Matrix& inputs) {
    if (inputs.cols != params.input_dim) throw ValidationError("input width mismatch");
    std::vector<Matrix> activations;
    activations.reserve(params.weights.size() + 1);
    activations.push_back(inputs);
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        Matrix z = affine(activations.back(), params.weights[l], params.biases[l]);
        if (l + 1 < params.weights.size())
            for (double& v : z.data) v = std::tanh(v);
        activations.push_back(std::move(z));
    }
    return activations;
}

// softmax rows in place; returns mean cross-entropy against labels
double softmax_ce(Matrix& logits, const std::vector<int>& labels) {
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        auto row = logits.row(r);
        const double m = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double& v : row) {
            v = std::exp(v - m);
            sum += v;
        }
        for (double& v : row) v /= sum;
        total += -std::log(logits.at(r, labels[r]));
    }
    return total / static_cast<double>(logits.rows);
}

MLPParams zeros_like(const MLPParams& params) {
    MLPParams z = params;
    for (auto& w : z.weights) std::fill(w.data.begin(), w.data.end(), 0.0);
    for (auto& b : z.biases) std::fill(b.begin(), b.end(), 0.0);
    return z;
}

// Backward pass shared by loss_and_grads and input_gradient. `delta` enters
// as dLoss/dLogits and exits as dLoss/dInputs; grads may be null.
Matrix backward(const MLPParams& params, const std::vector<Matrix>& activations, Matrix delta,
                MLPParams* grads) {
    for (std::size_t l = params.weights.size(); l-- > 0;) {
        const Matrix& a = activations[l];
        if (grads) {
            Matrix& gw = grads->weights[l];
            for (std::size_t r = 0; r < a.rows; ++r)
                for (std::size_t k = 0; k < a.cols; ++k) {
                    const double av = a.at(r, k);
                    for (std::size_t c = 0; c < delta.cols; ++c)
                        gw.at(k, c) += av * delta.at(r, c);
                }
            auto& gb = grads->biases[l];
            for (std::size_t r = 0; r < delta.rows; ++r)
                for (std::size_t c = 0; c < delta.cols; ++c) gb[c] += delta.at(r, c);
        }
        Matrix prev(delta.rows, params.weights[l].rows);
        const Matrix& w = params.weights[l];
        for (std::size_t r = 0; r < delta.rows; ++r)
            for (std::size_t k = 0; k < w.rows; ++k) {
                double s = 0.0;
                for (std::size_t c = 0; c < w.cols; ++c) s += delta.at(r, c) * w.at(k, c);
                prev.at(r, k) = s;
            }
        if (l > 0)  // activations[l] = tanh(pre); d tanh = 1 - a^2
            for (std::size_t i = 0; i < prev.data.size(); ++i)
                prev.data[i] *= 1.0 - a.data[i] * a.data[i];
        delta = std::move(prev);
    }
    return delta;
}

}  // namespace

Matrix forward(const MLPParams& params, const Matrix& inputs) {
    return forward_trace(params, inputs).back();
}

std::vector<double> forward_row(const MLPParams& params, std::span<const double> input) {
    Matrix batch(1, input.size());
    std::copy(input.begin(), input.end(), batch.data.begin());
    Matrix logits = forward(params, batch);
    return logits.data;
}

std::pair<double, MLPParams> loss_and_grads(const MLPParams& params, const Matrix& inputs,
                                            const std::vector<int>& labels) {
    if (inputs.rows != labels.size()) throw ValidationError("label count mismatch");
    for (int label : labels)
        if (label < 0 || static_cast<std::size_t>(label) >= params.num_classes)
            throw ValidationError("label out of range");
    auto activations = forward_trace(params, inputs);
    Matrix probs = activations.back();
    const double loss = softmax_ce(probs, labels);

    const double inv_batch = 1.0 / static_cast<double>(inputs.rows);
    Matrix delta = std::move(probs);
    for (std::size_t r = 0; r < delta.rows; ++r) {
        for (double& v : delta.row(r)) v *= inv_batch;
        delta.at(r, labels[r]) -= inv_batch;
    }
    MLPParams grads = zeros_like(params);
    backward(params, activations, std::move(delta), &grads);
    return {loss, std::move(grads)};
}

std::vector<double> input_gradient(const MLPParams& params, std::span<const double> input,
                                   int label) {
    Matrix batch(1, input.size());
    std::copy(input.begin(), input.end(), batch.data.begin());
    auto activations = forward_trace(params, batch);
    Matrix probs = activations.back();
    softmax_ce(probs, {label});
    Matrix delta = std::move(probs);
    delta.at(0, label) -= 1.0;
    Matrix dx = backward(params, activations, std::move(delta), nullptr);
    return dx.data;
}

namespace {

struct AdamState {
    MLPParams m, v;
    long t = 0;
};

void apply_sgd(MLPParams& params, const MLPParams& grads, double lr) {
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].data.size(); ++i)
            params.weights[l].data[i] -= lr * grads.weights[l].data[i];
        for (std::size_t i = 0; i < params.biases[l].size(); ++i)
            params.biases[l][i] -= lr * grads.biases[l][i];
    }
}

void apply_adam(MLPParams& params, const MLPParams& grads, AdamState& state, double lr) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    ++state.t;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    auto step = [&](double& w, double& m, double& v, double g) {
        m = b1 * m + (1.0 - b1) * g;
        v = b2 * v + (1.0 - b2) * g * g;
        w -= lr * (m / c1) / (std::sqrt(v / c2) + eps);
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        for (std::size_t i = 0; i < params.weights[l].data.size(); ++i)
            step(params.weights[l].data[i], state.m.weights[l].data[i],
                 state.v.weights[l].data[i], grads.weights[l].data[i]);
        for (std::size_t i = 0; i < params.biases[l].size(); ++i)
            step(params.biases[l][i], state.m.biases[l][i], state.v.biases[l][i],
                 grads.biases[l][i]);
    }
}

}  // namespace

TrainResult train(const TrainSpec& spec, const LabeledDataset& data) {
    validate(spec);
    validate(data);
    const std::size_t n = data.size();
    const std::size_t batch_size = static_cast<std::size_t>(spec.run.batch_size);
    const double jitter = spec.jitter_scales.at(spec.run.augmentation);

    Rng rng(spec.run.seed);
    TrainResult result;
    result.params = init_params(spec.run.architecture, data.inputs.cols,
                                static_cast<std::size_t>(data.num_classes), rng);
    AdamState adam{zeros_like(result.params), zeros_like(result.params), 0};

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < spec.epochs; ++epoch) {
        for (std::size_t i = n - 1; i > 0; --i)
            std::swap(order[i], order[rng.below(i + 1)]);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            Matrix batch(count, data.inputs.cols);
            std::vector<int> labels(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t src = order[start + i];
                auto row = data.inputs.row(src);
                std::copy(row.begin(), row.end(), batch.row(i).begin());
                labels[i] = data.labels[src];
            }
            if (jitter > 0.0)
                for (double& v : batch.data) v += rng.uniform(-jitter, jitter);
            auto [loss, grads] = loss_and_grads(result.params, batch, labels);
            epoch_loss += loss * static_cast<double>(count);
            if (spec.run.optimizer == Optimizer::SGD)
                apply_sgd(result.params, grads, spec.run.learning_rate);
            else
                apply_adam(result.params, grads, adam, spec.run.learning_rate);
        }
        result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
    }
    return result;
}

PredictionSet predict(const MLPParams& params, const LabeledDataset& data, const RunConfig& run) {
    validate(data);
    Matrix logits = forward(params, data.inputs);
    PredictionSet set;
    set.run = run;
    set.eval_set = data.eval_set;
    set.records.reserve(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        PredictionRecord rec;
        rec.sample_id = data.ids[i];
        auto row = logits.row(i);
        rec.logits.assign(row.begin(), row.end());
        rec.label = data.labels[i];
        rec.groups = data.groups[i];
        set.records.push_back(std::move(rec));
    }
    validate(set);
    return set;
}

void save_params(const MLPParams& params, const std::filesystem::path& path) {
    validate(params);
    std::string out = "arch " + params.architecture + "\n";
    out += "input_dim " + std::to_string(params.input_dim) + "\n";
    out += "num_classes " + std::to_string(params.num_classes) + "\n";
    out += "layers " + std::to_string(params.weights.size()) + "\n";
    char buf[40];
    auto append = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out += buf;
    };
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        const Matrix& w = params.weights[l];
        out += "layer " + std::to_string(l) + " " + std::to_string(w.rows) + " " +
               std::to_string(w.cols) + "\n";
        for (std::size_t r = 0; r < w.rows; ++r) {
            for (std::size_t c = 0; c < w.cols; ++c) {
                if (c) out += ' ';
                append(w.at(r, c));
            }
            out += '\n';
        }
        out += "bias";
        for (double v : params.biases[l]) {
            out += ' ';
            append(v);
        }
        out += '\n';
    }
    atomic_write_text(path, out);
}

MLPParams load_params(const std::filesystem::path& path) {
    std::istringstream in(read_text(path));
    auto expect = [&](const std::string& keyword) {
        std::string token;
        if (!(in >> token) || token != keyword)
            throw DataError("params file " + path.string() + ": expected \"" + keyword + "\"");
    };
    MLPParams params;
    std::size_t layers = 0;
    expect("arch");
    in >> params.architecture;
    expect("input_dim");
    in >> params.input_dim;
    expect("num_classes");
    in >> params.num_classes;
    expect("layers");
    in >> layers;
    for (std::size_t l = 0; l < layers; ++l) {
        expect("layer");
        std::size_t index = 0, rows = 0, cols = 0;
        in >> index >> rows >> cols;
        if (!in || index != l) throw DataError("params file " + path.string() + ": bad layer header");
        Matrix w(rows, cols);
        for (double& v : w.data) in >> v;
        expect("bias");
        std::vector<double> b(cols);
        for (double& v : b) in >> v;
        if (!in) throw DataError("params file " + path.string() + ": truncated values");
        params.weights.push_back(std::move(w));
        params.biases.push_back(std::move(b));
    }
    try {
        validate(params);
    } catch (const ValidationError& e) {
        throw DataError("params file " + path.string() + ": " + e.what());
    }
    return params;
}

}  // namespace msheet

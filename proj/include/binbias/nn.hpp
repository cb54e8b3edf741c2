#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "binbias/features.hpp"
#include "binbias/matrix.hpp"

namespace binbias {

// One affine layer. Weights are stored transposed, (in + 1) x out, with
// the constant-input row last: column j of the first layer is the full
// input weight vector a_j of that neuron (bias as appended constant).
struct Layer {
    std::size_t in = 0;
    std::size_t out = 0;
    Matrix w;

    Layer() = default;
    Layer(std::size_t in_, std::size_t out_) : in(in_), out(out_), w(in_ + 1, out_) {}
};

// Dense ReLU network of configurable depth. Hidden layers apply ReLU,
// the head is affine.
struct Mlp {
    std::vector<std::size_t> widths; // {input, hidden..., output}
    std::vector<Layer> layers;

    std::size_t input_dim() const { return widths.front(); }
    std::size_t output_dim() const { return widths.back(); }
    std::size_t param_count() const;

    // two-layer models viewed as a raw network plus output-head bias
    RawNetworkLayer to_raw_layer() const;
    std::vector<double> head_bias() const;

    std::string to_json() const;
    static Mlp from_json(const std::string& text);
};

Mlp make_mlp(const std::vector<std::size_t>& widths);

// He initialization: weights are zero-mean normal with variance 2/fan_in,
// constant-input (bias) rows are zero. Deterministic given the seed.
Mlp init_he(const std::vector<std::size_t>& widths, std::uint64_t seed);

Matrix forward(const Mlp& model, const Matrix& inputs);

enum class LossKind { Square, CrossEntropy };

struct Batch {
    Matrix inputs;                   // n x input_dim
    Matrix targets;                  // n x output_dim, square loss only
    std::vector<int> labels;         // 1-based classes, cross-entropy only
    std::vector<double> real_values; // ground-truth reals for decoded RMSE

    std::size_t n() const { return inputs.rows; }
};

struct Gradients {
    std::vector<Matrix> gw;

    void match(const Mlp& model);
    std::size_t flat_size() const;
    void flatten_to(std::vector<float>& out) const;
};

// scratch buffers reused across epochs
struct Workspace {
    std::vector<Matrix> act; // act[0] is the input batch copy target
    std::vector<Matrix> pre;
    std::vector<Matrix> delta;
    std::vector<Matrix> wt; // per-layer transposed weights
    Matrix dout;

    void match(const Mlp& model, std::size_t batch_size);
};

// Mean loss and full-parameter gradient by backpropagation.
// Square: 0.5 * mean ||f(x) - y||^2. Cross-entropy: mean softmax CE.
double loss_and_grad(const Mlp& model, const Batch& batch, LossKind loss,
                     Gradients& grads, Workspace& ws);

double loss_only(const Mlp& model, const Batch& batch, LossKind loss, Workspace& ws);

struct TrainConfig {
    LossKind loss = LossKind::Square;
    std::vector<double> lr_grid = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1};
    std::uint64_t seed = 0;
    long patience = 1000;
    long max_epochs = 200000;
    int record_gradients = 1000;
    // bin midpoints for decoding cross-entropy predictions to reals;
    // required when loss == CrossEntropy
    std::vector<double> decode_midpoints;
};

struct TrainResult {
    Mlp best_model;                                  // weights of the best-validation epoch
    std::vector<double> train_losses;                // one per epoch
    std::vector<double> val_losses;                  // one per epoch
    std::vector<std::vector<float>> recorded_gradients; // first G flattened gradients
    double selected_lr = 0.0;
    long epochs = 0;
    long best_epoch = -1;
    double best_val_loss = 0.0;
    double best_val_rmse = 0.0;
    bool diverged = false;
};

// Full-batch gradient descent with the sweep protocol: every learning
// rate in the grid runs until neither train nor validation loss has
// improved for `patience` epochs (or max_epochs); the run with the
// lowest validation RMSE on decoded predictions wins. Diverging rates
// are skipped; if every rate diverges this throws.
TrainResult train(const Mlp& model, const Batch& train_set, const Batch& val_set,
                  const TrainConfig& config);

// validation RMSE of a model's decoded predictions against real labels
double validation_rmse(const Mlp& model, const Batch& batch, LossKind loss,
                       const std::vector<double>& decode_midpoints);

} // namespace binbias

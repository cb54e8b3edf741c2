#include "binbias/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "binbias/binning.hpp"
#include "binbias/rng.hpp"

namespace binbias {

namespace {

// out = act * w[0..in-1] + bias row, shapes (n x in)(in x out)
void affine_forward(const Matrix& act, const Layer& layer, Matrix& out) {
    const std::size_t n = act.rows;
    const double* bias = layer.w.row(layer.in);
    for (std::size_t i = 0; i < n; ++i) {
        double* oi = out.row(i);
        for (std::size_t j = 0; j < layer.out; ++j) oi[j] = bias[j];
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = act.row(i);
        double* oi = out.row(i);
        for (std::size_t l = 0; l < layer.in; ++l) {
            const double s = ai[l];
            const double* wl = layer.w.row(l);
            for (std::size_t j = 0; j < layer.out; ++j) oi[j] += s * wl[j];
        }
    }
}

void relu_inplace(const Matrix& pre, Matrix& act) {
    for (std::size_t i = 0; i < pre.data.size(); ++i)
        act.data[i] = pre.data[i] > 0.0 ? pre.data[i] : 0.0;
}

} // namespace

std::size_t Mlp::param_count() const {
    std::size_t total = 0;
    for (const auto& l : layers) total += l.w.data.size();
    return total;
}

RawNetworkLayer Mlp::to_raw_layer() const {
    if (layers.size() != 2 || input_dim() != 1)
        throw std::invalid_argument("to_raw_layer: needs a two-layer 1-D model");
    RawNetworkLayer raw;
    const std::size_t m = widths[1];
    const std::size_t k = output_dim();
    for (std::size_t j = 0; j < m; ++j) {
        raw.input_weights.push_back({layers[0].w(0, j), layers[0].w(1, j)});
        std::vector<double> b(k);
        for (std::size_t c = 0; c < k; ++c) b[c] = layers[1].w(j, c);
        raw.output_weights.push_back(std::move(b));
    }
    return raw;
}

std::vector<double> Mlp::head_bias() const {
    const auto& head = layers.back();
    return std::vector<double>(head.w.row(head.in), head.w.row(head.in) + head.out);
}

std::string Mlp::to_json() const {
    nlohmann::json j;
    j["widths"] = widths;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : layers)
        j["layers"].push_back({{"rows", l.w.rows}, {"cols", l.w.cols}, {"data", l.w.data}});
    return j.dump();
}

Mlp Mlp::from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    Mlp model = make_mlp(j.at("widths").get<std::vector<std::size_t>>());
    const auto& layers = j.at("layers");
    if (layers.size() != model.layers.size())
        throw std::invalid_argument("Mlp::from_json: layer count mismatch");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto data = layers[l].at("data").get<std::vector<double>>();
        if (data.size() != model.layers[l].w.data.size())
            throw std::invalid_argument("Mlp::from_json: layer size mismatch");
        model.layers[l].w.data = std::move(data);
    }
    return model;
}

Mlp make_mlp(const std::vector<std::size_t>& widths) {
    if (widths.size() < 2)
        throw std::invalid_argument("make_mlp: need at least input and output widths");
    for (std::size_t w : widths)
        if (w == 0) throw std::invalid_argument("make_mlp: zero width");
    Mlp model;
    model.widths = widths;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        model.layers.emplace_back(widths[l], widths[l + 1]);
    return model;
}

Mlp init_he(const std::vector<std::size_t>& widths, std::uint64_t seed) {
    Mlp model = make_mlp(widths);
    Rng rng(seed);
    for (auto& layer : model.layers) {
        const double stddev = std::sqrt(2.0 / static_cast<double>(layer.in));
        for (std::size_t r = 0; r < layer.in; ++r)
            for (std::size_t j = 0; j < layer.out; ++j) layer.w(r, j) = rng.normal(0.0, stddev);
        // constant-input row stays zero
    }
    return model;
}

void Gradients::match(const Mlp& model) {
    if (gw.size() != model.layers.size()) gw.resize(model.layers.size());
    for (std::size_t l = 0; l < gw.size(); ++l) {
        const auto& w = model.layers[l].w;
        if (gw[l].rows != w.rows || gw[l].cols != w.cols) gw[l] = Matrix(w.rows, w.cols);
    }
}

std::size_t Gradients::flat_size() const {
    std::size_t total = 0;
    for (const auto& g : gw) total += g.data.size();
    return total;
}

void Gradients::flatten_to(std::vector<float>& out) const {
    out.clear();
    out.reserve(flat_size());
    for (const auto& g : gw)
        for (double v : g.data) out.push_back(static_cast<float>(v));
}

void Workspace::match(const Mlp& model, std::size_t batch_size) {
    const std::size_t depth = model.layers.size();
    act.resize(depth + 1);
    pre.resize(depth);
    delta.resize(depth);
    wt.resize(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        const auto& layer = model.layers[l];
        if (pre[l].rows != batch_size || pre[l].cols != layer.out)
            pre[l] = Matrix(batch_size, layer.out);
        if (act[l + 1].rows != batch_size || act[l + 1].cols != layer.out)
            act[l + 1] = Matrix(batch_size, layer.out);
        if (delta[l].rows != batch_size || delta[l].cols != layer.out)
            delta[l] = Matrix(batch_size, layer.out);
        if (wt[l].rows != layer.out || wt[l].cols != layer.in)
            wt[l] = Matrix(layer.out, layer.in);
    }
}

namespace {

// forward pass into the workspace; act[0] aliases nothing, inputs are read directly
void forward_pass(const Mlp& model, const Matrix& inputs, Workspace& ws) {
    const std::size_t depth = model.layers.size();
    const Matrix* current = &inputs;
    for (std::size_t l = 0; l < depth; ++l) {
        affine_forward(*current, model.layers[l], ws.pre[l]);
        if (l + 1 < depth) {
            relu_inplace(ws.pre[l], ws.act[l + 1]);
            current = &ws.act[l + 1];
        }
    }
}

// loss at the head plus dL/d(logits) into ws.delta.back()
double head_loss(const Matrix& out, const Batch& batch, LossKind loss, Matrix& dout) {
    const std::size_t n = out.rows;
    const std::size_t k = out.cols;
    const double inv_n = 1.0 / static_cast<double>(n);
    double total = 0.0;
    if (loss == LossKind::Square) {
        if (batch.targets.rows != n || batch.targets.cols != k)
            throw std::invalid_argument("loss_and_grad: target shape mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            const double* oi = out.row(i);
            const double* ti = batch.targets.row(i);
            double* di = dout.row(i);
            for (std::size_t c = 0; c < k; ++c) {
                const double r = oi[c] - ti[c];
                total += r * r;
                di[c] = r * inv_n;
            }
        }
        return 0.5 * total * inv_n;
    }
    if (batch.labels.size() != n)
        throw std::invalid_argument("loss_and_grad: label count mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        const double* oi = out.row(i);
        double* di = dout.row(i);
        const int y = batch.labels[i];
        if (y < 1 || static_cast<std::size_t>(y) > k)
            throw std::invalid_argument("loss_and_grad: label outside [k]");
        double zmax = oi[0];
        for (std::size_t c = 1; c < k; ++c) zmax = std::max(zmax, oi[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += std::exp(oi[c] - zmax);
        const double lse = std::log(sum) + zmax;
        total += lse - oi[y - 1];
        for (std::size_t c = 0; c < k; ++c) {
            const double p = std::exp(oi[c] - lse);
            di[c] = (p - (static_cast<std::size_t>(y - 1) == c ? 1.0 : 0.0)) * inv_n;
        }
    }
    return total * inv_n;
}

// gw = act^T * delta with the bias row collecting plain column sums
void layer_gradient(const Matrix& act, const Matrix& delta, Matrix& gw) {
    gw.fill(0.0);
    const std::size_t n = act.rows;
    const std::size_t in = act.cols;
    const std::size_t out = delta.cols;
    for (std::size_t i = 0; i < n; ++i) {
        const double* ai = act.row(i);
        const double* di = delta.row(i);
        for (std::size_t l = 0; l < in; ++l) {
            const double s = ai[l];
            double* gl = gw.row(l);
            for (std::size_t j = 0; j < out; ++j) gl[j] += s * di[j];
        }
        double* gb = gw.row(in);
        for (std::size_t j = 0; j < out; ++j) gb[j] += di[j];
    }
}

} // namespace

double loss_and_grad(const Mlp& model, const Batch& batch, LossKind loss,
                     Gradients& grads, Workspace& ws) {
    if (batch.inputs.cols != model.input_dim())
        throw std::invalid_argument("loss_and_grad: input dimension mismatch");
    const std::size_t depth = model.layers.size();
    grads.match(model);
    ws.match(model, batch.n());
    forward_pass(model, batch.inputs, ws);

    const double loss_value = head_loss(ws.pre[depth - 1], batch, loss, ws.delta[depth - 1]);
    if (!std::isfinite(loss_value)) return loss_value;

    for (std::size_t l = depth; l-- > 0;) {
        const Matrix& input_act = l == 0 ? batch.inputs : ws.act[l];
        layer_gradient(input_act, ws.delta[l], grads.gw[l]);
        if (l == 0) break;
        // delta[l-1] = (delta[l] * W_l^T) masked by ReLU
        const Layer& layer = model.layers[l];
        Matrix& wt = ws.wt[l];
        for (std::size_t r = 0; r < layer.in; ++r)
            for (std::size_t j = 0; j < layer.out; ++j) wt(j, r) = layer.w(r, j);
        Matrix& dprev = ws.delta[l - 1];
        dprev.fill(0.0);
        const Matrix& dcur = ws.delta[l];
        for (std::size_t i = 0; i < dcur.rows; ++i) {
            const double* di = dcur.row(i);
            double* pi = dprev.row(i);
            for (std::size_t j = 0; j < layer.out; ++j) {
                const double s = di[j];
                const double* wj = wt.row(j);
                for (std::size_t r = 0; r < layer.in; ++r) pi[r] += s * wj[r];
            }
        }
        const Matrix& pre = ws.pre[l - 1];
        for (std::size_t idx = 0; idx < dprev.data.size(); ++idx)
            if (pre.data[idx] <= 0.0) dprev.data[idx] = 0.0;
    }
    return loss_value;
}

double loss_only(const Mlp& model, const Batch& batch, LossKind loss, Workspace& ws) {
    ws.match(model, batch.n());
    forward_pass(model, batch.inputs, ws);
    const std::size_t depth = model.layers.size();
    return head_loss(ws.pre[depth - 1], batch, loss, ws.delta[depth - 1]);
}

Matrix forward(const Mlp& model, const Matrix& inputs) {
    if (inputs.cols != model.input_dim())
        throw std::invalid_argument("forward: input dimension mismatch");
    Workspace ws;
    ws.match(model, inputs.rows);
    forward_pass(model, inputs, ws);
    return ws.pre.back();
}

double validation_rmse(const Mlp& model, const Batch& batch, LossKind loss,
                       const std::vector<double>& decode_midpoints) {
    const Matrix out = forward(model, batch.inputs);
    if (batch.real_values.size() != out.rows)
        throw std::invalid_argument("validation_rmse: missing real labels");
    double sq = 0.0;
    if (loss == LossKind::Square) {
        for (std::size_t i = 0; i < out.rows; ++i) {
            const double r = out(i, 0) - batch.real_values[i];
            sq += r * r;
        }
    } else {
        const BinSpec bins(decode_midpoints);
        std::vector<double> scores(out.cols);
        for (std::size_t i = 0; i < out.rows; ++i) {
            std::copy(out.row(i), out.row(i) + out.cols, scores.begin());
            const double pred = decode_expectation(scores, bins);
            const double r = pred - batch.real_values[i];
            sq += r * r;
        }
    }
    return std::sqrt(sq / static_cast<double>(out.rows));
}

namespace {

struct GdRun {
    TrainResult result;
    bool usable = false;
};

GdRun run_gradient_descent(const Mlp& init, const Batch& train_set, const Batch& val_set,
                           const TrainConfig& config, double lr) {
    GdRun run;
    TrainResult& res = run.result;
    Mlp model = init;
    Gradients grads;
    Workspace ws_train, ws_val;

    double best_train = std::numeric_limits<double>::infinity();
    double best_val = std::numeric_limits<double>::infinity();
    res.best_val_rmse = std::numeric_limits<double>::infinity();
    long stale = 0;

    std::vector<float> flat;
    for (long epoch = 0; epoch < config.max_epochs; ++epoch) {
        const double train_loss = loss_and_grad(model, train_set, config.loss, grads, ws_train);
        if (!std::isfinite(train_loss)) {
            res.diverged = true;
            break;
        }
        if (epoch < config.record_gradients) {
            grads.flatten_to(flat);
            res.recorded_gradients.push_back(flat);
        }
        const double val_loss = loss_only(model, val_set, config.loss, ws_val);
        if (!std::isfinite(val_loss)) {
            res.diverged = true;
            break;
        }
        res.train_losses.push_back(train_loss);
        res.val_losses.push_back(val_loss);

        const double val_rmse =
            validation_rmse(model, val_set, config.loss, config.decode_midpoints);
        if (val_rmse < res.best_val_rmse) {
            res.best_val_rmse = val_rmse;
            res.best_val_loss = val_loss;
            res.best_epoch = epoch;
            res.best_model = model;
        }

        bool improved = false;
        if (train_loss < best_train) {
            best_train = train_loss;
            improved = true;
        }
        if (val_loss < best_val) {
            best_val = val_loss;
            improved = true;
        }
        stale = improved ? 0 : stale + 1;
        res.epochs = epoch + 1;
        if (stale >= config.patience) break;

        for (std::size_t l = 0; l < model.layers.size(); ++l) {
            double* w = model.layers[l].w.data.data();
            const double* g = grads.gw[l].data.data();
            const std::size_t len = model.layers[l].w.data.size();
            for (std::size_t idx = 0; idx < len; ++idx) w[idx] -= lr * g[idx];
        }
    }
    res.selected_lr = lr;
    run.usable = !res.diverged && res.best_epoch >= 0;
    return run;
}

} // namespace

TrainResult train(const Mlp& model, const Batch& train_set, const Batch& val_set,
                  const TrainConfig& config) {
    if (config.lr_grid.empty())
        throw std::invalid_argument("train: learning-rate grid is empty");
    if (config.patience < 1)
        throw std::invalid_argument("train: patience must be >= 1");
    if (config.loss == LossKind::CrossEntropy && config.decode_midpoints.empty())
        throw std::invalid_argument("train: cross-entropy needs decode midpoints");

    TrainResult best;
    bool have = false;
    for (double lr : config.lr_grid) {
        GdRun run = run_gradient_descent(model, train_set, val_set, config, lr);
        if (!run.usable) continue;
        if (!have || run.result.best_val_rmse < best.best_val_rmse) {
            best = std::move(run.result);
            have = true;
        }
    }
    if (!have) throw std::runtime_error("train: every learning rate diverged");
    return best;
}

} // namespace binbias

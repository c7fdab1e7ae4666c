#include "volcast/tcn.hpp"

#include <cmath>
#include <random>
#include <string>

#include "volcast/errors.hpp"

namespace volcast::tcn {

namespace {

void conv_forward(const double* in, int in_channels, int steps, const ConvLayer& layer,
                  double* pre_act, double* out) {
    const int T = steps;
    const int k = layer.kernel;
    const int d = layer.dilation;
    for (int f = 0; f < layer.out_channels; ++f) {
        double* z = pre_act + static_cast<std::size_t>(f) * T;
        const double bias = layer.biases[static_cast<std::size_t>(f)];
        for (int t = 0; t < T; ++t) z[t] = bias;
        for (int c = 0; c < layer.in_channels; ++c) {
            const double* x = in + static_cast<std::size_t>(c) * T;
            for (int j = 0; j < k; ++j) {
                const double w = layer.w(f, c, j);
                const int off = (k - 1 - j) * d;
                if (off >= T) continue;
                const double* xs = x;
                double* zs = z + off;
                const int n = T - off;
                for (int t = 0; t < n; ++t) zs[t] += w * xs[t];
            }
        }
        double* y = out + static_cast<std::size_t>(f) * T;
        if (layer.activation == Activation::kRelu) {
            for (int t = 0; t < T; ++t) y[t] = z[t] > 0.0 ? z[t] : 0.0;
        } else {
            for (int t = 0; t < T; ++t) y[t] = z[t];
        }
    }
}

void ensure_shape(ChannelSeq& s, int channels, int steps) {
    if (s.channels != channels || s.steps != steps) {
        s.channels = channels;
        s.steps = steps;
        s.values.assign(static_cast<std::size_t>(channels) * steps, 0.0);
    }
}

} // namespace

ChannelSeq causal_conv1d(const ChannelSeq& input, const ConvLayer& layer) {
    if (input.channels != layer.in_channels) {
        throw ConfigError("causal_conv1d: input has " + std::to_string(input.channels) +
                          " channels, layer expects " + std::to_string(layer.in_channels));
    }
    if (input.steps <= 0) throw ConfigError("causal_conv1d: empty input");
    ChannelSeq pre = ChannelSeq::zeros(layer.out_channels, input.steps);
    ChannelSeq out = ChannelSeq::zeros(layer.out_channels, input.steps);
    conv_forward(input.values.data(), input.channels, input.steps, layer, pre.values.data(),
                 out.values.data());
    return out;
}

TcnModel TcnModel::make(int hidden_layers, int filters, int kernel, int input_length,
                        std::uint64_t seed) {
    if (hidden_layers < 1 || filters < 1 || kernel < 1 || input_length < 1) {
        throw ConfigError("TcnModel::make: all architecture parameters must be positive");
    }
    std::mt19937_64 rng(seed);
    TcnModel model;
    model.input_length = input_length;
    auto init_layer = [&rng](ConvLayer& layer) {
        layer.weights.resize(static_cast<std::size_t>(layer.out_channels) * layer.in_channels *
                             layer.kernel);
        layer.biases.assign(static_cast<std::size_t>(layer.out_channels), 0.0);
        const double fan_in = static_cast<double>(layer.in_channels) * layer.kernel;
        const double fan_out = static_cast<double>(layer.out_channels) * layer.kernel;
        const double bound = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& w : layer.weights) w = dist(rng);
    };
    int dilation = 1;
    for (int l = 0; l < hidden_layers; ++l) {
        ConvLayer layer;
        layer.in_channels = l == 0 ? 1 : filters;
        layer.out_channels = filters;
        layer.kernel = kernel;
        layer.dilation = dilation;
        layer.activation = Activation::kRelu;
        init_layer(layer);
        model.layers.push_back(std::move(layer));
        dilation *= 2;
    }
    ConvLayer head;
    head.in_channels = filters;
    head.out_channels = 1;
    head.kernel = 1;
    head.dilation = 1;
    head.activation = Activation::kLinear;
    init_layer(head);
    model.layers.push_back(std::move(head));
    return model;
}

int TcnModel::receptive_field() const {
    int field = 1;
    for (const auto& layer : layers) field += (layer.kernel - 1) * layer.dilation;
    return field;
}

std::size_t TcnModel::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) n += layer.parameter_count();
    return n;
}

void forward_into(const TcnModel& model, std::span<const double> input, ForwardTape& tape) {
    if (static_cast<int>(input.size()) != model.input_length) {
        throw ConfigError("forward: input length " + std::to_string(input.size()) +
                          " != model input length " + std::to_string(model.input_length));
    }
    const int T = model.input_length;
    const std::size_t L = model.layers.size();
    tape.activations.resize(L + 1);
    tape.pre_activations.resize(L);
    ensure_shape(tape.activations[0], 1, T);
    std::copy(input.begin(), input.end(), tape.activations[0].values.begin());
    for (std::size_t l = 0; l < L; ++l) {
        const auto& layer = model.layers[l];
        ensure_shape(tape.pre_activations[l], layer.out_channels, T);
        ensure_shape(tape.activations[l + 1], layer.out_channels, T);
        conv_forward(tape.activations[l].values.data(), layer.in_channels, T, layer,
                     tape.pre_activations[l].values.data(),
                     tape.activations[l + 1].values.data());
    }
}

ForwardResult forward(const TcnModel& model, std::span<const double> input) {
    ForwardResult result;
    forward_into(model, input, result.tape);
    result.output = result.tape.activations.back().values;
    return result;
}

std::vector<double> forward_sequence(const TcnModel& model, std::span<const double> input) {
    if (input.empty()) throw ConfigError("forward_sequence: empty input");
    ChannelSeq x;
    x.channels = 1;
    x.steps = static_cast<int>(input.size());
    x.values.assign(input.begin(), input.end());
    for (const auto& layer : model.layers) x = causal_conv1d(x, layer);
    return x.values;
}

double mse_loss_seq(std::span<const double> output, std::span<const double> target) {
    if (output.size() != target.size() || output.empty()) {
        throw ConfigError("mse_loss_seq: length mismatch");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < output.size(); ++i) {
        const double d = output[i] - target[i];
        sum += d * d;
    }
    return sum / static_cast<double>(output.size());
}

std::vector<double> mse_loss_seq_grad(std::span<const double> output,
                                      std::span<const double> target) {
    if (output.size() != target.size() || output.empty()) {
        throw ConfigError("mse_loss_seq_grad: length mismatch");
    }
    std::vector<double> grad(output.size());
    const double scale = 2.0 / static_cast<double>(output.size());
    for (std::size_t i = 0; i < output.size(); ++i) grad[i] = scale * (output[i] - target[i]);
    return grad;
}

ParamTensors ParamTensors::zeros_like(const TcnModel& model) {
    ParamTensors p;
    p.weights.reserve(model.layers.size());
    p.biases.reserve(model.layers.size());
    for (const auto& layer : model.layers) {
        p.weights.emplace_back(layer.weights.size(), 0.0);
        p.biases.emplace_back(layer.biases.size(), 0.0);
    }
    return p;
}

void ParamTensors::fill(double v) {
    for (auto& w : weights) std::fill(w.begin(), w.end(), v);
    for (auto& b : biases) std::fill(b.begin(), b.end(), v);
}

void ParamTensors::accumulate(const ParamTensors& other, double s) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i) weights[l][i] += s * other.weights[l][i];
        for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += s * other.biases[l][i];
    }
}

void ParamTensors::scale(double s) {
    for (auto& w : weights)
        for (auto& v : w) v *= s;
    for (auto& b : biases)
        for (auto& v : b) v *= s;
}

bool ParamTensors::all_finite() const {
    for (const auto& w : weights)
        for (double v : w)
            if (!std::isfinite(v)) return false;
    for (const auto& b : biases)
        for (double v : b)
            if (!std::isfinite(v)) return false;
    return true;
}

double ParamTensors::l2_norm() const {
    double sum = 0.0;
    for (const auto& w : weights)
        for (double v : w) sum += v * v;
    for (const auto& b : biases)
        for (double v : b) sum += v * v;
    return std::sqrt(sum);
}

void backward_into(const TcnModel& model, const ForwardTape& tape,
                   std::span<const double> output_grad, Gradients& out,
                   BackwardScratch& scratch) {
    const std::size_t L = model.layers.size();
    if (tape.activations.size() != L + 1 || tape.pre_activations.size() != L) {
        throw ConfigError("backward: tape does not match model");
    }
    const int T = tape.activations[0].steps;
    if (static_cast<int>(output_grad.size()) != T ||
        tape.activations[L].channels != model.layers[L - 1].out_channels) {
        throw ConfigError("backward: stale or mismatched tape");
    }
    if (model.layers.back().out_channels != 1) {
        throw ConfigError("backward: expected a single-filter output layer");
    }

    int max_ch = 1;
    for (const auto& layer : model.layers) {
        max_ch = std::max({max_ch, layer.in_channels, layer.out_channels});
    }
    ensure_shape(scratch.a, max_ch, T);
    ensure_shape(scratch.b, max_ch, T);

    // grad wrt the current layer's output, post activation
    ChannelSeq* up = &scratch.a;
    ChannelSeq* down = &scratch.b;
    up->channels = model.layers[L - 1].out_channels;
    std::copy(output_grad.begin(), output_grad.end(), up->values.begin());

    std::vector<double> dz(static_cast<std::size_t>(T));
    for (std::size_t li = L; li-- > 0;) {
        const auto& layer = model.layers[li];
        const auto& x = tape.activations[li];
        const auto& pre = tape.pre_activations[li];
        const int k = layer.kernel;
        const int d = layer.dilation;
        double* dw = out.weights[li].data();
        double* db = out.biases[li].data();

        down->channels = layer.in_channels;
        std::fill(down->values.begin(),
                  down->values.begin() + static_cast<std::size_t>(layer.in_channels) * T, 0.0);

        for (int f = 0; f < layer.out_channels; ++f) {
            const double* g = up->row(f);
            if (layer.activation == Activation::kRelu) {
                const double* z = pre.row(f);
                for (int t = 0; t < T; ++t) dz[t] = z[t] > 0.0 ? g[t] : 0.0;
            } else {
                std::copy(g, g + T, dz.begin());
            }
            double bias_sum = 0.0;
            for (int t = 0; t < T; ++t) bias_sum += dz[t];
            db[f] += bias_sum;
            for (int c = 0; c < layer.in_channels; ++c) {
                const double* xc = x.row(c);
                double* dxc = down->row(c);
                for (int j = 0; j < k; ++j) {
                    const int off = (k - 1 - j) * d;
                    if (off >= T) continue;
                    const int n = T - off;
                    const double w = layer.w(f, c, j);
                    const double* zs = dz.data() + off;
                    double acc = 0.0;
                    for (int t = 0; t < n; ++t) {
                        acc += zs[t] * xc[t];
                        dxc[t] += w * zs[t];
                    }
                    dw[(static_cast<std::size_t>(f) * layer.in_channels + c) * k + j] += acc;
                }
            }
        }
        std::swap(up, down);
    }
}

Gradients backward(const TcnModel& model, const ForwardTape& tape,
                   std::span<const double> output_grad) {
    Gradients grads = Gradients::zeros_like(model);
    BackwardScratch scratch;
    backward_into(model, tape, output_grad, grads, scratch);
    return grads;
}

AdadeltaState AdadeltaState::init(const TcnModel& model, double rho, double epsilon) {
    AdadeltaState state;
    state.rho = rho;
    state.epsilon = epsilon;
    state.accum_grad_sq = ParamTensors::zeros_like(model);
    state.accum_update_sq = ParamTensors::zeros_like(model);
    return state;
}

double adadelta_update(double& param, double grad, double& accum_grad_sq,
                       double& accum_update_sq, double rho, double epsilon) {
    accum_grad_sq = rho * accum_grad_sq + (1.0 - rho) * grad * grad;
    const double delta =
        -std::sqrt(accum_update_sq + epsilon) / std::sqrt(accum_grad_sq + epsilon) * grad;
    accum_update_sq = rho * accum_update_sq + (1.0 - rho) * delta * delta;
    param += delta;
    return delta;
}

bool adadelta_step(TcnModel& model, const Gradients& grads, AdadeltaState& state) {
    if (!grads.all_finite()) return false;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        auto& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) {
            adadelta_update(layer.weights[i], grads.weights[l][i], state.accum_grad_sq.weights[l][i],
                            state.accum_update_sq.weights[l][i], state.rho, state.epsilon);
        }
        for (std::size_t i = 0; i < layer.biases.size(); ++i) {
            adadelta_update(layer.biases[i], grads.biases[l][i], state.accum_grad_sq.biases[l][i],
                            state.accum_update_sq.biases[l][i], state.rho, state.epsilon);
        }
    }
    return true;
}

double predict_next(const TcnModel& model, std::span<const double> raw_window, double mean,
                    double stddev) {
    if (!(stddev > 0.0)) throw ConfigError("predict_next: stddev must be positive");
    if (static_cast<int>(raw_window.size()) != model.input_length) {
        throw ConfigError("predict_next: window length mismatch");
    }
    std::vector<double> standardized(raw_window.size());
    for (std::size_t i = 0; i < raw_window.size(); ++i) {
        standardized[i] = (raw_window[i] - mean) / stddev;
    }
    const auto result = forward(model, standardized);
    return result.output.back() * stddev + mean;
}

} // namespace volcast::tcn

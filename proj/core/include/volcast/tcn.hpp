#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace volcast::tcn {

enum class Activation : std::uint8_t { kRelu = 0, kLinear = 1 };

// One dilated causal 1-D convolution. Weight layout is [out][in][kernel]
// with the kernel index fastest; tap j reaches (kernel-1-j)*dilation steps
// into the past, so the last tap is the current step.
struct ConvLayer {
    int in_channels = 1;
    int out_channels = 1;
    int kernel = 1;
    int dilation = 1;
    Activation activation = Activation::kLinear;
    std::vector<double> weights;
    std::vector<double> biases;

    double& w(int f, int c, int j) {
        return weights[(static_cast<std::size_t>(f) * in_channels + c) * kernel + j];
    }
    double w(int f, int c, int j) const {
        return weights[(static_cast<std::size_t>(f) * in_channels + c) * kernel + j];
    }
    std::size_t parameter_count() const { return weights.size() + biases.size(); }
};

// [channels x steps] sequence, steps contiguous per channel.
struct ChannelSeq {
    int channels = 0;
    int steps = 0;
    std::vector<double> values;

    static ChannelSeq zeros(int channels, int steps) {
        ChannelSeq s;
        s.channels = channels;
        s.steps = steps;
        s.values.assign(static_cast<std::size_t>(channels) * steps, 0.0);
        return s;
    }
    double* row(int c) { return values.data() + static_cast<std::size_t>(c) * steps; }
    const double* row(int c) const { return values.data() + static_cast<std::size_t>(c) * steps; }
};

// Causal dilated convolution with past-side zero padding: the output at
// step t depends on inputs at steps <= t only, and output length equals
// input length.
ChannelSeq causal_conv1d(const ChannelSeq& input, const ConvLayer& layer);

struct TcnModel {
    std::vector<ConvLayer> layers;
    int input_length = 64;

    // hidden_layers dilated causal layers (dilation 2^(l-1), relu) followed
    // by a width-1 single-filter linear output layer. Weights drawn uniform
    // in +-sqrt(6/(fan_in+fan_out)), biases zero, deterministic in seed.
    static TcnModel make(int hidden_layers, int filters, int kernel, int input_length,
                         std::uint64_t seed);
    static TcnModel standard(std::uint64_t seed = 0) { return make(6, 8, 2, 64, seed); }

    // 1 + sum over layers of (kernel-1)*dilation.
    int receptive_field() const;
    std::size_t parameter_count() const;
};

// Everything backward() needs: the input to every layer and every
// pre-activation. activations[0] is the network input, activations[l+1]
// the output of layer l.
struct ForwardTape {
    std::vector<ChannelSeq> activations;
    std::vector<ChannelSeq> pre_activations;
};

struct ForwardResult {
    std::vector<double> output;
    ForwardTape tape;
};

// Runs the network on one input window (length must equal model.input_length).
ForwardResult forward(const TcnModel& model, std::span<const double> input);

// Same composition on an arbitrary-length single-channel input, output only.
std::vector<double> forward_sequence(const TcnModel& model, std::span<const double> input);

// Allocation-free variant for hot loops; tape buffers are reused.
void forward_into(const TcnModel& model, std::span<const double> input, ForwardTape& tape);

double mse_loss_seq(std::span<const double> output, std::span<const double> target);
std::vector<double> mse_loss_seq_grad(std::span<const double> output, std::span<const double> target);

// Per-parameter buffers shaped like a model's weights and biases.
struct ParamTensors {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    static ParamTensors zeros_like(const TcnModel& model);
    void fill(double v);
    void accumulate(const ParamTensors& other, double scale);
    void scale(double s);
    bool all_finite() const;
    double l2_norm() const;
};
using Gradients = ParamTensors;

// Exact gradients of the sequence loss whose output-gradient is given,
// with respect to every weight and bias. ReLU subgradient at 0 is 0.
Gradients backward(const TcnModel& model, const ForwardTape& tape,
                   std::span<const double> output_grad);

struct BackwardScratch {
    ChannelSeq a, b;
};

// Accumulates this window's parameter gradients into `out`.
void backward_into(const TcnModel& model, const ForwardTape& tape,
                   std::span<const double> output_grad, Gradients& out,
                   BackwardScratch& scratch);

// Adadelta accumulator state; both running averages start at zero and the
// update needs no learning rate.
struct AdadeltaState {
    double rho = 0.95;
    double epsilon = 1e-6;
    ParamTensors accum_grad_sq;
    ParamTensors accum_update_sq;

    static AdadeltaState init(const TcnModel& model, double rho = 0.95, double epsilon = 1e-6);
};

// E[g2] <- rho E[g2] + (1-rho) g2;  dx = -RMS[dx]/RMS[g] * g;
// E[dx2] <- rho E[dx2] + (1-rho) dx2;  x <- x + dx.  Returns dx.
double adadelta_update(double& param, double grad, double& accum_grad_sq,
                       double& accum_update_sq, double rho, double epsilon);

// Applies one Adadelta step to every parameter. If any gradient is
// non-finite the step is skipped entirely and false is returned.
bool adadelta_step(TcnModel& model, const Gradients& grads, AdadeltaState& state);

// Standardizes a raw window with the supplied training constants, runs the
// network, reads the last output position (the one-step-ahead forecast) and
// maps it back to the raw scale.
double predict_next(const TcnModel& model, std::span<const double> raw_window, double mean,
                    double stddev);

} // namespace volcast::tcn

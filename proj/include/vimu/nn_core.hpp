#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace vimu::nn {

/// Dense (time, channels) activation block, row-major in time.
struct ValueBlock {
    int time = 0;
    int channels = 0;
    std::vector<double> v;

    ValueBlock() = default;
    ValueBlock(int t, int c) : time(t), channels(c), v(static_cast<size_t>(t) * c, 0.0) {}

    double& at(int t, int c) { return v[static_cast<size_t>(t) * channels + c]; }
    double at(int t, int c) const { return v[static_cast<size_t>(t) * channels + c]; }
    size_t size() const { return v.size(); }
};

using ParamVisitor = std::function<void(std::vector<double>& params, std::vector<double>& grads)>;

class Layer {
public:
    virtual ~Layer() = default;
    virtual ValueBlock forward(const ValueBlock& in) = 0;
    virtual ValueBlock backward(const ValueBlock& grad_out) = 0;
    virtual void visit_params(const ParamVisitor&) {}
    virtual void set_training(bool) {}
};

/// 1-D convolution over time with same padding and optional dilation.
/// Weight layout: w[k * in_c * out_c + ic * out_c + oc].
class Conv1d : public Layer {
public:
    Conv1d(int in_channels, int out_channels, int width, int dilation, std::mt19937& rng);

    ValueBlock forward(const ValueBlock& in) override;
    ValueBlock backward(const ValueBlock& grad_out) override;
    void visit_params(const ParamVisitor& fn) override;

    int in_channels() const { return in_c_; }
    int out_channels() const { return out_c_; }

private:
    int in_c_, out_c_, width_, dilation_;
    std::vector<double> w_, b_;
    std::vector<double> gw_, gb_;
    ValueBlock last_in_;
};

class Relu : public Layer {
public:
    ValueBlock forward(const ValueBlock& in) override;
    ValueBlock backward(const ValueBlock& grad_out) override;

private:
    ValueBlock last_in_;
};

/// Inverted dropout; identity when not training or rate == 0.
class Dropout : public Layer {
public:
    Dropout(double rate, std::mt19937& rng);

    ValueBlock forward(const ValueBlock& in) override;
    ValueBlock backward(const ValueBlock& grad_out) override;
    void set_training(bool training) override { training_ = training; }

private:
    double rate_;
    std::mt19937* rng_;
    bool training_ = false;
    std::vector<double> mask_;
};

/// Residual unit of two dilated same-padded convolutions. When channel
/// counts differ the skip path goes through a width-1 convolution.
class TcnBlock : public Layer {
public:
    TcnBlock(int in_channels, int out_channels, int width, int dilation,
             double dropout_rate, std::mt19937& rng);

    ValueBlock forward(const ValueBlock& in) override;
    ValueBlock backward(const ValueBlock& grad_out) override;
    void visit_params(const ParamVisitor& fn) override;
    void set_training(bool training) override;

private:
    Conv1d conv1_, conv2_;
    Relu relu1_, relu2_;
    Dropout drop1_, drop2_;
    std::unique_ptr<Conv1d> proj_;  // null when in == out channels
};

/// Sequential stack of layers with flat parameter access for the
/// optimizer and checkpointing.
class Network {
public:
    Network() = default;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }

    ValueBlock forward(const ValueBlock& in);
    void backward(const ValueBlock& grad_out);
    void zero_grad();
    void set_training(bool training);

    size_t param_count() const;
    std::vector<double> flat_params() const;
    void set_flat_params(std::span<const double> params);
    std::vector<double> flat_grads() const;
    void visit_params(const ParamVisitor& fn);

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Network topology descriptor; fully determines the layer stack given
/// the input channel count.
struct Topology {
    int kernel_width = 3;
    std::vector<int> dilations = {1, 2, 4, 8};
    std::vector<int> channels = {64, 64, 64, 32};
    double dropout = 0.2;
    int out_channels = 1;
};

/// Stack of TCN blocks plus a final width-1 convolution to out_channels.
/// Dropout applies to every block except the first.
Network build_tcn(int in_channels, const Topology& topo, std::mt19937& rng);

struct LossResult {
    double value = 0.0;
    ValueBlock grad;
};

LossResult mse_loss(const ValueBlock& pred, const ValueBlock& target);
LossResult softmax_cross_entropy(const ValueBlock& logits, const std::vector<int>& labels);

struct AdamConfig {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    Adam(size_t param_count, AdamConfig cfg = {});

    /// One bias-corrected update over the network's parameters in
    /// declaration order.
    void step(Network& net);

    int64_t step_count() const { return step_; }

private:
    AdamConfig cfg_;
    std::vector<double> m_, v_;
    int64_t step_ = 0;
};

struct TrainConfig {
    int max_epochs = 500;
    int patience = 25;
    int batch_size = 64;
    uint64_t seed = 0;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    int best_epoch = -1;     // 1-based
    int stopped_epoch = -1;  // 1-based
};

/// Epoch loop with early stopping. `train_batch` runs forward/backward
/// and the optimizer step over the given sample indices and returns the
/// mean batch loss; `validate` returns the validation loss. The best
/// validation epoch's parameters are restored before returning.
TrainHistory train_loop(Network& net, size_t n_train,
                        const std::function<double(std::span<const size_t>)>& train_batch,
                        const std::function<double()>& validate,
                        const TrainConfig& cfg);

}  // namespace vimu::nn

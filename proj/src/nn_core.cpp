#include "vimu/nn_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace vimu::nn {

// ---------------------------------------------------------------------------
// Conv1d

Conv1d::Conv1d(int in_channels, int out_channels, int width, int dilation, std::mt19937& rng)
    : in_c_(in_channels), out_c_(out_channels), width_(width), dilation_(dilation) {
    if (width % 2 == 0) throw std::invalid_argument("kernel width must be odd");
    if (dilation < 1) throw std::invalid_argument("dilation must be >= 1");
    w_.resize(static_cast<size_t>(width) * in_c_ * out_c_);
    b_.assign(out_c_, 0.0);
    gw_.assign(w_.size(), 0.0);
    gb_.assign(b_.size(), 0.0);
    // He init over the receptive fan-in.
    const double stddev = std::sqrt(2.0 / (static_cast<double>(width) * in_c_));
    std::normal_distribution<double> dist(0.0, stddev);
    for (double& w : w_) w = dist(rng);
}

ValueBlock Conv1d::forward(const ValueBlock& in) {
    if (in.channels != in_c_) {
        throw std::invalid_argument("Conv1d: expected " + std::to_string(in_c_) +
                                    " input channels, got " + std::to_string(in.channels));
    }
    last_in_ = in;
    ValueBlock out(in.time, out_c_);
    const int half = (width_ - 1) / 2;
    for (int t = 0; t < in.time; ++t) {
        double* orow = &out.v[static_cast<size_t>(t) * out_c_];
        for (int oc = 0; oc < out_c_; ++oc) orow[oc] = b_[oc];
        for (int k = 0; k < width_; ++k) {
            const int src = t + (k - half) * dilation_;
            if (src < 0 || src >= in.time) continue;  // zero padding
            const double* irow = &in.v[static_cast<size_t>(src) * in_c_];
            const double* wk = &w_[static_cast<size_t>(k) * in_c_ * out_c_];
            for (int ic = 0; ic < in_c_; ++ic) {
                const double x = irow[ic];
                if (x == 0.0) continue;
                const double* wrow = &wk[static_cast<size_t>(ic) * out_c_];
                for (int oc = 0; oc < out_c_; ++oc) orow[oc] += x * wrow[oc];
            }
        }
    }
    return out;
}

ValueBlock Conv1d::backward(const ValueBlock& grad_out) {
    const ValueBlock& in = last_in_;
    ValueBlock grad_in(in.time, in_c_);
    const int half = (width_ - 1) / 2;
    for (int t = 0; t < in.time; ++t) {
        const double* grow = &grad_out.v[static_cast<size_t>(t) * out_c_];
        for (int oc = 0; oc < out_c_; ++oc) gb_[oc] += grow[oc];
        for (int k = 0; k < width_; ++k) {
            const int src = t + (k - half) * dilation_;
            if (src < 0 || src >= in.time) continue;
            const double* irow = &in.v[static_cast<size_t>(src) * in_c_];
            double* girow = &grad_in.v[static_cast<size_t>(src) * in_c_];
            double* gwk = &gw_[static_cast<size_t>(k) * in_c_ * out_c_];
            const double* wk = &w_[static_cast<size_t>(k) * in_c_ * out_c_];
            for (int ic = 0; ic < in_c_; ++ic) {
                const double x = irow[ic];
                double acc = 0.0;
                double* gwrow = &gwk[static_cast<size_t>(ic) * out_c_];
                const double* wrow = &wk[static_cast<size_t>(ic) * out_c_];
                for (int oc = 0; oc < out_c_; ++oc) {
                    const double g = grow[oc];
                    gwrow[oc] += g * x;
                    acc += g * wrow[oc];
                }
                girow[ic] += acc;
            }
        }
    }
    return grad_in;
}

void Conv1d::visit_params(const ParamVisitor& fn) {
    fn(w_, gw_);
    fn(b_, gb_);
}

// ---------------------------------------------------------------------------
// Relu

ValueBlock Relu::forward(const ValueBlock& in) {
    last_in_ = in;
    ValueBlock out = in;
    for (double& x : out.v) x = x > 0.0 ? x : 0.0;
    return out;
}

ValueBlock Relu::backward(const ValueBlock& grad_out) {
    ValueBlock grad_in = grad_out;
    for (size_t i = 0; i < grad_in.v.size(); ++i) {
        if (last_in_.v[i] <= 0.0) grad_in.v[i] = 0.0;
    }
    return grad_in;
}

// ---------------------------------------------------------------------------
// Dropout

Dropout::Dropout(double rate, std::mt19937& rng) : rate_(rate), rng_(&rng) {
    if (rate < 0.0 || rate >= 1.0) throw std::invalid_argument("dropout rate must be in [0, 1)");
}

ValueBlock Dropout::forward(const ValueBlock& in) {
    if (!training_ || rate_ == 0.0) {
        mask_.clear();
        return in;
    }
    const double keep = 1.0 - rate_;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    mask_.resize(in.v.size());
    ValueBlock out = in;
    for (size_t i = 0; i < in.v.size(); ++i) {
        mask_[i] = uni(*rng_) < keep ? 1.0 / keep : 0.0;
        out.v[i] *= mask_[i];
    }
    return out;
}

ValueBlock Dropout::backward(const ValueBlock& grad_out) {
    if (mask_.empty()) return grad_out;
    ValueBlock grad_in = grad_out;
    for (size_t i = 0; i < grad_in.v.size(); ++i) grad_in.v[i] *= mask_[i];
    return grad_in;
}

// ---------------------------------------------------------------------------
// TcnBlock

TcnBlock::TcnBlock(int in_channels, int out_channels, int width, int dilation,
                   double dropout_rate, std::mt19937& rng)
    : conv1_(in_channels, out_channels, width, dilation, rng),
      conv2_(out_channels, out_channels, width, dilation, rng),
      drop1_(dropout_rate, rng),
      drop2_(dropout_rate, rng) {
    if (in_channels != out_channels) {
        proj_ = std::make_unique<Conv1d>(in_channels, out_channels, 1, 1, rng);
    }
}

ValueBlock TcnBlock::forward(const ValueBlock& in) {
    ValueBlock h = drop1_.forward(relu1_.forward(conv1_.forward(in)));
    h = drop2_.forward(relu2_.forward(conv2_.forward(h)));
    ValueBlock skip = proj_ ? proj_->forward(in) : in;
    for (size_t i = 0; i < h.v.size(); ++i) h.v[i] += skip.v[i];
    return h;
}

ValueBlock TcnBlock::backward(const ValueBlock& grad_out) {
    ValueBlock g = drop2_.backward(grad_out);
    g = conv2_.backward(relu2_.backward(g));
    g = drop1_.backward(g);
    ValueBlock grad_in = conv1_.backward(relu1_.backward(g));
    ValueBlock grad_skip = proj_ ? proj_->backward(grad_out) : grad_out;
    for (size_t i = 0; i < grad_in.v.size(); ++i) grad_in.v[i] += grad_skip.v[i];
    return grad_in;
}

void TcnBlock::visit_params(const ParamVisitor& fn) {
    conv1_.visit_params(fn);
    conv2_.visit_params(fn);
    if (proj_) proj_->visit_params(fn);
}

void TcnBlock::set_training(bool training) {
    drop1_.set_training(training);
    drop2_.set_training(training);
}

// ---------------------------------------------------------------------------
// Network

ValueBlock Network::forward(const ValueBlock& in) {
    ValueBlock x = in;
    for (auto& layer : layers_) x = layer->forward(x);
    return x;
}

void Network::backward(const ValueBlock& grad_out) {
    ValueBlock g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
}

void Network::zero_grad() {
    visit_params([](std::vector<double>&, std::vector<double>& grads) {
        std::fill(grads.begin(), grads.end(), 0.0);
    });
}

void Network::set_training(bool training) {
    for (auto& layer : layers_) layer->set_training(training);
}

size_t Network::param_count() const {
    size_t n = 0;
    const_cast<Network*>(this)->visit_params(
        [&n](std::vector<double>& p, std::vector<double>&) { n += p.size(); });
    return n;
}

std::vector<double> Network::flat_params() const {
    std::vector<double> out;
    const_cast<Network*>(this)->visit_params([&out](std::vector<double>& p, std::vector<double>&) {
        out.insert(out.end(), p.begin(), p.end());
    });
    return out;
}

void Network::set_flat_params(std::span<const double> params) {
    size_t off = 0;
    visit_params([&](std::vector<double>& p, std::vector<double>&) {
        if (off + p.size() > params.size()) throw std::invalid_argument("flat params too short");
        std::copy(params.begin() + off, params.begin() + off + p.size(), p.begin());
        off += p.size();
    });
    if (off != params.size()) throw std::invalid_argument("flat params size mismatch");
}

std::vector<double> Network::flat_grads() const {
    std::vector<double> out;
    const_cast<Network*>(this)->visit_params([&out](std::vector<double>&, std::vector<double>& g) {
        out.insert(out.end(), g.begin(), g.end());
    });
    return out;
}

void Network::visit_params(const ParamVisitor& fn) {
    for (auto& layer : layers_) layer->visit_params(fn);
}

Network build_tcn(int in_channels, const Topology& topo, std::mt19937& rng) {
    if (topo.dilations.size() != topo.channels.size()) {
        throw std::invalid_argument("topology: dilations and channels must have equal length");
    }
    Network net;
    int in_c = in_channels;
    for (size_t i = 0; i < topo.channels.size(); ++i) {
        const double rate = i == 0 ? 0.0 : topo.dropout;  // no dropout in the first block
        net.add(std::make_unique<TcnBlock>(in_c, topo.channels[i], topo.kernel_width,
                                           topo.dilations[i], rate, rng));
        in_c = topo.channels[i];
    }
    net.add(std::make_unique<Conv1d>(in_c, topo.out_channels, 1, 1, rng));
    return net;
}

// ---------------------------------------------------------------------------
// Losses

LossResult mse_loss(const ValueBlock& pred, const ValueBlock& target) {
    if (pred.time != target.time || pred.channels != target.channels) {
        throw std::invalid_argument("mse_loss: shape mismatch");
    }
    if (pred.v.empty()) throw std::invalid_argument("mse_loss: empty input");
    LossResult res;
    res.grad = ValueBlock(pred.time, pred.channels);
    const double n = static_cast<double>(pred.v.size());
    double acc = 0.0;
    for (size_t i = 0; i < pred.v.size(); ++i) {
        const double d = pred.v[i] - target.v[i];
        acc += d * d;
        res.grad.v[i] = 2.0 * d / n;
    }
    res.value = acc / n;
    return res;
}

LossResult softmax_cross_entropy(const ValueBlock& logits, const std::vector<int>& labels) {
    if (logits.time != static_cast<int>(labels.size())) {
        throw std::invalid_argument("softmax_cross_entropy: one label per timestep required");
    }
    if (logits.v.empty()) throw std::invalid_argument("softmax_cross_entropy: empty input");
    LossResult res;
    res.grad = ValueBlock(logits.time, logits.channels);
    const double tn = static_cast<double>(logits.time);
    for (int t = 0; t < logits.time; ++t) {
        const int label = labels[t];
        if (label < 0 || label >= logits.channels) {
            throw std::invalid_argument("softmax_cross_entropy: label out of range");
        }
        const double* row = &logits.v[static_cast<size_t>(t) * logits.channels];
        double maxv = row[0];
        for (int c = 1; c < logits.channels; ++c) maxv = std::max(maxv, row[c]);
        double denom = 0.0;
        for (int c = 0; c < logits.channels; ++c) denom += std::exp(row[c] - maxv);
        res.value += -(row[label] - maxv - std::log(denom)) / tn;
        double* grow = &res.grad.v[static_cast<size_t>(t) * logits.channels];
        for (int c = 0; c < logits.channels; ++c) {
            grow[c] = (std::exp(row[c] - maxv) / denom - (c == label ? 1.0 : 0.0)) / tn;
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(size_t param_count, AdamConfig cfg)
    : cfg_(cfg), m_(param_count, 0.0), v_(param_count, 0.0) {}

void Adam::step(Network& net) {
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    size_t off = 0;
    net.visit_params([&](std::vector<double>& p, std::vector<double>& g) {
        if (off + p.size() > m_.size()) throw std::invalid_argument("Adam: parameter count mismatch");
        for (size_t i = 0; i < p.size(); ++i) {
            const size_t j = off + i;
            m_[j] = cfg_.beta1 * m_[j] + (1.0 - cfg_.beta1) * g[i];
            v_[j] = cfg_.beta2 * v_[j] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m_[j] / bc1;
            const double vhat = v_[j] / bc2;
            p[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
        off += p.size();
    });
    if (off != m_.size()) throw std::invalid_argument("Adam: parameter count mismatch");
}

// ---------------------------------------------------------------------------
// train_loop

TrainHistory train_loop(Network& net, size_t n_train,
                        const std::function<double(std::span<const size_t>)>& train_batch,
                        const std::function<double()>& validate,
                        const TrainConfig& cfg) {
    if (n_train == 0) throw std::invalid_argument("train_loop: empty training set");
    if (cfg.patience >= cfg.max_epochs) {
        throw std::invalid_argument("train_loop: patience must be < max_epochs");
    }
    std::mt19937 rng(static_cast<uint32_t>(cfg.seed));
    std::vector<size_t> order(n_train);
    std::iota(order.begin(), order.end(), size_t{0});

    TrainHistory hist;
    double best_val = std::numeric_limits<double>::infinity();
    std::vector<double> best_params = net.flat_params();
    int since_improvement = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        net.set_training(true);
        double epoch_loss = 0.0;
        size_t n_batches = 0;
        for (size_t start = 0; start < n_train; start += cfg.batch_size) {
            const size_t end = std::min(n_train, start + cfg.batch_size);
            epoch_loss += train_batch(std::span<const size_t>(order.data() + start, end - start));
            ++n_batches;
        }
        epoch_loss /= static_cast<double>(n_batches);
        net.set_training(false);
        const double val = validate();
        if (!std::isfinite(epoch_loss) || !std::isfinite(val)) {
            throw std::runtime_error("training diverged at epoch " + std::to_string(epoch));
        }
        hist.train_loss.push_back(epoch_loss);
        hist.val_loss.push_back(val);
        if (val < best_val) {
            best_val = val;
            best_params = net.flat_params();
            hist.best_epoch = epoch;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        hist.stopped_epoch = epoch;
        if (since_improvement >= cfg.patience) break;
    }
    net.set_flat_params(best_params);
    return hist;
}

}  // namespace vimu::nn

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "vimu/nn_core.hpp"

using namespace vimu::nn;

namespace {

ValueBlock random_block(int time, int channels, std::mt19937& rng) {
    ValueBlock b(time, channels);
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& x : b.v) x = dist(rng);
    return b;
}

// Central finite differences against the analytic gradient of an
// mse loss through the whole network.
double max_gradient_error(Network& net, const ValueBlock& input, const ValueBlock& target) {
    net.zero_grad();
    LossResult loss = mse_loss(net.forward(input), target);
    net.backward(loss.grad);
    const std::vector<double> analytic = net.flat_grads();

    std::vector<double> params = net.flat_params();
    const double h = 1e-4;
    double worst = 0.0;
    for (size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        net.set_flat_params(params);
        const double up = mse_loss(net.forward(input), target).value;
        params[i] = saved - h;
        net.set_flat_params(params);
        const double down = mse_loss(net.forward(input), target).value;
        params[i] = saved;
        const double fd = (up - down) / (2.0 * h);
        const double denom = std::max({1e-3, std::abs(fd), std::abs(analytic[i])});
        worst = std::max(worst, std::abs(fd - analytic[i]) / denom);
    }
    net.set_flat_params(params);
    return worst;
}

}  // namespace

TEST_CASE("conv1d width-1 identity kernel reproduces the input") {
    std::mt19937 rng(1);
    Conv1d conv(1, 1, 1, 1, rng);
    std::vector<double> p = {1.0, 0.0};  // w = 1, b = 0
    conv.visit_params([&, i = size_t{0}](std::vector<double>& params, std::vector<double>&) mutable {
        for (double& x : params) x = p[i++];
    });
    ValueBlock in = random_block(10, 1, rng);
    ValueBlock out = conv.forward(in);
    for (size_t i = 0; i < in.v.size(); ++i) CHECK(out.v[i] == doctest::Approx(in.v[i]));
}

TEST_CASE("conv1d width-3 delta kernel reproduces the input") {
    std::mt19937 rng(2);
    Conv1d conv(1, 1, 3, 1, rng);
    std::vector<double> p = {0.0, 1.0, 0.0, 0.0};  // kernel (0,1,0), b = 0
    conv.visit_params([&, i = size_t{0}](std::vector<double>& params, std::vector<double>&) mutable {
        for (double& x : params) x = p[i++];
    });
    ValueBlock in = random_block(17, 1, rng);
    ValueBlock out = conv.forward(in);
    for (size_t i = 0; i < in.v.size(); ++i) CHECK(out.v[i] == doctest::Approx(in.v[i]));
}

TEST_CASE("conv1d same padding preserves length under dilation") {
    std::mt19937 rng(3);
    Conv1d conv(2, 5, 3, 4, rng);
    ValueBlock in = random_block(16, 2, rng);
    ValueBlock out = conv.forward(in);
    CHECK(out.time == 16);
    CHECK(out.channels == 5);
}

TEST_CASE("conv1d weight gradient of a sum loss equals the input") {
    std::mt19937 rng(4);
    Conv1d conv(1, 1, 1, 1, rng);
    ValueBlock in = random_block(8, 1, rng);
    conv.forward(in);
    ValueBlock ones(8, 1);
    std::fill(ones.v.begin(), ones.v.end(), 1.0);
    conv.backward(ones);
    const double expect = std::accumulate(in.v.begin(), in.v.end(), 0.0);
    bool first = true;
    conv.visit_params([&](std::vector<double>&, std::vector<double>& g) {
        if (first) {
            CHECK(g[0] == doctest::Approx(expect));
            first = false;
        }
    });
}

TEST_CASE("same padding holds through random deep stacks") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> depth_dist(1, 6);
    std::uniform_int_distribution<int> dil_dist(1, 8);
    std::uniform_int_distribution<int> len_dist(16, 64);
    for (int trial = 0; trial < 20; ++trial) {
        Topology topo;
        const int depth = depth_dist(rng);
        topo.dilations.clear();
        topo.channels.clear();
        for (int d = 0; d < depth; ++d) {
            topo.dilations.push_back(dil_dist(rng));
            topo.channels.push_back(8);
        }
        topo.out_channels = 3;
        Network net = build_tcn(2, topo, rng);
        const int len = len_dist(rng);
        ValueBlock out = net.forward(random_block(len, 2, rng));
        CHECK(out.time == len);
        CHECK(out.channels == 3);
    }
}

TEST_CASE("tcn block with zero kernels and identity skip is the identity") {
    std::mt19937 rng(6);
    TcnBlock block(4, 4, 3, 2, 0.0, rng);
    std::vector<double> zeros;
    block.visit_params([&](std::vector<double>& p, std::vector<double>&) {
        std::fill(p.begin(), p.end(), 0.0);
    });
    ValueBlock in = random_block(12, 4, rng);
    ValueBlock out = block.forward(in);
    for (size_t i = 0; i < in.v.size(); ++i) CHECK(out.v[i] == doctest::Approx(in.v[i]));
}

TEST_CASE("dropout is deterministic under a fixed seed") {
    ValueBlock in(50, 4);
    std::fill(in.v.begin(), in.v.end(), 1.0);
    std::vector<double> run1, run2;
    for (int run = 0; run < 2; ++run) {
        std::mt19937 rng(99);
        Dropout drop(0.2, rng);
        drop.set_training(true);
        ValueBlock out = drop.forward(in);
        (run == 0 ? run1 : run2) = out.v;
    }
    CHECK(run1 == run2);
}

TEST_CASE("inverted dropout preserves the expected activation") {
    std::mt19937 rng(7);
    Dropout drop(0.3, rng);
    drop.set_training(true);
    ValueBlock in(1, 1);
    in.v[0] = 2.0;
    double acc = 0.0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) acc += drop.forward(in).v[0];
    CHECK(acc / n == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("gradients match central finite differences on random networks") {
    for (uint32_t seed = 0; seed < 20; ++seed) {
        std::mt19937 rng(seed);
        Topology topo;
        topo.dilations = {1, 2};
        topo.channels = {6, 4};
        topo.out_channels = 2;
        Network net = build_tcn(3, topo, rng);
        ValueBlock in = random_block(10, 3, rng);
        ValueBlock target = random_block(10, 2, rng);
        CHECK(max_gradient_error(net, in, target) <= 1e-4);
    }
}

TEST_CASE("parameters off the loss path keep zero gradients") {
    std::mt19937 rng(8);
    Network net;
    net.add(std::make_unique<Conv1d>(1, 1, 1, 1, rng));
    net.zero_grad();
    // No forward/backward: nothing reaches these parameters.
    for (double g : net.flat_grads()) CHECK(g == 0.0);
}

TEST_CASE("mse examples") {
    ValueBlock a(2, 2), b(2, 2);
    std::fill(a.v.begin(), a.v.end(), 3.0);
    std::fill(b.v.begin(), b.v.end(), 3.0);
    CHECK(mse_loss(a, b).value == doctest::Approx(0.0));
    std::fill(b.v.begin(), b.v.end(), 1.0);  // pred - target == 2 everywhere
    CHECK(mse_loss(a, b).value == doctest::Approx(4.0));
    ValueBlock empty;
    CHECK_THROWS(mse_loss(empty, empty));
}

TEST_CASE("uniform logits over 10 classes give cross-entropy ln 10") {
    ValueBlock logits(4, 10);
    std::fill(logits.v.begin(), logits.v.end(), 0.7);
    std::vector<int> labels = {0, 3, 5, 9};
    CHECK(softmax_cross_entropy(logits, labels).value == doctest::Approx(std::log(10.0)));
}

TEST_CASE("cross-entropy gradient matches finite differences") {
    std::mt19937 rng(9);
    ValueBlock logits = random_block(6, 5, rng);
    std::vector<int> labels = {0, 1, 2, 3, 4, 2};
    LossResult loss = softmax_cross_entropy(logits, labels);
    const double h = 1e-6;
    for (size_t i = 0; i < logits.v.size(); ++i) {
        ValueBlock up = logits, down = logits;
        up.v[i] += h;
        down.v[i] -= h;
        const double fd = (softmax_cross_entropy(up, labels).value -
                           softmax_cross_entropy(down, labels).value) / (2 * h);
        CHECK(loss.grad.v[i] == doctest::Approx(fd).epsilon(1e-5));
    }
}

TEST_CASE("one hand-computed adam step") {
    std::mt19937 rng(10);
    Network net;
    net.add(std::make_unique<Conv1d>(1, 1, 1, 1, rng));
    net.set_flat_params(std::vector<double>{1.0, 0.0});
    // f(w) = w^2 at w = 1 gives g = 2. Bias-corrected first step moves by
    // lr * g / (|g| + eps) ~= lr.
    net.visit_params([](std::vector<double>& p, std::vector<double>& g) {
        g.assign(p.size(), 0.0);
    });
    bool first = true;
    net.visit_params([&](std::vector<double>&, std::vector<double>& g) {
        if (first) {
            g[0] = 2.0;
            first = false;
        }
    });
    Adam adam(net.param_count());
    adam.step(net);
    CHECK(net.flat_params()[0] == doctest::Approx(0.999).epsilon(1e-6));
}

TEST_CASE("zero gradients leave parameters unchanged") {
    std::mt19937 rng(11);
    Network net;
    net.add(std::make_unique<Conv1d>(2, 2, 3, 1, rng));
    const std::vector<double> before = net.flat_params();
    net.zero_grad();
    Adam adam(net.param_count());
    adam.step(net);
    adam.step(net);
    CHECK(net.flat_params() == before);
}

TEST_CASE("early stopping follows a scripted validation schedule") {
    std::mt19937 rng(12);
    Network net;
    net.add(std::make_unique<Conv1d>(1, 1, 1, 1, rng));
    TrainConfig cfg;
    cfg.batch_size = 1;

    SUBCASE("30 improving epochs then flat stops at 55 with epoch-30 weights") {
        int epoch = 0;
        auto train = [&](std::span<const size_t>) {
            ++epoch;
            net.set_flat_params(std::vector<double>{static_cast<double>(epoch), 0.0});
            return 0.0;
        };
        auto validate = [&]() { return epoch <= 30 ? 100.0 - epoch : 70.0; };
        TrainHistory hist = train_loop(net, 1, train, validate, cfg);
        CHECK(hist.stopped_epoch == 55);
        CHECK(hist.best_epoch == 30);
        CHECK(net.flat_params()[0] == doctest::Approx(30.0));
    }

    SUBCASE("immediate plateau stops at epoch 26") {
        auto train = [&](std::span<const size_t>) { return 0.0; };
        auto validate = [&]() { return 1.0; };
        TrainHistory hist = train_loop(net, 1, train, validate, cfg);
        CHECK(hist.stopped_epoch == 26);
        CHECK(hist.best_epoch == 1);
    }

    SUBCASE("non-finite loss aborts with the epoch number") {
        auto train = [&](std::span<const size_t>) { return std::nan(""); };
        auto validate = [&]() { return 1.0; };
        CHECK_THROWS_WITH_AS(train_loop(net, 1, train, validate, cfg),
                             "training diverged at epoch 1", std::runtime_error);
    }
}

TEST_CASE("train_loop learns y = 3x to within 1e-2") {
    std::mt19937 rng(13);
    Network net;
    net.add(std::make_unique<Conv1d>(1, 1, 1, 1, rng));
    Adam adam(net.param_count(), AdamConfig{.lr = 0.05});
    std::vector<double> xs(64), ys(64);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (size_t i = 0; i < xs.size(); ++i) {
        xs[i] = uni(rng);
        ys[i] = 3.0 * xs[i];
    }
    auto batch_loss = [&](std::span<const size_t> idx, bool update) {
        net.zero_grad();
        double total = 0.0;
        for (size_t i : idx) {
            ValueBlock in(1, 1), target(1, 1);
            in.v[0] = xs[i];
            target.v[0] = ys[i];
            LossResult loss = mse_loss(net.forward(in), target);
            net.backward(loss.grad);
            total += loss.value;
        }
        if (update) adam.step(net);
        return total / idx.size();
    };
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.max_epochs = 500;
    std::vector<size_t> all(xs.size());
    std::iota(all.begin(), all.end(), size_t{0});
    train_loop(
        net, xs.size(), [&](std::span<const size_t> idx) { return batch_loss(idx, true); },
        [&]() { return batch_loss(all, false); }, cfg);
    CHECK(net.flat_params()[0] == doctest::Approx(3.0).epsilon(1e-2));
}

TEST_CASE("fixed seed gives a bitwise-identical training trajectory") {
    std::vector<double> results[2];
    for (int run = 0; run < 2; ++run) {
        std::mt19937 rng(77);
        Topology topo;
        topo.dilations = {1, 2};
        topo.channels = {4, 4};
        Network net = build_tcn(2, topo, rng);
        Adam adam(net.param_count());
        ValueBlock in = random_block(16, 2, rng);
        ValueBlock target = random_block(16, 1, rng);
        net.set_training(true);
        for (int step = 0; step < 10; ++step) {
            net.zero_grad();
            LossResult loss = mse_loss(net.forward(in), target);
            net.backward(loss.grad);
            adam.step(net);
        }
        results[run] = net.flat_params();
    }
    CHECK(results[0] == results[1]);
}

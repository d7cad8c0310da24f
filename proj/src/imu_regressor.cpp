#include "vimu/imu_regressor.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "json.hpp"

namespace vimu {

namespace {

using nlohmann::json;

constexpr const char* kCheckpointMagic = "vimu-regressor-v1\n";

struct WindowSet {
    std::vector<nn::ValueBlock> inputs;
    std::vector<nn::ValueBlock> targets;
};

nn::ValueBlock target_window(const std::vector<double>& values, size_t start) {
    nn::ValueBlock block(kRegressionWindow, 1);
    for (int t = 0; t < kRegressionWindow; ++t) block.v[t] = values[start + t];
    return block;
}

}  // namespace

double filter_cutoff_hz(FilterPolicy p) {
    switch (p) {
        case FilterPolicy::none: return 0.0;
        case FilterPolicy::hz8: return 8.0;
        case FilterPolicy::hz12: return 12.0;
    }
    throw std::invalid_argument("unknown filter policy");
}

std::string filter_policy_name(FilterPolicy p) {
    switch (p) {
        case FilterPolicy::none: return "none";
        case FilterPolicy::hz8: return "8hz";
        case FilterPolicy::hz12: return "12hz";
    }
    throw std::invalid_argument("unknown filter policy");
}

FilterPolicy filter_policy_from_name(const std::string& name) {
    if (name == "none") return FilterPolicy::none;
    if (name == "8hz") return FilterPolicy::hz8;
    if (name == "12hz") return FilterPolicy::hz12;
    throw std::invalid_argument("unknown filter policy: " + name);
}

std::string scaler_policy_name(ScalerPolicy p) {
    return p == ScalerPolicy::standard ? "standard" : "none";
}

ScalerPolicy scaler_policy_from_name(const std::string& name) {
    if (name == "none") return ScalerPolicy::none;
    if (name == "standard") return ScalerPolicy::standard;
    throw std::invalid_argument("unknown scaler policy: " + name);
}

std::vector<int> RegressorSpec::resolved_joints() const {
    return joints.empty() ? default_placement_joints(placement) : joints;
}

int RegressorSpec::input_channels() const {
    return 2 * (static_cast<int>(resolved_joints().size()) + 2);
}

TrainedRegressor train_regressor(const RegressorSpec& spec, const std::vector<PairedSeries>& data,
                                 const RegressorTrainConfig& cfg) {
    if (data.empty()) throw std::invalid_argument("train_regressor: no paired data");
    for (const PairedSeries& pair : data) {
        if (pair.poses.length() != pair.target.values.size()) {
            throw std::invalid_argument(
                "train_regressor: pose/sensor length mismatch in session " +
                std::to_string(pair.session_id));
        }
    }

    // Filter first; the scaler must describe what the network emits.
    const double cutoff = filter_cutoff_hz(spec.filter);
    std::vector<std::vector<double>> filtered(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        filtered[i] = cutoff > 0.0
                          ? butterworth_lowpass(data[i].target.values, data[i].target.rate, cutoff)
                          : data[i].target.values;
    }

    int val_session = cfg.val_session;
    if (val_session < 0 && data.size() > 1) val_session = data.back().session_id;
    const bool session_split = data.size() > 1;

    ScalerParams scaler;
    if (spec.scaler == ScalerPolicy::standard) {
        std::vector<const std::vector<double>*> pool;
        for (size_t i = 0; i < data.size(); ++i) {
            if (!session_split || data[i].session_id != val_session) pool.push_back(&filtered[i]);
        }
        scaler = fit_scaler(pool);
    }

    const std::vector<int> joints = spec.resolved_joints();
    WindowSet train_set, val_set;
    for (size_t i = 0; i < data.size(); ++i) {
        const std::vector<double> scaled = spec.scaler == ScalerPolicy::standard
                                               ? apply_scaler(filtered[i], scaler)
                                               : filtered[i];
        auto windows = make_regression_windows(data[i].poses, joints);
        const bool is_val = session_split && data[i].session_id == val_session;
        WindowSet& dest = is_val ? val_set : train_set;
        for (const RegressionWindow& w : windows) {
            dest.inputs.push_back(w.block);
            dest.targets.push_back(target_window(scaled, w.start_sample));
        }
    }
    if (!session_split) {
        // Hold out a contiguous tail so overlapping windows cannot leak.
        const size_t n = train_set.inputs.size();
        size_t n_val = static_cast<size_t>(n * cfg.val_fraction);
        n_val = std::clamp<size_t>(n_val, n > 1 ? 1 : 0, n > 1 ? n - 1 : 0);
        for (size_t i = n - n_val; i < n; ++i) {
            val_set.inputs.push_back(std::move(train_set.inputs[i]));
            val_set.targets.push_back(std::move(train_set.targets[i]));
        }
        train_set.inputs.resize(n - n_val);
        train_set.targets.resize(n - n_val);
    }
    if (train_set.inputs.empty()) throw std::invalid_argument("train_regressor: no training windows");
    if (val_set.inputs.empty()) throw std::invalid_argument("train_regressor: no validation windows");

    nn::Topology topo = spec.topology;
    topo.out_channels = 1;
    std::mt19937 rng(cfg.train.seed);
    TrainedRegressor model{spec, nn::build_tcn(spec.input_channels(), topo, rng), scaler, {}};
    nn::Adam adam(model.net.param_count(), nn::AdamConfig{.lr = cfg.lr});

    auto train_batch = [&](std::span<const size_t> idx) {
        model.net.set_training(true);
        model.net.zero_grad();
        double total = 0.0;
        for (size_t i : idx) {
            nn::LossResult loss =
                nn::mse_loss(model.net.forward(train_set.inputs[i]), train_set.targets[i]);
            model.net.backward(loss.grad);
            total += loss.value;
        }
        adam.step(model.net);
        return total / idx.size();
    };
    auto validate = [&]() {
        model.net.set_training(false);
        double total = 0.0;
        for (size_t i = 0; i < val_set.inputs.size(); ++i) {
            total += nn::mse_loss(model.net.forward(val_set.inputs[i]), val_set.targets[i]).value;
        }
        return total / val_set.inputs.size();
    };
    model.history = nn::train_loop(model.net, train_set.inputs.size(), train_batch, validate,
                                   cfg.train);
    model.net.set_training(false);
    return model;
}

ChannelSeries simulate_channel(TrainedRegressor& model, const NormalizedPoseSequence& norm) {
    if (norm.length() < kRegressionWindow) {
        throw std::invalid_argument("simulate_channel: sequence shorter than one window");
    }
    const size_t n = norm.length();
    std::vector<double> sum(n, 0.0);
    std::vector<double> count(n, 0.0);
    model.net.set_training(false);
    for (const RegressionWindow& w : make_regression_windows(norm, model.spec.resolved_joints())) {
        const nn::ValueBlock pred = model.net.forward(w.block);
        for (int t = 0; t < kRegressionWindow; ++t) {
            sum[w.start_sample + t] += pred.v[t];
            count[w.start_sample + t] += 1.0;
        }
    }
    for (size_t i = 0; i < n; ++i) sum[i] /= count[i];
    if (model.spec.scaler == ScalerPolicy::standard) sum = invert_scaler(sum, model.scaler);
    ChannelSeries out;
    out.placement = model.spec.placement;
    out.name = model.spec.channel;
    out.rate = norm.rate;
    out.values = std::move(sum);
    return out;
}

std::string save_checkpoint(const TrainedRegressor& model) {
    json header;
    header["placement"] = placement_name(model.spec.placement);
    header["channel"] = model.spec.channel;
    header["joints"] = model.spec.resolved_joints();
    header["topology"] = {{"kernel_width", model.spec.topology.kernel_width},
                          {"dilations", model.spec.topology.dilations},
                          {"channels", model.spec.topology.channels},
                          {"dropout", model.spec.topology.dropout},
                          {"out_channels", 1}};
    header["filter"] = filter_policy_name(model.spec.filter);
    header["scaler_policy"] = scaler_policy_name(model.spec.scaler);
    header["scaler"] = {{"mean", model.scaler.mean}, {"std", model.scaler.std}};
    header["history"] = {{"train_loss", model.history.train_loss},
                         {"val_loss", model.history.val_loss},
                         {"best_epoch", model.history.best_epoch},
                         {"stopped_epoch", model.history.stopped_epoch}};
    const std::vector<double> params = model.net.flat_params();
    header["param_count"] = params.size();

    std::string out = kCheckpointMagic;
    out += header.dump();
    out += '\n';
    const size_t offset = out.size();
    out.resize(offset + params.size() * sizeof(double));
    std::memcpy(out.data() + offset, params.data(), params.size() * sizeof(double));
    return out;
}

TrainedRegressor load_checkpoint(const std::string& bytes) {
    const std::string magic = kCheckpointMagic;
    if (bytes.rfind(magic, 0) != 0) {
        throw std::runtime_error("load_checkpoint: unrecognized header");
    }
    const size_t header_end = bytes.find('\n', magic.size());
    if (header_end == std::string::npos) {
        throw std::runtime_error("load_checkpoint: truncated header");
    }
    json header;
    try {
        header = json::parse(bytes.substr(magic.size(), header_end - magic.size()));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("load_checkpoint: bad header: ") + e.what());
    }

    TrainedRegressor model;
    try {
        model.spec.placement = placement_from_name(header.at("placement").get<std::string>());
        model.spec.channel = header.at("channel").get<std::string>();
        model.spec.joints = header.at("joints").get<std::vector<int>>();
        const json& topo = header.at("topology");
        model.spec.topology.kernel_width = topo.at("kernel_width").get<int>();
        model.spec.topology.dilations = topo.at("dilations").get<std::vector<int>>();
        model.spec.topology.channels = topo.at("channels").get<std::vector<int>>();
        model.spec.topology.dropout = topo.at("dropout").get<double>();
        model.spec.topology.out_channels = topo.at("out_channels").get<int>();
        model.spec.filter = filter_policy_from_name(header.at("filter").get<std::string>());
        model.spec.scaler = scaler_policy_from_name(header.at("scaler_policy").get<std::string>());
        model.scaler.mean = header.at("scaler").at("mean").get<double>();
        model.scaler.std = header.at("scaler").at("std").get<double>();
        const json& hist = header.at("history");
        model.history.train_loss = hist.at("train_loss").get<std::vector<double>>();
        model.history.val_loss = hist.at("val_loss").get<std::vector<double>>();
        model.history.best_epoch = hist.at("best_epoch").get<int>();
        model.history.stopped_epoch = hist.at("stopped_epoch").get<int>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("load_checkpoint: missing field: ") + e.what());
    }

    std::mt19937 rng(0);
    model.net = nn::build_tcn(model.spec.input_channels(), model.spec.topology, rng);
    const size_t param_count = header.at("param_count").get<size_t>();
    if (param_count != model.net.param_count()) {
        throw std::runtime_error("load_checkpoint: parameter count does not match the topology");
    }
    const size_t blob_start = header_end + 1;
    if (bytes.size() - blob_start != param_count * sizeof(double)) {
        throw std::runtime_error("load_checkpoint: parameter blob size mismatch");
    }
    std::vector<double> params(param_count);
    std::memcpy(params.data(), bytes.data() + blob_start, param_count * sizeof(double));
    model.net.set_flat_params(params);
    model.net.set_training(false);
    return model;
}

}  // namespace vimu

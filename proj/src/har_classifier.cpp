#include "vimu/har_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace vimu {

namespace {

using nlohmann::json;

constexpr const char* kClassifierMagic = "vimu-classifier-v1\n";

void check_layout(const std::vector<std::string>& expected, const std::vector<std::string>& got) {
    if (expected != got) {
        throw std::invalid_argument("channel layout does not match the model's training layout");
    }
}

std::vector<int> argmax_per_timestep(const nn::ValueBlock& logits) {
    std::vector<int> labels(logits.time);
    for (int t = 0; t < logits.time; ++t) {
        int best = 0;
        for (int c = 1; c < logits.channels; ++c) {
            if (logits.at(t, c) > logits.at(t, best)) best = c;
        }
        labels[t] = best;
    }
    return labels;
}

}  // namespace

int majority_label(const std::vector<int>& labels) {
    if (labels.empty()) throw std::invalid_argument("majority_label: empty label set");
    std::map<int, int> counts;
    for (int l : labels) ++counts[l];
    int best = labels[0], best_count = 0;
    for (const auto& [label, count] : counts) {  // map order makes ties go to the lowest index
        if (count > best_count) {
            best = label;
            best_count = count;
        }
    }
    return best;
}

std::vector<std::string> channel_layout(const std::vector<ChannelSeries>& channels) {
    std::vector<std::string> layout;
    layout.reserve(channels.size());
    for (const ChannelSeries& c : channels) {
        layout.push_back(placement_name(c.placement) + "/" + c.name);
    }
    return layout;
}

std::vector<LabeledWindow> make_classification_windows(const std::vector<ChannelSeries>& channels,
                                                       const std::vector<int>& labels,
                                                       bool simulated) {
    if (channels.empty()) throw std::invalid_argument("make_classification_windows: no channels");
    const size_t n = channels[0].values.size();
    for (const ChannelSeries& c : channels) {
        if (c.values.size() != n) {
            throw std::invalid_argument("make_classification_windows: unequal channel lengths");
        }
    }
    if (labels.size() != n) {
        throw std::invalid_argument("make_classification_windows: labels not aligned with channels");
    }
    if (n < kClassifierWindow) {
        std::cerr << "make_classification_windows: " << n
                  << " samples are shorter than one window, yielding none\n";
        return {};
    }
    std::vector<LabeledWindow> windows;
    for (size_t start = 0; start + kClassifierWindow <= n; start += kClassifierStep) {
        LabeledWindow w;
        w.start_sample = start;
        w.simulated = simulated;
        w.block = nn::ValueBlock(kClassifierWindow, static_cast<int>(channels.size()));
        for (int t = 0; t < kClassifierWindow; ++t) {
            for (size_t c = 0; c < channels.size(); ++c) {
                w.block.at(t, static_cast<int>(c)) = channels[c].values[start + t];
            }
        }
        w.labels.assign(labels.begin() + start, labels.begin() + start + kClassifierWindow);
        w.majority = majority_label(w.labels);
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<bool> stratified_validation_mask(const std::vector<LabeledWindow>& windows,
                                             double fraction, uint64_t seed) {
    const bool any_real = std::any_of(windows.begin(), windows.end(),
                                      [](const LabeledWindow& w) { return !w.simulated; });
    std::map<int, std::vector<size_t>> by_class;
    for (size_t i = 0; i < windows.size(); ++i) {
        // Candidates: real windows when any exist, simulated otherwise.
        if (windows[i].simulated != any_real) by_class[windows[i].majority].push_back(i);
    }
    std::mt19937 rng(seed);
    std::vector<bool> in_val(windows.size(), false);
    for (auto& [label, idx] : by_class) {
        std::shuffle(idx.begin(), idx.end(), rng);
        size_t n_val = static_cast<size_t>(std::lround(fraction * idx.size()));
        if (idx.size() >= 2) n_val = std::clamp<size_t>(n_val, 1, idx.size() - 1);
        for (size_t i = 0; i < n_val; ++i) in_val[idx[i]] = true;
    }
    return in_val;
}

ClassifierModel train_classifier(const std::vector<LabeledWindow>& windows,
                                 const std::vector<std::string>& layout,
                                 const ClassifierConfig& cfg) {
    if (windows.empty()) throw std::invalid_argument("train_classifier: no windows");

    std::vector<bool> seen(cfg.class_count, false);
    for (const LabeledWindow& w : windows) {
        for (int l : w.labels) {
            if (l < 0 || l >= cfg.class_count) {
                throw std::invalid_argument("train_classifier: label " + std::to_string(l) +
                                            " outside the configured " +
                                            std::to_string(cfg.class_count) + " classes");
            }
            seen[l] = true;
        }
    }
    std::string missing;
    for (int c = 0; c < cfg.class_count; ++c) {
        if (!seen[c]) missing += (missing.empty() ? "" : ", ") + std::to_string(c);
    }
    if (!missing.empty()) {
        throw std::invalid_argument("train_classifier: classes absent from training data: " +
                                    missing);
    }

    const std::vector<bool> in_val =
        stratified_validation_mask(windows, cfg.val_fraction, cfg.train.seed);
    std::vector<size_t> train_idx, val_idx;
    for (size_t i = 0; i < windows.size(); ++i) (in_val[i] ? val_idx : train_idx).push_back(i);
    if (val_idx.empty()) throw std::invalid_argument("train_classifier: no validation windows");

    ClassifierModel model;
    model.topology = cfg.topology;
    model.topology.out_channels = cfg.class_count;
    model.class_count = cfg.class_count;
    model.class_names = cfg.class_names;
    for (int c = static_cast<int>(model.class_names.size()); c < cfg.class_count; ++c) {
        model.class_names.push_back("class_" + std::to_string(c));
    }
    model.layout = layout;
    std::mt19937 rng(cfg.train.seed);
    model.net = nn::build_tcn(static_cast<int>(layout.size()), model.topology, rng);
    nn::Adam adam(model.net.param_count(), nn::AdamConfig{.lr = cfg.lr});

    auto train_batch = [&](std::span<const size_t> idx) {
        model.net.set_training(true);
        model.net.zero_grad();
        double total = 0.0;
        for (size_t i : idx) {
            const LabeledWindow& w = windows[train_idx[i]];
            nn::LossResult loss =
                nn::softmax_cross_entropy(model.net.forward(w.block), w.labels);
            model.net.backward(loss.grad);
            total += loss.value;
        }
        adam.step(model.net);
        return total / idx.size();
    };
    auto validate = [&]() {
        model.net.set_training(false);
        double total = 0.0;
        for (size_t i : val_idx) {
            const LabeledWindow& w = windows[i];
            total += nn::softmax_cross_entropy(model.net.forward(w.block), w.labels).value;
        }
        return total / val_idx.size();
    };
    nn::train_loop(model.net, train_idx.size(), train_batch, validate, cfg.train);
    model.net.set_training(false);
    return model;
}

Prediction predict(ClassifierModel& model, const std::vector<LabeledWindow>& windows,
                   const std::vector<std::string>& layout) {
    check_layout(model.layout, layout);
    model.net.set_training(false);
    Prediction out;
    for (const LabeledWindow& w : windows) {
        std::vector<int> labels = argmax_per_timestep(model.net.forward(w.block));
        out.window_labels.push_back(majority_label(labels));
        out.timestep_labels.push_back(std::move(labels));
    }
    return out;
}

Prediction predict(ClassifierModel& model, const std::vector<ChannelSeries>& channels) {
    const size_t n = channels.empty() ? 0 : channels[0].values.size();
    if (n < kClassifierWindow) {
        throw std::invalid_argument("predict: input shorter than one window");
    }
    auto windows = make_classification_windows(channels, std::vector<int>(n, 0));
    return predict(model, windows, channel_layout(channels));
}

std::string save_classifier(const ClassifierModel& model) {
    json header;
    header["topology"] = {{"kernel_width", model.topology.kernel_width},
                          {"dilations", model.topology.dilations},
                          {"channels", model.topology.channels},
                          {"dropout", model.topology.dropout},
                          {"out_channels", model.topology.out_channels}};
    header["class_count"] = model.class_count;
    header["class_names"] = model.class_names;
    header["layout"] = model.layout;
    const std::vector<double> params = model.net.flat_params();
    header["param_count"] = params.size();

    std::string out = kClassifierMagic;
    out += header.dump();
    out += '\n';
    const size_t offset = out.size();
    out.resize(offset + params.size() * sizeof(double));
    std::memcpy(out.data() + offset, params.data(), params.size() * sizeof(double));
    return out;
}

ClassifierModel load_classifier(const std::string& bytes) {
    const std::string magic = kClassifierMagic;
    if (bytes.rfind(magic, 0) != 0) throw std::runtime_error("load_classifier: unrecognized header");
    const size_t header_end = bytes.find('\n', magic.size());
    if (header_end == std::string::npos) throw std::runtime_error("load_classifier: truncated header");
    json header;
    try {
        header = json::parse(bytes.substr(magic.size(), header_end - magic.size()));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("load_classifier: bad header: ") + e.what());
    }

    ClassifierModel model;
    try {
        const json& topo = header.at("topology");
        model.topology.kernel_width = topo.at("kernel_width").get<int>();
        model.topology.dilations = topo.at("dilations").get<std::vector<int>>();
        model.topology.channels = topo.at("channels").get<std::vector<int>>();
        model.topology.dropout = topo.at("dropout").get<double>();
        model.topology.out_channels = topo.at("out_channels").get<int>();
        model.class_count = header.at("class_count").get<int>();
        model.class_names = header.at("class_names").get<std::vector<std::string>>();
        model.layout = header.at("layout").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("load_classifier: missing field: ") + e.what());
    }

    std::mt19937 rng(0);
    model.net = nn::build_tcn(static_cast<int>(model.layout.size()), model.topology, rng);
    const size_t param_count = header.at("param_count").get<size_t>();
    if (param_count != model.net.param_count()) {
        throw std::runtime_error("load_classifier: parameter count does not match the topology");
    }
    const size_t blob_start = header_end + 1;
    if (bytes.size() - blob_start != param_count * sizeof(double)) {
        throw std::runtime_error("load_classifier: parameter blob size mismatch");
    }
    std::vector<double> params(param_count);
    std::memcpy(params.data(), bytes.data() + blob_start, param_count * sizeof(double));
    model.net.set_flat_params(params);
    model.net.set_training(false);
    return model;
}

std::vector<int> parse_label_csv(const std::string& raw,
                                 const std::map<std::string, int>& class_ids, size_t length) {
    std::vector<int> labels(length, -1);
    std::istringstream in(raw);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "start_sample,end_sample,class_name") continue;
        std::istringstream row(line);
        std::string start_s, end_s, name;
        if (!std::getline(row, start_s, ',') || !std::getline(row, end_s, ',') ||
            !std::getline(row, name)) {
            throw std::runtime_error("parse_label_csv: malformed row at line " +
                                     std::to_string(line_no));
        }
        const size_t start = std::stoul(start_s);
        const size_t end = std::stoul(end_s);
        auto it = class_ids.find(name);
        if (it == class_ids.end()) {
            throw std::runtime_error("parse_label_csv: unknown class '" + name + "' at line " +
                                     std::to_string(line_no));
        }
        if (end > length || start >= end) {
            throw std::runtime_error("parse_label_csv: bad range at line " +
                                     std::to_string(line_no));
        }
        for (size_t i = start; i < end; ++i) {
            if (labels[i] != -1) {
                throw std::runtime_error("parse_label_csv: overlapping ranges at sample " +
                                         std::to_string(i));
            }
            labels[i] = it->second;
        }
    }
    for (size_t i = 0; i < length; ++i) {
        if (labels[i] == -1) {
            throw std::runtime_error("parse_label_csv: sample " + std::to_string(i) +
                                     " has no label");
        }
    }
    return labels;
}

}  // namespace vimu

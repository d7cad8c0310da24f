#pragma once

#include <map>
#include <string>
#include <vector>

#include "vimu/nn_core.hpp"
#include "vimu/types.hpp"

namespace vimu {

constexpr int kClassifierWindow = 128;  // 2.56 s at 50 Hz
constexpr int kClassifierStep = 64;

/// Modal class; ties break to the lowest class index.
int majority_label(const std::vector<int>& labels);

/// One classification window: 128 samples by the stacked channel count,
/// with the ground-truth label of every timestep and their majority.
struct LabeledWindow {
    nn::ValueBlock block;
    std::vector<int> labels;
    int majority = 0;
    size_t start_sample = 0;
    bool simulated = false;
};

/// Stacking order identifier, "placement/channel" per input channel.
std::vector<std::string> channel_layout(const std::vector<ChannelSeries>& channels);

/// Windows at offsets 0, 64, 128, ... over equal-length aligned series.
/// Series shorter than one window yield an empty list with a warning.
std::vector<LabeledWindow> make_classification_windows(const std::vector<ChannelSeries>& channels,
                                                       const std::vector<int>& labels,
                                                       bool simulated = false);

struct ClassifierConfig {
    nn::Topology topology;  // out_channels is overridden with class_count
    int class_count = 10;
    std::vector<std::string> class_names;  // optional, defaults to "class_k"
    nn::TrainConfig train;
    double lr = 0.001;
    double val_fraction = 0.1;
};

struct ClassifierModel {
    nn::Topology topology;
    int class_count = 0;
    std::vector<std::string> class_names;
    std::vector<std::string> layout;
    nn::Network net;
};

/// True marks a validation window: a stratified `fraction` of the real
/// windows when any are present, otherwise of the simulated ones;
/// stratification is by majority label.
std::vector<bool> stratified_validation_mask(const std::vector<LabeledWindow>& windows,
                                             double fraction, uint64_t seed);

/// Per-timestep cross-entropy training. Validation is a stratified 10%
/// of the real windows when any are present, otherwise of the simulated
/// ones; stratification is by majority label.
ClassifierModel train_classifier(const std::vector<LabeledWindow>& windows,
                                 const std::vector<std::string>& layout,
                                 const ClassifierConfig& cfg);

struct Prediction {
    std::vector<int> window_labels;                // majority-voted, one per window
    std::vector<std::vector<int>> timestep_labels;  // per window, 128 each
};

Prediction predict(ClassifierModel& model, const std::vector<LabeledWindow>& windows,
                   const std::vector<std::string>& layout);
Prediction predict(ClassifierModel& model, const std::vector<ChannelSeries>& channels);

/// Same container format as the regressor checkpoints.
std::string save_classifier(const ClassifierModel& model);
ClassifierModel load_classifier(const std::string& bytes);

/// Label files: "start_sample,end_sample,class_name" rows, half-open
/// [start, end) ranges at 50 Hz; every sample must be covered exactly once.
std::vector<int> parse_label_csv(const std::string& raw,
                                 const std::map<std::string, int>& class_ids, size_t length);

}  // namespace vimu

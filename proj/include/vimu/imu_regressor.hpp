#pragma once

#include <string>
#include <vector>

#include "vimu/imu_dsp.hpp"
#include "vimu/nn_core.hpp"
#include "vimu/pose_features.hpp"
#include "vimu/types.hpp"

namespace vimu {

enum class FilterPolicy { none, hz8, hz12 };
enum class ScalerPolicy { none, standard };

double filter_cutoff_hz(FilterPolicy p);
std::string filter_policy_name(FilterPolicy p);
FilterPolicy filter_policy_from_name(const std::string& name);
std::string scaler_policy_name(ScalerPolicy p);
ScalerPolicy scaler_policy_from_name(const std::string& name);

/// One regression model: a placement/channel pair plus everything needed
/// to reproduce its preprocessing at inference time.
struct RegressorSpec {
    Placement placement = Placement::left_wrist;
    std::string channel = "acc_norm";
    std::vector<int> joints;  // empty: default_placement_joints(placement)
    nn::Topology topology;
    FilterPolicy filter = FilterPolicy::hz8;
    ScalerPolicy scaler = ScalerPolicy::standard;

    std::vector<int> resolved_joints() const;
    int input_channels() const;
};

/// A pose sequence and its co-recorded sensor channel on the same 50 Hz
/// grid (sync already applied).
struct PairedSeries {
    int session_id = 0;
    NormalizedPoseSequence poses;
    ChannelSeries target;
};

struct RegressorTrainConfig {
    nn::TrainConfig train;
    int val_session = -1;       // -1: hold out the last session when several exist
    double val_fraction = 0.1;  // tail split when only one session is available
    double lr = 0.001;
};

struct TrainedRegressor {
    RegressorSpec spec;
    nn::Network net;
    ScalerParams scaler;  // identity when the policy is none
    nn::TrainHistory history;
};

/// Trains on all step-1 windows of the non-validation sessions. Targets
/// are filtered first, then the scaler is fitted on the training pool
/// only, so the network always regresses preprocessed values.
TrainedRegressor train_regressor(const RegressorSpec& spec, const std::vector<PairedSeries>& data,
                                 const RegressorTrainConfig& cfg = {});

/// Runs the model over all step-1 windows; every output sample is the
/// mean of the window predictions covering it, then the scaler is
/// inverted so the series is in physical units.
ChannelSeries simulate_channel(TrainedRegressor& model, const NormalizedPoseSequence& norm);

/// Text JSON header (spec, scaler, history) followed by the parameters
/// as a little-endian binary blob; load(save(m)) is the identity.
std::string save_checkpoint(const TrainedRegressor& model);
TrainedRegressor load_checkpoint(const std::string& bytes);

}  // namespace vimu

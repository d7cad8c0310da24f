#pragma once

#include <string>
#include <vector>

#include "vimu/nn_core.hpp"
#include "vimu/types.hpp"

namespace vimu {

/// Per-sample scale factor (median Neck-MidHip distance over +-1.5 s)
/// and its relative speed of change plus the speed's first derivative.
struct ScaleSeries {
    std::vector<double> scale;        // pixels, > 0
    std::vector<double> speed;        // unitless per sample
    std::vector<double> speed_deriv;  // unitless per sample^2
};

/// Hip-centered, scale-normalized coordinates; MidHip maps to (-1, -1).
struct NormalizedPoseSequence {
    double rate = 50.0;
    std::vector<std::array<Vec2, body25::kJointCount>> joints;
    ScaleSeries scales;

    size_t length() const { return joints.size(); }
};

constexpr int kScaleMedianHalfWindow = 75;  // samples: 1.5 s at 50 Hz
constexpr int kRegressionWindow = 16;

ScaleSeries compute_scale_series(const PoseSequence& seq);

NormalizedPoseSequence normalize_joints(const PoseSequence& seq, const ScaleSeries& scales);

NormalizedPoseSequence normalize_pose_sequence(const PoseSequence& seq);

/// Default joint subset for a placement: wrist models use neck, same-side
/// shoulder/elbow/wrist and MidHip; calf models use MidHip, same-side
/// hip/knee/ankle and neck.
std::vector<int> default_placement_joints(Placement p);

/// One regression input window: 16 samples by 2*(n_j + 2) channels. Each
/// joint contributes (nx, ny); the scale speed and its derivative each
/// occupy a (value, 0) channel pair to keep the 2-wide coordinate layout.
struct RegressionWindow {
    nn::ValueBlock block;
    size_t center_sample = 0;
    size_t start_sample = 0;
};

std::vector<RegressionWindow> make_regression_windows(const NormalizedPoseSequence& norm,
                                                      const std::vector<int>& joints);

std::vector<RegressionWindow> make_regression_windows(const NormalizedPoseSequence& norm,
                                                      Placement placement);

/// CSV export: sample_index,joint_id,nx,ny,speed,speed_deriv.
std::string write_normalized_csv(const NormalizedPoseSequence& norm);

}  // namespace vimu

#include "vimu/pose_features.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace vimu {

namespace {

double window_median(const std::vector<double>& v, size_t center, int half_window) {
    const size_t lo = center >= static_cast<size_t>(half_window) ? center - half_window : 0;
    const size_t hi = std::min(v.size(), center + half_window + 1);
    std::vector<double> window(v.begin() + lo, v.begin() + hi);
    const size_t mid = window.size() / 2;
    std::nth_element(window.begin(), window.begin() + mid, window.end());
    double m = window[mid];
    if (window.size() % 2 == 0) {
        m = (m + *std::max_element(window.begin(), window.begin() + mid)) / 2.0;
    }
    return m;
}

}  // namespace

ScaleSeries compute_scale_series(const PoseSequence& seq) {
    if (seq.samples.empty()) throw std::invalid_argument("compute_scale_series: empty sequence");
    const size_t n = seq.length();
    std::vector<double> dist(n);
    for (size_t t = 0; t < n; ++t) {
        dist[t] = euclidean(seq.samples[t][body25::kNeck], seq.samples[t][body25::kMidHip]);
    }
    ScaleSeries out;
    out.scale.resize(n);
    for (size_t t = 0; t < n; ++t) {
        out.scale[t] = window_median(dist, t, kScaleMedianHalfWindow);
        if (out.scale[t] <= 0.0) {
            throw std::runtime_error("compute_scale_series: degenerate pose, zero scale at sample " +
                                     std::to_string(t));
        }
    }
    out.speed.resize(n);
    for (size_t t = 0; t + 1 < n; ++t) {
        out.speed[t] = (out.scale[t + 1] - out.scale[t]) / out.scale[t];
    }
    if (n >= 2) out.speed[n - 1] = out.speed[n - 2];
    out.speed_deriv.resize(n);
    for (size_t t = 0; t + 1 < n; ++t) {
        out.speed_deriv[t] = out.speed[t + 1] - out.speed[t];
    }
    if (n >= 2) out.speed_deriv[n - 1] = out.speed_deriv[n - 2];
    return out;
}

NormalizedPoseSequence normalize_joints(const PoseSequence& seq, const ScaleSeries& scales) {
    if (seq.length() != scales.scale.size()) {
        throw std::invalid_argument("normalize_joints: length mismatch");
    }
    NormalizedPoseSequence out;
    out.rate = seq.rate;
    out.scales = scales;
    out.joints.resize(seq.length());
    for (size_t t = 0; t < seq.length(); ++t) {
        const Vec2 hip = seq.samples[t][body25::kMidHip];
        const double s = scales.scale[t];
        for (int j = 0; j < body25::kJointCount; ++j) {
            if (j == body25::kMidHip) {
                out.joints[t][j] = {-1.0, -1.0};
                continue;
            }
            const Vec2 d = seq.samples[t][j] - hip;
            const Vec2 n{-1.0 + 2.0 * d.x / s, -1.0 + 2.0 * d.y / s};
            if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
                throw std::runtime_error("normalize_joints: non-finite value at sample " +
                                         std::to_string(t));
            }
            out.joints[t][j] = n;
        }
    }
    return out;
}

NormalizedPoseSequence normalize_pose_sequence(const PoseSequence& seq) {
    return normalize_joints(seq, compute_scale_series(seq));
}

std::vector<int> default_placement_joints(Placement p) {
    using namespace body25;
    switch (p) {
        case Placement::left_wrist:
            return {kNeck, kLShoulder, kLElbow, kLWrist, kMidHip};
        case Placement::right_wrist:
            return {kNeck, kRShoulder, kRElbow, kRWrist, kMidHip};
        case Placement::left_calf:
            return {kMidHip, kLHip, kLKnee, kLAnkle, kNeck};
        case Placement::right_calf:
            return {kMidHip, kRHip, kRKnee, kRAnkle, kNeck};
    }
    throw std::invalid_argument("unknown placement");
}

std::vector<RegressionWindow> make_regression_windows(const NormalizedPoseSequence& norm,
                                                      const std::vector<int>& joints) {
    const size_t n = norm.length();
    if (n < kRegressionWindow) {
        std::cerr << "make_regression_windows: sequence of length " << n
                  << " is shorter than one window, yielding none\n";
        return {};
    }
    const int channels = 2 * (static_cast<int>(joints.size()) + 2);
    std::vector<RegressionWindow> windows;
    windows.reserve(n - kRegressionWindow + 1);
    for (size_t start = 0; start + kRegressionWindow <= n; ++start) {
        RegressionWindow w;
        w.start_sample = start;
        w.center_sample = start + kRegressionWindow / 2;
        w.block = nn::ValueBlock(kRegressionWindow, channels);
        for (int t = 0; t < kRegressionWindow; ++t) {
            const size_t s = start + t;
            int c = 0;
            for (int j : joints) {
                w.block.at(t, c++) = norm.joints[s][j].x;
                w.block.at(t, c++) = norm.joints[s][j].y;
            }
            w.block.at(t, c++) = norm.scales.speed[s];
            w.block.at(t, c++) = 0.0;
            w.block.at(t, c++) = norm.scales.speed_deriv[s];
            w.block.at(t, c++) = 0.0;
        }
        windows.push_back(std::move(w));
    }
    return windows;
}

std::vector<RegressionWindow> make_regression_windows(const NormalizedPoseSequence& norm,
                                                      Placement placement) {
    return make_regression_windows(norm, default_placement_joints(placement));
}

std::string write_normalized_csv(const NormalizedPoseSequence& norm) {
    std::ostringstream out;
    out.precision(17);
    out << "sample_index,joint_id,nx,ny,speed,speed_deriv\n";
    for (size_t t = 0; t < norm.length(); ++t) {
        for (int j = 0; j < body25::kJointCount; ++j) {
            out << t << ',' << j << ',' << norm.joints[t][j].x << ',' << norm.joints[t][j].y << ','
                << norm.scales.speed[t] << ',' << norm.scales.speed_deriv[t] << '\n';
        }
    }
    return out.str();
}

}  // namespace vimu

#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "vimu/pose_ingest.hpp"
#include "vimu/types.hpp"

namespace vimu::oracle {

/// Sum of sinusoids with closed-form first and second derivatives.
struct SinSum {
    double mean = 0.0;
    struct Term {
        double amplitude;  // rad or m
        double freq_hz;
        double phase;
    };
    std::vector<Term> terms;

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
};

struct SegmentLengths {
    double torso = 0.50;      // MidHip -> Neck
    double head = 0.22;       // Neck -> Nose
    double shoulder = 0.18;   // Neck -> Shoulder (lateral)
    double upper_arm = 0.28;
    double forearm = 0.26;
    double hip = 0.10;        // MidHip -> Hip (lateral)
    double thigh = 0.42;
    double shank = 0.40;
    double foot = 0.15;
};

struct Camera {
    double pixels_per_meter = 200.0;
    double zoom_rate = 0.0;  // relative scale drift, 1/s
    double offset_x = 640.0;
    double offset_y = 360.0;
};

/// Planar kinematic body; all joint-angle trajectories are absolute world
/// angles so every joint position is twice differentiable in closed form.
struct KinematicScene {
    int class_id = 0;
    double duration = 20.0;
    double gravity = 9.81;
    SegmentLengths segments;
    Camera camera;
    SinSum root_x, root_y;  // MidHip world position, meters
    SinSum torso;           // world angles, radians
    SinSum left_upper_arm, left_forearm;
    SinSum right_upper_arm, right_forearm;
    SinSum left_thigh, left_shank;
    SinSum right_thigh, right_shank;
};

struct SceneConfig {
    double duration = 20.0;
    double zoom_rate = 0.0;
};

constexpr int kOracleClassCount = 4;

/// Randomized scene within class-specific amplitude/frequency bands.
KinematicScene generate_scene(int class_id, std::mt19937& rng, const SceneConfig& cfg = {});

/// World position/velocity/acceleration and segment orientation of the
/// IMU mounted for one placement.
struct SensorState {
    Vec2 position, velocity, acceleration;  // meters, m/s, m/s^2
    double angle, angular_rate;             // rad, rad/s
};

SensorState sensor_state(const KinematicScene& scene, Placement placement, double t);

/// Closed-form device-frame signals sampled at 50 Hz:
/// acc_norm, gyr_norm, ax (device x of specific force), lin_ax.
std::map<std::string, ChannelSeries> analytic_imu(const KinematicScene& scene,
                                                  Placement placement);

/// World joint positions projected to pixels (pixel y grows downward).
struct NoiseConfig {
    double pixel_noise_std = 0.0;
    double joint_dropout_prob = 0.0;
};

PoseSequence render_poses(const KinematicScene& scene);

/// Same projection, exercised through the ingestion path: per-frame
/// keypoints with optional Gaussian pixel noise and random joint dropout.
std::vector<RawKeypointFrame> render_keypoint_frames(const KinematicScene& scene,
                                                     const NoiseConfig& noise,
                                                     std::mt19937& rng);

std::vector<int> constant_labels(const KinematicScene& scene);

}  // namespace vimu::oracle

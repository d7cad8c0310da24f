#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vimu/types.hpp"

namespace vimu {

struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double confidence = 0.0;
};

using PersonKeypoints = std::array<std::optional<Keypoint>, body25::kJointCount>;

struct RawKeypointFrame {
    int frame_index = 0;
    std::vector<PersonKeypoints> people;
};

struct RawPoseTrack {
    int person_id = 0;
    double native_fps = 0.0;
    std::map<int, PersonKeypoints> frames;  // frame index -> joints, gaps allowed
};

/// Parses the per-frame keypoint layout: top-level "people", each with a
/// flat "pose_keypoints_2d" list of 25 x (x, y, confidence). A document may
/// be a single frame object or an array of frames for a whole video.
/// Triplets with zero confidence are treated as absent joints.
std::vector<RawKeypointFrame> parse_keypoint_file(const std::string& raw);

constexpr double kDefaultMinConfidence = 0.0002;

RawKeypointFrame threshold_joints(const RawKeypointFrame& frame,
                                  double min_conf = kDefaultMinConfidence);

struct TrackingConfig {
    double gating_radius = 1e9;  // pixels; default 0.5 x image diagonal
    double native_fps = 50.0;
};

TrackingConfig tracking_config_for_image(double width, double height, double fps);

/// Associates people across frames by nearest MidHip (Neck as fallback
/// anchor); people beyond the gating radius start new tracks. People with
/// neither anchor joint are skipped for that frame.
std::vector<RawPoseTrack> track_subjects(const std::vector<RawKeypointFrame>& frames,
                                         const TrackingConfig& cfg);

/// Interpolates every joint onto a uniform grid at target_rate. Sample k
/// sits at time k/rate after the track's first frame; the last grid point
/// does not exceed the last input time. Interior gaps are linear in time,
/// leading/trailing gaps take the nearest known value.
PoseSequence fill_and_resample(const RawPoseTrack& track, double target_rate = 50.0);

}  // namespace vimu

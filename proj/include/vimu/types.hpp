#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace vimu {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
};

double euclidean(const Vec2& a, const Vec2& b);

// BODY_25 joint model.
namespace body25 {
constexpr int kJointCount = 25;
constexpr int kNose = 0;
constexpr int kNeck = 1;
constexpr int kRShoulder = 2;
constexpr int kRElbow = 3;
constexpr int kRWrist = 4;
constexpr int kLShoulder = 5;
constexpr int kLElbow = 6;
constexpr int kLWrist = 7;
constexpr int kMidHip = 8;
constexpr int kRHip = 9;
constexpr int kRKnee = 10;
constexpr int kRAnkle = 11;
constexpr int kLHip = 12;
constexpr int kLKnee = 13;
constexpr int kLAnkle = 14;
constexpr int kREye = 15;
constexpr int kLEye = 16;
constexpr int kREar = 17;
constexpr int kLEar = 18;
constexpr int kLBigToe = 19;
constexpr int kLSmallToe = 20;
constexpr int kLHeel = 21;
constexpr int kRBigToe = 22;
constexpr int kRSmallToe = 23;
constexpr int kRHeel = 24;
}  // namespace body25

enum class Placement { left_wrist, right_wrist, left_calf, right_calf };

constexpr std::array<Placement, 4> kAllPlacements = {
    Placement::left_wrist, Placement::right_wrist,
    Placement::left_calf, Placement::right_calf};

std::string placement_name(Placement p);
Placement placement_from_name(const std::string& name);

// Uniform-rate pose sequence, every joint present at every sample.
struct PoseSequence {
    double rate = 50.0;
    std::vector<std::array<Vec2, body25::kJointCount>> samples;

    size_t length() const { return samples.size(); }
};

// One sensor channel for one body placement, uniformly sampled.
struct ChannelSeries {
    Placement placement = Placement::left_wrist;
    std::string name;
    double rate = 50.0;
    std::vector<double> values;
};

}  // namespace vimu

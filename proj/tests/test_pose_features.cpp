#include "doctest.h"

#include <cmath>
#include <random>

#include "vimu/pose_features.hpp"

using namespace vimu;

namespace {

PoseSequence constant_pose(size_t n, double neck_hip_dist = 80.0) {
    PoseSequence seq;
    seq.samples.resize(n);
    for (auto& sample : seq.samples) {
        for (int j = 0; j < body25::kJointCount; ++j) {
            sample[j] = {100.0 + 3.0 * j, 200.0 + 2.0 * j};
        }
        sample[body25::kMidHip] = {300.0, 400.0};
        sample[body25::kNeck] = {300.0, 400.0 - neck_hip_dist};
    }
    return seq;
}

PoseSequence random_pose(size_t n, std::mt19937& rng) {
    std::uniform_real_distribution<double> pos(50.0, 600.0);
    std::normal_distribution<double> jitter(0.0, 15.0);
    PoseSequence seq;
    seq.samples.resize(n);
    const Vec2 hip0{pos(rng), pos(rng)};
    for (size_t t = 0; t < n; ++t) {
        Vec2 hip{hip0.x + std::sin(0.1 * t) * 20.0, hip0.y + std::cos(0.07 * t) * 15.0};
        seq.samples[t][body25::kMidHip] = hip;
        seq.samples[t][body25::kNeck] = {hip.x + jitter(rng) * 0.1, hip.y - 90.0 - jitter(rng)};
        for (int j = 0; j < body25::kJointCount; ++j) {
            if (j == body25::kMidHip || j == body25::kNeck) continue;
            seq.samples[t][j] = {hip.x + jitter(rng) * 3.0, hip.y + jitter(rng) * 3.0};
        }
    }
    return seq;
}

}  // namespace

TEST_CASE("constant distance gives constant scale and zero speed features") {
    PoseSequence seq = constant_pose(200);
    ScaleSeries s = compute_scale_series(seq);
    for (size_t t = 0; t < seq.length(); ++t) {
        CHECK(s.scale[t] == doctest::Approx(80.0));
        CHECK(s.speed[t] == doctest::Approx(0.0));
        CHECK(s.speed_deriv[t] == doctest::Approx(0.0));
    }
}

TEST_CASE("the median window is robust to a single outlier spike") {
    PoseSequence seq = constant_pose(200);
    seq.samples[100][body25::kNeck].y -= 500.0;  // one spiked distance
    ScaleSeries s = compute_scale_series(seq);
    for (size_t t = 0; t < seq.length(); ++t) CHECK(s.scale[t] == doctest::Approx(80.0));
}

TEST_CASE("scale speed follows the relative change rule") {
    // Hand check on a short series where the median equals the sample:
    // dist 1.0 then 1.1 gives speed 0.1 at the first sample.
    PoseSequence seq = constant_pose(2, 1.0);
    seq.samples[1][body25::kNeck].y = seq.samples[1][body25::kMidHip].y - 1.1;
    ScaleSeries s = compute_scale_series(seq);
    // Median over the whole (2-sample) window is 1.05 at both samples here,
    // so build the check from the scale series itself.
    CHECK(s.speed[0] == doctest::Approx((s.scale[1] - s.scale[0]) / s.scale[0]));
    CHECK(s.speed[1] == s.speed[0]);  // edge rule: last sample copies predecessor
}

TEST_CASE("degenerate all-zero distances are rejected") {
    PoseSequence seq = constant_pose(50, 0.0);
    CHECK_THROWS(compute_scale_series(seq));
}

TEST_CASE("normalize_joints maps the anchor cases") {
    PoseSequence seq = constant_pose(10, 80.0);
    // Place probes at known offsets from MidHip.
    for (auto& sample : seq.samples) {
        sample[0] = sample[body25::kMidHip];                       // coincident
        sample[2] = {sample[body25::kMidHip].x + 40.0,             // scale/2 to the right
                     sample[body25::kMidHip].y};
    }
    NormalizedPoseSequence norm = normalize_pose_sequence(seq);
    for (size_t t = 0; t < norm.length(); ++t) {
        CHECK(norm.joints[t][0].x == doctest::Approx(-1.0));
        CHECK(norm.joints[t][0].y == doctest::Approx(-1.0));
        CHECK(norm.joints[t][body25::kMidHip].x == doctest::Approx(-1.0));
        CHECK(norm.joints[t][body25::kMidHip].y == doctest::Approx(-1.0));
        // Neck sits exactly scale_t pixels above MidHip (pixel y grows down).
        CHECK(norm.joints[t][body25::kNeck].x == doctest::Approx(-1.0));
        CHECK(norm.joints[t][body25::kNeck].y == doctest::Approx(-3.0));
        CHECK(norm.joints[t][2].x == doctest::Approx(0.0));
        CHECK(norm.joints[t][2].y == doctest::Approx(-1.0));
    }
}

TEST_CASE("normalization is invariant to translation and uniform scaling") {
    std::mt19937 rng(123);
    std::uniform_real_distribution<double> shift(-500.0, 500.0);
    std::uniform_real_distribution<double> scale(0.25, 4.0);
    for (int trial = 0; trial < 25; ++trial) {
        PoseSequence seq = random_pose(180, rng);
        NormalizedPoseSequence base = normalize_pose_sequence(seq);

        const Vec2 offset{shift(rng), shift(rng)};
        const double c = scale(rng);
        PoseSequence translated = seq, scaled = seq;
        for (auto& sample : translated.samples) {
            for (auto& joint : sample) joint = joint + offset;
        }
        for (auto& sample : scaled.samples) {
            for (auto& joint : sample) joint = joint * c;
        }
        NormalizedPoseSequence tnorm = normalize_pose_sequence(translated);
        NormalizedPoseSequence snorm = normalize_pose_sequence(scaled);
        for (size_t t = 0; t < base.length(); ++t) {
            CHECK(std::abs(tnorm.scales.speed[t] - base.scales.speed[t]) < 1e-9);
            CHECK(std::abs(snorm.scales.speed[t] - base.scales.speed[t]) < 1e-9);
            CHECK(std::abs(snorm.scales.speed_deriv[t] - base.scales.speed_deriv[t]) < 1e-9);
            for (int j = 0; j < body25::kJointCount; ++j) {
                CHECK(std::abs(tnorm.joints[t][j].x - base.joints[t][j].x) < 1e-9);
                CHECK(std::abs(tnorm.joints[t][j].y - base.joints[t][j].y) < 1e-9);
                CHECK(std::abs(snorm.joints[t][j].x - base.joints[t][j].x) < 1e-9);
                CHECK(std::abs(snorm.joints[t][j].y - base.joints[t][j].y) < 1e-9);
            }
        }
    }
}

TEST_CASE("one scale per sample serves both axes") {
    PoseSequence seq = constant_pose(20, 80.0);
    for (auto& sample : seq.samples) {
        sample[3] = {sample[body25::kMidHip].x + 20.0, sample[body25::kMidHip].y + 60.0};
    }
    NormalizedPoseSequence norm = normalize_pose_sequence(seq);
    // Distinct x/y offsets recover the identical scale from each axis.
    const double sx = 2.0 * 20.0 / (norm.joints[0][3].x + 1.0);
    const double sy = 2.0 * 60.0 / (norm.joints[0][3].y + 1.0);
    CHECK(sx == doctest::Approx(sy));
    CHECK(sx == doctest::Approx(80.0));
}

TEST_CASE("window count law and shapes") {
    std::mt19937 rng(5);
    NormalizedPoseSequence norm = normalize_pose_sequence(random_pose(100, rng));
    auto windows = make_regression_windows(norm, Placement::left_wrist);
    CHECK(windows.size() == 85);  // 100 - 16 + 1
    CHECK(windows[0].block.time == 16);
    CHECK(windows[0].block.channels == 14);  // (5 joints + 2 scale features) x 2
    CHECK(windows[1].start_sample == 1);     // step 1

    NormalizedPoseSequence exact = normalize_pose_sequence(random_pose(16, rng));
    CHECK(make_regression_windows(exact, Placement::right_calf).size() == 1);

    NormalizedPoseSequence tiny = normalize_pose_sequence(random_pose(15, rng));
    CHECK(make_regression_windows(tiny, Placement::right_calf).empty());
}

TEST_CASE("scale features enter the window as (value, 0) pairs") {
    std::mt19937 rng(6);
    NormalizedPoseSequence norm = normalize_pose_sequence(random_pose(30, rng));
    auto windows = make_regression_windows(norm, Placement::left_wrist);
    const auto& w = windows[3];
    for (int t = 0; t < 16; ++t) {
        const size_t s = w.start_sample + t;
        CHECK(w.block.at(t, 10) == norm.scales.speed[s]);
        CHECK(w.block.at(t, 11) == 0.0);
        CHECK(w.block.at(t, 12) == norm.scales.speed_deriv[s]);
        CHECK(w.block.at(t, 13) == 0.0);
    }
}

TEST_CASE("normalized csv has one row per sample and joint") {
    std::mt19937 rng(7);
    NormalizedPoseSequence norm = normalize_pose_sequence(random_pose(4, rng));
    const std::string csv = write_normalized_csv(norm);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 * 25);
    CHECK(csv.rfind("sample_index,joint_id,nx,ny,speed,speed_deriv\n", 0) == 0);
}

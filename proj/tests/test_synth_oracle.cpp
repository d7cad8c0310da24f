#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "vimu/pose_features.hpp"
#include "vimu/synth_oracle.hpp"

using namespace vimu;
using namespace vimu::oracle;

namespace {

KinematicScene static_scene() {
    KinematicScene sc;
    sc.duration = 5.0;
    sc.torso.mean = std::numbers::pi / 2.0;
    sc.root_y.mean = 1.0;
    sc.left_upper_arm.mean = -std::numbers::pi / 2.0;
    sc.right_upper_arm.mean = -std::numbers::pi / 2.0;
    sc.left_forearm.mean = -std::numbers::pi / 2.0;
    sc.right_forearm.mean = -std::numbers::pi / 2.0;
    sc.left_thigh.mean = -std::numbers::pi / 2.0;
    sc.right_thigh.mean = -std::numbers::pi / 2.0;
    sc.left_shank.mean = -std::numbers::pi / 2.0;
    sc.right_shank.mean = -std::numbers::pi / 2.0;
    return sc;
}

// Dominant frequency by scanning a projection grid (mean removed).
double dominant_freq(const std::vector<double>& v, double rate) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    double best_f = 0.0, best_mag = -1.0;
    for (double f = 0.2; f <= 6.5; f += 0.02) {
        std::complex<double> acc = 0.0;
        for (size_t i = 0; i < v.size(); ++i) {
            acc += (v[i] - mean) *
                   std::exp(std::complex<double>(0.0, -2.0 * std::numbers::pi * f * i / rate));
        }
        if (std::abs(acc) > best_mag) {
            best_mag = std::abs(acc);
            best_f = f;
        }
    }
    return best_f;
}

}  // namespace

TEST_CASE("a static scene measures exactly gravity and zero rotation") {
    KinematicScene sc = static_scene();
    for (Placement p : kAllPlacements) {
        auto channels = analytic_imu(sc, p);
        for (double a : channels["acc_norm"].values) CHECK(std::abs(a - 9.81) < 1e-9);
        for (double g : channels["gyr_norm"].values) CHECK(std::abs(g) < 1e-9);
    }
}

TEST_CASE("circular root motion produces the centripetal term") {
    KinematicScene sc = static_scene();
    const double r = 0.15, f = 1.0;
    sc.root_x.terms.push_back({r, f, 0.0});
    sc.root_y.terms.push_back({r, f, std::numbers::pi / 2.0});
    const double w = 2.0 * std::numbers::pi * f;
    auto channels = analytic_imu(sc, Placement::left_wrist);
    for (size_t k = 0; k < channels["acc_norm"].values.size(); ++k) {
        const double t = k / 50.0;
        // Closed-form circular kinematics evaluated independently.
        const Vec2 acc{-r * w * w * std::sin(w * t), -r * w * w * std::sin(w * t + std::numbers::pi / 2.0)};
        const double expect = std::hypot(acc.x, acc.y + 9.81);
        CHECK(channels["acc_norm"].values[k] == doctest::Approx(expect).epsilon(1e-9));
    }
    // Peak linear acceleration magnitude is the centripetal w^2 r.
    double max_lin = 0.0;
    for (size_t k = 0; k < channels["acc_norm"].values.size(); ++k) {
        const double t = k / 50.0;
        const SensorState st = sensor_state(sc, Placement::left_wrist, t);
        max_lin = std::max(max_lin, std::hypot(st.acceleration.x, st.acceleration.y));
    }
    CHECK(max_lin == doctest::Approx(w * w * r).epsilon(1e-6));
}

TEST_CASE("analytic acceleration matches finite differences of position") {
    std::mt19937 rng(3);
    for (int class_id = 0; class_id < kOracleClassCount; ++class_id) {
        KinematicScene sc = generate_scene(class_id, rng, {.duration = 4.0});
        const double h = 1e-3;  // 1 kHz differencing
        for (Placement p : kAllPlacements) {
            for (double t = 0.5; t < 3.5; t += 0.173) {
                const SensorState mid = sensor_state(sc, p, t);
                const SensorState lo = sensor_state(sc, p, t - h);
                const SensorState hi = sensor_state(sc, p, t + h);
                const double fdx = (hi.position.x - 2.0 * mid.position.x + lo.position.x) / (h * h);
                const double fdy = (hi.position.y - 2.0 * mid.position.y + lo.position.y) / (h * h);
                CHECK(std::abs(fdx - mid.acceleration.x) <= 1e-3);
                CHECK(std::abs(fdy - mid.acceleration.y) <= 1e-3);
            }
        }
    }
}

TEST_CASE("gyr_norm equals the magnitude of the segment angle rate") {
    std::mt19937 rng(4);
    KinematicScene sc = generate_scene(0, rng, {.duration = 3.0});
    auto channels = analytic_imu(sc, Placement::right_wrist);
    for (size_t k = 0; k < channels["gyr_norm"].values.size(); ++k) {
        const double expect = std::abs(sc.right_forearm.d1(k / 50.0));
        CHECK(channels["gyr_norm"].values[k] == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("scene generation is deterministic and respects class bands") {
    std::mt19937 rng1(9), rng2(9);
    KinematicScene a = generate_scene(0, rng1);
    KinematicScene b = generate_scene(0, rng2);
    auto ca = analytic_imu(a, Placement::left_wrist);
    auto cb = analytic_imu(b, Placement::left_wrist);
    CHECK(ca["acc_norm"].values == cb["acc_norm"].values);

    REQUIRE(a.left_upper_arm.terms.size() == 1);
    CHECK(a.left_upper_arm.terms[0].amplitude >= 0.5);
    CHECK(a.left_upper_arm.terms[0].amplitude <= 0.8);
    CHECK(a.left_upper_arm.terms[0].freq_hz >= 0.8);
    CHECK(a.left_upper_arm.terms[0].freq_hz <= 1.2);

    CHECK_THROWS(generate_scene(7, rng1));
}

TEST_CASE("slow and fast arm classes have separated spectra") {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        KinematicScene slow = generate_scene(0, rng, {.duration = 10.0});
        KinematicScene fast = generate_scene(1, rng, {.duration = 10.0});
        const double f_slow =
            dominant_freq(analytic_imu(slow, Placement::left_wrist)["gyr_norm"].values, 50.0);
        const double f_fast =
            dominant_freq(analytic_imu(fast, Placement::left_wrist)["gyr_norm"].values, 50.0);
        // Rectifying |rate| doubles the fundamental, so the bands sit at
        // roughly twice the drive frequencies and still must not overlap.
        CHECK(f_slow < 2.6);
        CHECK(f_fast > 4.4);
    }
}

TEST_CASE("zero-noise rendering is the exact projection") {
    std::mt19937 rng(13);
    KinematicScene sc = generate_scene(2, rng, {.duration = 2.0});
    PoseSequence seq = render_poses(sc);
    for (size_t k = 0; k < seq.length(); ++k) {
        const double t = k / 50.0;
        const double expect_x = sc.camera.offset_x + sc.camera.pixels_per_meter * sc.root_x.value(t);
        const double expect_y = sc.camera.offset_y - sc.camera.pixels_per_meter * sc.root_y.value(t);
        CHECK(seq.samples[k][body25::kMidHip].x == doctest::Approx(expect_x));
        CHECK(seq.samples[k][body25::kMidHip].y == doctest::Approx(expect_y));
    }
}

TEST_CASE("rendered frames survive ingestion with dropout") {
    std::mt19937 rng(17);
    KinematicScene sc = generate_scene(0, rng, {.duration = 6.0});
    PoseSequence exact = render_poses(sc);

    auto frames = render_keypoint_frames(sc, {.pixel_noise_std = 0.0, .joint_dropout_prob = 0.05},
                                         rng);
    std::vector<RawKeypointFrame> kept;
    for (const auto& frame : frames) kept.push_back(threshold_joints(frame));
    auto tracks = track_subjects(kept, tracking_config_for_image(1280, 720, 50.0));
    REQUIRE(tracks.size() == 1);
    PoseSequence rebuilt = fill_and_resample(tracks[0]);
    REQUIRE(rebuilt.length() == exact.length());
    double worst = 0.0;
    for (size_t k = 0; k < exact.length(); ++k) {
        for (int j = 0; j < body25::kJointCount; ++j) {
            worst = std::max(worst, euclidean(exact.samples[k][j], rebuilt.samples[k][j]));
        }
    }
    CHECK(worst < 10.0);  // interpolation error across dropped frames, in pixels
}

TEST_CASE("a zoom drift shows up in the scale speed, not the normalized pose") {
    std::mt19937 rng(19);
    KinematicScene sc = generate_scene(3, rng, {.duration = 6.0, .zoom_rate = 0.02});
    NormalizedPoseSequence norm = normalize_pose_sequence(render_poses(sc));
    double mean_speed = 0.0;
    for (double s : norm.scales.speed) mean_speed += s;
    mean_speed /= norm.scales.speed.size();
    // 2% scale growth per second is 0.0004 per sample at 50 Hz.
    CHECK(mean_speed == doctest::Approx(0.0004).epsilon(0.2));
}

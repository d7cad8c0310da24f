#include "vimu/synth_oracle.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vimu::oracle {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2.0;

struct Kin {
    Vec2 p, v, a;
};

struct AngleState {
    double value, d1, d2;
};

AngleState eval(const SinSum& s, double t) { return {s.value(t), s.d1(t), s.d2(t)}; }

/// Attach a segment of length L at world angle (theta + offset) to a parent.
Kin chain(const Kin& parent, double length, const AngleState& theta, double offset = 0.0) {
    const double c = std::cos(theta.value + offset);
    const double s = std::sin(theta.value + offset);
    Kin out;
    out.p = {parent.p.x + length * c, parent.p.y + length * s};
    out.v = {parent.v.x - length * theta.d1 * s, parent.v.y + length * theta.d1 * c};
    out.a = {parent.a.x - length * (theta.d2 * s + theta.d1 * theta.d1 * c),
             parent.a.y + length * (theta.d2 * c - theta.d1 * theta.d1 * s)};
    return out;
}

struct BodyKin {
    std::array<Kin, body25::kJointCount> joints;
    AngleState left_forearm, right_forearm, left_shank, right_shank;
};

BodyKin body_kinematics(const KinematicScene& sc, double t) {
    using namespace body25;
    const SegmentLengths& L = sc.segments;
    BodyKin body;

    Kin root;
    root.p = {sc.root_x.value(t), sc.root_y.value(t)};
    root.v = {sc.root_x.d1(t), sc.root_y.d1(t)};
    root.a = {sc.root_x.d2(t), sc.root_y.d2(t)};
    body.joints[kMidHip] = root;

    const AngleState torso = eval(sc.torso, t);
    const Kin neck = chain(root, L.torso, torso);
    body.joints[kNeck] = neck;
    const Kin nose = chain(neck, L.head, torso);
    body.joints[kNose] = nose;
    body.joints[kREye] = chain(nose, 0.04, torso, -kHalfPi);
    body.joints[kLEye] = chain(nose, 0.04, torso, kHalfPi);
    body.joints[kREar] = chain(chain(neck, 0.85 * L.head, torso), 0.08, torso, -kHalfPi);
    body.joints[kLEar] = chain(chain(neck, 0.85 * L.head, torso), 0.08, torso, kHalfPi);

    const Kin r_shoulder = chain(neck, L.shoulder, torso, -kHalfPi);
    const Kin l_shoulder = chain(neck, L.shoulder, torso, kHalfPi);
    body.joints[kRShoulder] = r_shoulder;
    body.joints[kLShoulder] = l_shoulder;

    const AngleState rua = eval(sc.right_upper_arm, t);
    const AngleState rfa = eval(sc.right_forearm, t);
    const Kin r_elbow = chain(r_shoulder, L.upper_arm, rua);
    body.joints[kRElbow] = r_elbow;
    body.joints[kRWrist] = chain(r_elbow, L.forearm, rfa);
    body.right_forearm = rfa;

    const AngleState lua = eval(sc.left_upper_arm, t);
    const AngleState lfa = eval(sc.left_forearm, t);
    const Kin l_elbow = chain(l_shoulder, L.upper_arm, lua);
    body.joints[kLElbow] = l_elbow;
    body.joints[kLWrist] = chain(l_elbow, L.forearm, lfa);
    body.left_forearm = lfa;

    const Kin r_hip = chain(root, L.hip, torso, -kHalfPi);
    const Kin l_hip = chain(root, L.hip, torso, kHalfPi);
    body.joints[kRHip] = r_hip;
    body.joints[kLHip] = l_hip;

    const AngleState rth = eval(sc.right_thigh, t);
    const AngleState rsh = eval(sc.right_shank, t);
    const Kin r_knee = chain(r_hip, L.thigh, rth);
    const Kin r_ankle = chain(r_knee, L.shank, rsh);
    body.joints[kRKnee] = r_knee;
    body.joints[kRAnkle] = r_ankle;
    body.joints[kRHeel] = chain(r_ankle, 0.05, rsh);
    body.joints[kRBigToe] = chain(r_ankle, L.foot, rsh, kHalfPi);
    body.joints[kRSmallToe] = chain(r_ankle, 1.1 * L.foot, rsh, kHalfPi);
    body.right_shank = rsh;

    const AngleState lth = eval(sc.left_thigh, t);
    const AngleState lsh = eval(sc.left_shank, t);
    const Kin l_knee = chain(l_hip, L.thigh, lth);
    const Kin l_ankle = chain(l_knee, L.shank, lsh);
    body.joints[kLKnee] = l_knee;
    body.joints[kLAnkle] = l_ankle;
    body.joints[kLHeel] = chain(l_ankle, 0.05, lsh);
    body.joints[kLBigToe] = chain(l_ankle, L.foot, lsh, kHalfPi);
    body.joints[kLSmallToe] = chain(l_ankle, 1.1 * L.foot, lsh, kHalfPi);
    body.left_shank = lsh;

    return body;
}

size_t sample_count(const KinematicScene& sc) {
    return static_cast<size_t>(std::floor(sc.duration * 50.0 + 1e-9)) + 1;
}

}  // namespace

double SinSum::value(double t) const {
    double acc = mean;
    for (const Term& term : terms) {
        acc += term.amplitude * std::sin(kTwoPi * term.freq_hz * t + term.phase);
    }
    return acc;
}

double SinSum::d1(double t) const {
    double acc = 0.0;
    for (const Term& term : terms) {
        const double w = kTwoPi * term.freq_hz;
        acc += term.amplitude * w * std::cos(w * t + term.phase);
    }
    return acc;
}

double SinSum::d2(double t) const {
    double acc = 0.0;
    for (const Term& term : terms) {
        const double w = kTwoPi * term.freq_hz;
        acc -= term.amplitude * w * w * std::sin(w * t + term.phase);
    }
    return acc;
}

KinematicScene generate_scene(int class_id, std::mt19937& rng, const SceneConfig& cfg) {
    if (class_id < 0 || class_id >= kOracleClassCount) {
        throw std::invalid_argument("generate_scene: class id out of range");
    }
    auto uni = [&rng](double lo, double hi) {
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    auto phase = [&] { return uni(0.0, kTwoPi); };

    KinematicScene sc;
    sc.class_id = class_id;
    sc.duration = cfg.duration;
    sc.camera.zoom_rate = cfg.zoom_rate;
    sc.camera.offset_x = uni(400.0, 900.0);
    sc.camera.offset_y = uni(300.0, 500.0);
    sc.camera.pixels_per_meter = uni(150.0, 280.0);

    sc.torso = {kHalfPi, {{uni(0.015, 0.04), uni(0.3, 0.5), phase()}}};
    sc.root_x = {0.0, {{uni(0.005, 0.02), uni(0.2, 0.4), phase()}}};
    sc.root_y = {1.0, {}};
    // Rest posture, overridden per class below.
    sc.left_upper_arm = {-kHalfPi, {}};
    sc.right_upper_arm = {-kHalfPi, {}};
    sc.left_forearm = {-kHalfPi, {}};
    sc.right_forearm = {-kHalfPi, {}};
    sc.left_thigh = {-kHalfPi, {}};
    sc.right_thigh = {-kHalfPi, {}};
    sc.left_shank = {-kHalfPi, {}};
    sc.right_shank = {-kHalfPi, {}};

    auto idle = [&](SinSum& s) { s.terms.push_back({uni(0.02, 0.05), uni(0.3, 0.6), phase()}); };

    switch (class_id) {
        case 0: {  // slow alternating arm swings
            const double f = uni(0.8, 1.2);
            const double p0 = phase();
            sc.left_upper_arm.terms.push_back({uni(0.5, 0.8), f, p0});
            sc.right_upper_arm.terms.push_back({uni(0.5, 0.8), f, p0 + std::numbers::pi});
            sc.left_forearm.terms.push_back({uni(0.3, 0.5), f, p0 + uni(0.2, 0.6)});
            sc.right_forearm.terms.push_back(
                {uni(0.3, 0.5), f, p0 + std::numbers::pi + uni(0.2, 0.6)});
            idle(sc.left_thigh);
            idle(sc.right_thigh);
            idle(sc.left_shank);
            idle(sc.right_shank);
            break;
        }
        case 1: {  // fast symmetric arm shakes
            const double f = uni(2.3, 3.0);
            const double p0 = phase();
            sc.left_upper_arm.terms.push_back({uni(0.22, 0.38), f, p0});
            sc.right_upper_arm.terms.push_back({uni(0.22, 0.38), f, p0});
            sc.left_forearm.terms.push_back({uni(0.25, 0.4), f, p0 + uni(0.1, 0.4)});
            sc.right_forearm.terms.push_back({uni(0.25, 0.4), f, p0 + uni(0.1, 0.4)});
            idle(sc.left_thigh);
            idle(sc.right_thigh);
            idle(sc.left_shank);
            idle(sc.right_shank);
            break;
        }
        case 2: {  // alternating leg raises
            const double f = uni(0.9, 1.4);
            const double p0 = phase();
            sc.left_thigh.terms.push_back({uni(0.35, 0.6), f, p0});
            sc.right_thigh.terms.push_back({uni(0.35, 0.6), f, p0 + std::numbers::pi});
            sc.left_shank.terms.push_back({uni(0.3, 0.5), f, p0 + uni(0.3, 0.7)});
            sc.right_shank.terms.push_back(
                {uni(0.3, 0.5), f, p0 + std::numbers::pi + uni(0.3, 0.7)});
            idle(sc.left_upper_arm);
            idle(sc.right_upper_arm);
            idle(sc.left_forearm);
            idle(sc.right_forearm);
            break;
        }
        case 3: {  // bouncing with synchronous arm and leg motion
            const double f = uni(1.7, 2.2);
            const double p0 = phase();
            sc.root_y.terms.push_back({uni(0.04, 0.08), f, p0});
            sc.left_upper_arm.terms.push_back({uni(0.4, 0.6), f, p0 + kHalfPi});
            sc.right_upper_arm.terms.push_back({uni(0.4, 0.6), f, p0 + kHalfPi});
            sc.left_forearm.terms.push_back({uni(0.3, 0.45), f, p0 + kHalfPi});
            sc.right_forearm.terms.push_back({uni(0.3, 0.45), f, p0 + kHalfPi});
            sc.left_thigh.terms.push_back({uni(0.15, 0.3), f, p0});
            sc.right_thigh.terms.push_back({uni(0.15, 0.3), f, p0});
            sc.left_shank.terms.push_back({uni(0.12, 0.25), f, p0});
            sc.right_shank.terms.push_back({uni(0.12, 0.25), f, p0});
            break;
        }
    }
    return sc;
}

SensorState sensor_state(const KinematicScene& scene, Placement placement, double t) {
    const BodyKin body = body_kinematics(scene, t);
    const Kin* kin = nullptr;
    const AngleState* angle = nullptr;
    switch (placement) {
        case Placement::left_wrist:
            kin = &body.joints[body25::kLWrist];
            angle = &body.left_forearm;
            break;
        case Placement::right_wrist:
            kin = &body.joints[body25::kRWrist];
            angle = &body.right_forearm;
            break;
        case Placement::left_calf:
            kin = &body.joints[body25::kLAnkle];
            angle = &body.left_shank;
            break;
        case Placement::right_calf:
            kin = &body.joints[body25::kRAnkle];
            angle = &body.right_shank;
            break;
    }
    return {kin->p, kin->v, kin->a, angle->value, angle->d1};
}

std::map<std::string, ChannelSeries> analytic_imu(const KinematicScene& scene,
                                                  Placement placement) {
    const size_t n = sample_count(scene);
    std::map<std::string, ChannelSeries> out;
    for (const char* name : {"acc_norm", "gyr_norm", "ax", "lin_ax"}) {
        ChannelSeries s;
        s.placement = placement;
        s.name = name;
        s.rate = 50.0;
        s.values.resize(n);
        out.emplace(name, std::move(s));
    }
    for (size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / 50.0;
        const SensorState st = sensor_state(scene, placement, t);
        // Specific force: proper acceleration minus gravity, g = (0, -g).
        const Vec2 spec{st.acceleration.x, st.acceleration.y + scene.gravity};
        const Vec2 ux{std::cos(st.angle), std::sin(st.angle)};
        out["acc_norm"].values[k] = std::hypot(spec.x, spec.y);
        out["gyr_norm"].values[k] = std::abs(st.angular_rate);
        out["ax"].values[k] = spec.x * ux.x + spec.y * ux.y;
        out["lin_ax"].values[k] = st.acceleration.x * ux.x + st.acceleration.y * ux.y;
    }
    return out;
}

PoseSequence render_poses(const KinematicScene& scene) {
    const size_t n = sample_count(scene);
    PoseSequence seq;
    seq.rate = 50.0;
    seq.samples.resize(n);
    for (size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) / 50.0;
        const double ppm = scene.camera.pixels_per_meter * (1.0 + scene.camera.zoom_rate * t);
        const BodyKin body = body_kinematics(scene, t);
        for (int j = 0; j < body25::kJointCount; ++j) {
            seq.samples[k][j] = {scene.camera.offset_x + ppm * body.joints[j].p.x,
                                 scene.camera.offset_y - ppm * body.joints[j].p.y};
        }
    }
    return seq;
}

std::vector<RawKeypointFrame> render_keypoint_frames(const KinematicScene& scene,
                                                     const NoiseConfig& noise,
                                                     std::mt19937& rng) {
    const PoseSequence exact = render_poses(scene);
    std::normal_distribution<double> pixel(0.0, noise.pixel_noise_std);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<RawKeypointFrame> frames(exact.length());
    for (size_t k = 0; k < exact.length(); ++k) {
        frames[k].frame_index = static_cast<int>(k);
        PersonKeypoints person;
        for (int j = 0; j < body25::kJointCount; ++j) {
            // MidHip is the tracking anchor; never drop it.
            if (j != body25::kMidHip && uni(rng) < noise.joint_dropout_prob) continue;
            double x = exact.samples[k][j].x;
            double y = exact.samples[k][j].y;
            if (noise.pixel_noise_std > 0.0) {
                x += pixel(rng);
                y += pixel(rng);
            }
            person[j] = Keypoint{x, y, 0.95};
        }
        frames[k].people.push_back(person);
    }
    return frames;
}

std::vector<int> constant_labels(const KinematicScene& scene) {
    return std::vector<int>(sample_count(scene), scene.class_id);
}

}  // namespace vimu::oracle

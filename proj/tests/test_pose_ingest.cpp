#include "doctest.h"

#include <cmath>
#include <sstream>

#include "vimu/pose_ingest.hpp"

using namespace vimu;

namespace {

std::string person_json(const std::vector<std::array<double, 3>>& joints) {
    std::ostringstream out;
    out << "{\"pose_keypoints_2d\":[";
    for (size_t j = 0; j < 25; ++j) {
        if (j) out << ',';
        if (j < joints.size()) {
            out << joints[j][0] << ',' << joints[j][1] << ',' << joints[j][2];
        } else {
            out << "0,0,0";
        }
    }
    out << "]}";
    return out.str();
}

PersonKeypoints person_at(Vec2 midhip) {
    PersonKeypoints p;
    for (int j = 0; j < body25::kJointCount; ++j) {
        p[j] = Keypoint{midhip.x + j, midhip.y, 0.9};
    }
    return p;
}

}  // namespace

TEST_CASE("parse_keypoint_file reads one frame with one person") {
    std::vector<std::array<double, 3>> joints;
    for (int j = 0; j < 25; ++j) joints.push_back({10.0 + j, 20.0 + j, 0.5});
    joints[3] = {120.0, 340.5, 0.91};
    const std::string raw = "{\"people\":[" + person_json(joints) + "]}";
    auto frames = parse_keypoint_file(raw);
    REQUIRE(frames.size() == 1);
    REQUIRE(frames[0].people.size() == 1);
    const PersonKeypoints& p = frames[0].people[0];
    int present = 0;
    for (const auto& joint : p) present += joint.has_value();
    CHECK(present == 25);
    CHECK(p[3]->x == doctest::Approx(120.0));
    CHECK(p[3]->y == doctest::Approx(340.5));
    CHECK(p[3]->confidence == doctest::Approx(0.91));
}

TEST_CASE("parse_keypoint_file handles empty people and empty files") {
    auto frames = parse_keypoint_file("{\"people\":[]}");
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].people.empty());
    CHECK(parse_keypoint_file("").empty());
    CHECK(parse_keypoint_file("  \n").empty());
}

TEST_CASE("parse_keypoint_file reads an array of frames and flags bad ones") {
    std::vector<std::array<double, 3>> joints(25, {1.0, 2.0, 0.5});
    const std::string frame = "{\"people\":[" + person_json(joints) + "]}";
    auto frames = parse_keypoint_file("[" + frame + "," + frame + "]");
    CHECK(frames.size() == 2);
    CHECK(frames[1].frame_index == 1);

    CHECK_THROWS_WITH(parse_keypoint_file("[" + frame + ",{\"people\":[{\"pose_keypoints_2d\":[1,2]}]}]"),
                      doctest::Contains("frame 1"));
    CHECK_THROWS(parse_keypoint_file("{not json"));
}

TEST_CASE("undetected zero triplets parse as absent") {
    std::vector<std::array<double, 3>> joints(25, {0.0, 0.0, 0.0});
    joints[8] = {5.0, 6.0, 0.7};
    auto frames = parse_keypoint_file("{\"people\":[" + person_json(joints) + "]}");
    const PersonKeypoints& p = frames[0].people[0];
    int present = 0;
    for (const auto& joint : p) present += joint.has_value();
    CHECK(present == 1);
    CHECK(p[body25::kMidHip].has_value());
}

TEST_CASE("threshold_joints honors the boundary") {
    RawKeypointFrame frame;
    PersonKeypoints p;
    p[0] = Keypoint{1, 1, 0.0001};
    p[1] = Keypoint{2, 2, 0.0002};
    p[2] = Keypoint{3, 3, 0.9};
    frame.people.push_back(p);

    RawKeypointFrame out = threshold_joints(frame);
    CHECK_FALSE(out.people[0][0].has_value());  // below threshold
    CHECK(out.people[0][1].has_value());        // "at least": boundary retained
    CHECK(out.people[0][2].has_value());

    RawKeypointFrame all = threshold_joints(frame, 0.0);
    int present = 0;
    for (const auto& joint : all.people[0]) present += joint.has_value();
    CHECK(present == 3);
}

TEST_CASE("track_subjects keeps ids across nearby frames") {
    std::vector<RawKeypointFrame> frames(2);
    frames[0].frame_index = 0;
    frames[0].people = {person_at({100, 200}), person_at({500, 200})};
    frames[1].frame_index = 1;
    frames[1].people = {person_at({105, 202}), person_at({495, 198})};

    TrackingConfig cfg = tracking_config_for_image(1920, 1080, 50);
    auto tracks = track_subjects(frames, cfg);
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[0].frames.at(1)[body25::kMidHip]->x == doctest::Approx(105 + 8));
    CHECK(tracks[1].frames.at(1)[body25::kMidHip]->x == doctest::Approx(495 + 8));
}

TEST_CASE("tracking is invariant to per-frame people order") {
    std::vector<RawKeypointFrame> frames(3);
    for (int f = 0; f < 3; ++f) frames[f].frame_index = f;
    frames[0].people = {person_at({100, 100}), person_at({400, 100})};
    frames[1].people = {person_at({402, 101}), person_at({101, 99})};  // swapped order
    frames[2].people = {person_at({102, 100}), person_at({404, 102})};

    TrackingConfig cfg = tracking_config_for_image(640, 480, 50);
    auto tracks = track_subjects(frames, cfg);
    REQUIRE(tracks.size() == 2);
    for (const auto& track : tracks) {
        const double x0 = track.frames.at(0)[body25::kMidHip]->x;
        for (const auto& [idx, person] : track.frames) {
            CHECK(std::abs(person[body25::kMidHip]->x - x0) < 10.0);
        }
    }
}

TEST_CASE("a single person yields one track spanning all frames") {
    std::vector<RawKeypointFrame> frames;
    for (int f = 0; f < 10; ++f) {
        RawKeypointFrame frame;
        frame.frame_index = f;
        frame.people = {person_at({100.0 + f, 200.0})};
        frames.push_back(frame);
    }
    auto tracks = track_subjects(frames, tracking_config_for_image(640, 480, 50));
    REQUIRE(tracks.size() == 1);
    CHECK(tracks[0].frames.size() == 10);
}

TEST_CASE("a distant appearance starts a new track") {
    std::vector<RawKeypointFrame> frames;
    for (int f = 0; f < 60; ++f) {
        RawKeypointFrame frame;
        frame.frame_index = f;
        frame.people = {person_at({100, 100})};
        if (f >= 50) frame.people.push_back(person_at({3000, 3000}));
        frames.push_back(frame);
    }
    auto tracks = track_subjects(frames, tracking_config_for_image(640, 480, 50));
    REQUIRE(tracks.size() == 2);
    CHECK(tracks[1].frames.begin()->first == 50);
}

TEST_CASE("people with no anchor joint are skipped") {
    RawKeypointFrame frame;
    PersonKeypoints no_anchor;
    no_anchor[body25::kRWrist] = Keypoint{10, 10, 0.9};
    frame.people = {no_anchor};
    auto tracks = track_subjects({frame}, tracking_config_for_image(640, 480, 50));
    CHECK(tracks.empty());
}

TEST_CASE("fill_and_resample interpolates the linear midpoint") {
    RawPoseTrack track;
    track.native_fps = 25.0;
    PersonKeypoints a, b;
    for (int j = 0; j < 25; ++j) {
        a[j] = Keypoint{0, 0, 1};
        b[j] = Keypoint{2, 2, 1};
    }
    track.frames[0] = a;
    track.frames[1] = b;  // t = 0.04 s
    PoseSequence seq = fill_and_resample(track);
    REQUIRE(seq.length() == 3);
    CHECK(seq.samples[1][0].x == doctest::Approx(1.0));
    CHECK(seq.samples[1][0].y == doctest::Approx(1.0));
}

TEST_CASE("fill_and_resample is the identity on gap-free 50 fps tracks") {
    RawPoseTrack track;
    track.native_fps = 50.0;
    for (int f = 0; f < 20; ++f) {
        PersonKeypoints p;
        for (int j = 0; j < 25; ++j) p[j] = Keypoint{f * 1.5, f * -0.5, 1};
        track.frames[f] = p;
    }
    PoseSequence seq = fill_and_resample(track);
    REQUIRE(seq.length() == 20);
    for (int f = 0; f < 20; ++f) {
        CHECK(seq.samples[f][7].x == doctest::Approx(f * 1.5));
        CHECK(seq.samples[f][7].y == doctest::Approx(f * -0.5));
    }
}

TEST_CASE("30 fps input matches direct piecewise-linear evaluation") {
    RawPoseTrack track;
    track.native_fps = 30.0;
    std::vector<double> xs;
    for (int f = 0; f <= 30; ++f) {  // 1 second
        PersonKeypoints p;
        const double x = std::sin(0.37 * f) * 40.0 + 100.0;
        xs.push_back(x);
        for (int j = 0; j < 25; ++j) p[j] = Keypoint{x, 2 * x, 1};
        track.frames[f] = p;
    }
    PoseSequence seq = fill_and_resample(track);
    CHECK(seq.length() == 51);
    for (size_t k = 0; k < seq.length(); ++k) {
        // Independent piecewise-linear evaluation at the grid time.
        const double t = k / 50.0;
        const double pos = t * 30.0;
        const size_t i = std::min(static_cast<size_t>(pos), xs.size() - 2);
        const double w = pos - i;
        const double expect = xs[i] * (1 - w) + xs[i + 1] * w;
        CHECK(seq.samples[k][12].x == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("constant tracks resample to constant sequences exactly") {
    RawPoseTrack track;
    track.native_fps = 24.0;
    for (int f = 0; f < 48; f += 3) {  // gaps every other frame
        PersonKeypoints p;
        for (int j = 0; j < 25; ++j) p[j] = Keypoint{42.0, 17.0, 1};
        track.frames[f] = p;
    }
    PoseSequence seq = fill_and_resample(track);
    for (const auto& sample : seq.samples) {
        CHECK(sample[5].x == 42.0);
        CHECK(sample[5].y == 17.0);
    }
}

TEST_CASE("leading and trailing gaps take the nearest known value") {
    RawPoseTrack track;
    track.native_fps = 50.0;
    for (int f = 0; f < 10; ++f) {
        PersonKeypoints p;
        for (int j = 0; j < 25; ++j) {
            if (j == 4 && (f < 3 || f > 7)) continue;  // RWrist missing at the edges
            p[j] = Keypoint{static_cast<double>(j == 4 ? f * 10 : f), 0, 1};
        }
        track.frames[f] = p;
    }
    PoseSequence seq = fill_and_resample(track);
    CHECK(seq.samples[0][4].x == doctest::Approx(30.0));  // first observed at f=3
    CHECK(seq.samples[9][4].x == doctest::Approx(70.0));  // last observed at f=7
    CHECK(seq.samples[5][4].x == doctest::Approx(50.0));
}

TEST_CASE("a joint never observed is a hard error naming the joint") {
    RawPoseTrack track;
    track.native_fps = 50.0;
    for (int f = 0; f < 5; ++f) {
        PersonKeypoints p;
        for (int j = 0; j < 25; ++j) {
            if (j == 13) continue;
            p[j] = Keypoint{1, 1, 1};
        }
        track.frames[f] = p;
    }
    CHECK_THROWS_WITH(fill_and_resample(track), doctest::Contains("joint 13"));
}

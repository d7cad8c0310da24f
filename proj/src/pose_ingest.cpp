#include "vimu/pose_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "json.hpp"

namespace vimu {

namespace {

using nlohmann::json;

PersonKeypoints parse_person(const json& person, int frame_index) {
    if (!person.contains("pose_keypoints_2d")) {
        throw std::runtime_error("keypoint file: person without pose_keypoints_2d in frame " +
                                 std::to_string(frame_index));
    }
    const json& flat = person.at("pose_keypoints_2d");
    if (!flat.is_array() || flat.size() != 3 * body25::kJointCount) {
        throw std::runtime_error("keypoint file: expected 75 values in frame " +
                                 std::to_string(frame_index));
    }
    PersonKeypoints joints;
    for (int j = 0; j < body25::kJointCount; ++j) {
        const double x = flat[3 * j].get<double>();
        const double y = flat[3 * j + 1].get<double>();
        const double conf = flat[3 * j + 2].get<double>();
        if (conf < 0.0) {
            throw std::runtime_error("keypoint file: negative confidence in frame " +
                                     std::to_string(frame_index));
        }
        if (x == 0.0 && y == 0.0 && conf == 0.0) continue;  // undetected joint
        joints[j] = Keypoint{x, y, conf};
    }
    return joints;
}

RawKeypointFrame parse_frame(const json& doc, int frame_index) {
    RawKeypointFrame frame;
    frame.frame_index = doc.value("frame_index", frame_index);
    if (!doc.contains("people")) {
        throw std::runtime_error("keypoint file: missing 'people' in frame " +
                                 std::to_string(frame_index));
    }
    for (const json& person : doc.at("people")) {
        frame.people.push_back(parse_person(person, frame.frame_index));
    }
    return frame;
}

}  // namespace

std::vector<RawKeypointFrame> parse_keypoint_file(const std::string& raw) {
    if (raw.find_first_not_of(" \t\r\n") == std::string::npos) return {};
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("keypoint file: ") + e.what());
    }
    std::vector<RawKeypointFrame> frames;
    if (doc.is_array()) {
        for (size_t i = 0; i < doc.size(); ++i) {
            frames.push_back(parse_frame(doc[i], static_cast<int>(i)));
        }
    } else {
        frames.push_back(parse_frame(doc, 0));
    }
    return frames;
}

RawKeypointFrame threshold_joints(const RawKeypointFrame& frame, double min_conf) {
    if (min_conf < 0.0) throw std::invalid_argument("threshold_joints: min_conf must be >= 0");
    RawKeypointFrame out = frame;
    for (PersonKeypoints& person : out.people) {
        for (auto& joint : person) {
            if (joint && joint->confidence < min_conf) joint.reset();
        }
    }
    return out;
}

TrackingConfig tracking_config_for_image(double width, double height, double fps) {
    TrackingConfig cfg;
    cfg.gating_radius = 0.5 * std::hypot(width, height);
    cfg.native_fps = fps;
    return cfg;
}

namespace {

std::optional<Vec2> anchor_point(const PersonKeypoints& person) {
    if (person[body25::kMidHip]) {
        return Vec2{person[body25::kMidHip]->x, person[body25::kMidHip]->y};
    }
    if (person[body25::kNeck]) {
        return Vec2{person[body25::kNeck]->x, person[body25::kNeck]->y};
    }
    return std::nullopt;
}

}  // namespace

std::vector<RawPoseTrack> track_subjects(const std::vector<RawKeypointFrame>& frames,
                                         const TrackingConfig& cfg) {
    struct Track {
        RawPoseTrack track;
        Vec2 last_anchor;
    };
    std::vector<Track> tracks;
    int next_id = 0;

    for (const RawKeypointFrame& frame : frames) {
        // Greedy nearest-neighbor assignment, closest pairs first, so the
        // result does not depend on the per-frame people order.
        struct Candidate {
            double dist;
            size_t person;
            size_t track;
        };
        std::vector<Candidate> candidates;
        std::vector<std::optional<Vec2>> anchors(frame.people.size());
        for (size_t p = 0; p < frame.people.size(); ++p) {
            anchors[p] = anchor_point(frame.people[p]);
            if (!anchors[p]) {
                std::cerr << "track_subjects: person " << p << " in frame " << frame.frame_index
                          << " has no anchor joint, skipped\n";
                continue;
            }
            for (size_t t = 0; t < tracks.size(); ++t) {
                const double d = euclidean(*anchors[p], tracks[t].last_anchor);
                if (d <= cfg.gating_radius) candidates.push_back({d, p, t});
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
            if (a.dist != b.dist) return a.dist < b.dist;
            return a.person < b.person;
        });
        std::vector<bool> person_done(frame.people.size(), false);
        std::vector<bool> track_done(tracks.size(), false);
        for (const Candidate& c : candidates) {
            if (person_done[c.person] || track_done[c.track]) continue;
            person_done[c.person] = true;
            track_done[c.track] = true;
            tracks[c.track].track.frames[frame.frame_index] = frame.people[c.person];
            tracks[c.track].last_anchor = *anchors[c.person];
        }
        for (size_t p = 0; p < frame.people.size(); ++p) {
            if (person_done[p] || !anchors[p]) continue;
            Track t;
            t.track.person_id = next_id++;
            t.track.native_fps = cfg.native_fps;
            t.track.frames[frame.frame_index] = frame.people[p];
            t.last_anchor = *anchors[p];
            tracks.push_back(std::move(t));
        }
    }

    std::vector<RawPoseTrack> out;
    out.reserve(tracks.size());
    for (Track& t : tracks) out.push_back(std::move(t.track));
    std::sort(out.begin(), out.end(),
              [](const RawPoseTrack& a, const RawPoseTrack& b) { return a.person_id < b.person_id; });
    return out;
}

PoseSequence fill_and_resample(const RawPoseTrack& track, double target_rate) {
    if (track.frames.empty()) throw std::invalid_argument("fill_and_resample: empty track");
    if (track.native_fps <= 0.0) throw std::invalid_argument("fill_and_resample: fps must be > 0");

    const int first_index = track.frames.begin()->first;
    const int last_index = track.frames.rbegin()->first;
    const double duration = static_cast<double>(last_index - first_index) / track.native_fps;
    const size_t n_out = static_cast<size_t>(std::floor(duration * target_rate + 1e-9)) + 1;

    PoseSequence seq;
    seq.rate = target_rate;
    seq.samples.resize(n_out);

    for (int j = 0; j < body25::kJointCount; ++j) {
        std::vector<double> times;
        std::vector<Vec2> points;
        for (const auto& [index, person] : track.frames) {
            if (!person[j]) continue;
            times.push_back(static_cast<double>(index - first_index) / track.native_fps);
            points.push_back({person[j]->x, person[j]->y});
        }
        if (times.empty()) {
            throw std::runtime_error("fill_and_resample: joint " + std::to_string(j) +
                                     " never observed in track " +
                                     std::to_string(track.person_id));
        }
        size_t seg = 0;
        for (size_t k = 0; k < n_out; ++k) {
            const double t = static_cast<double>(k) / target_rate;
            Vec2 value;
            if (t <= times.front()) {
                value = points.front();  // leading gap: nearest value
            } else if (t >= times.back()) {
                value = points.back();  // trailing gap: nearest value
            } else {
                while (seg + 2 < times.size() && times[seg + 1] < t) ++seg;
                const double w = (t - times[seg]) / (times[seg + 1] - times[seg]);
                value = points[seg] * (1.0 - w) + points[seg + 1] * w;
            }
            seq.samples[k][j] = value;
        }
    }
    return seq;
}

}  // namespace vimu

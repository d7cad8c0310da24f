// Command-line entry point: every subcommand maps onto one pipeline stage.
//
// Exit codes (also listed in --help):
//   0  success
//   2  bad command line or unknown configuration key
//   3  a required input file is missing
//   4  an input file violates its schema
//   5  a domain invariant failed (bad parameters, degenerate data)
//   1  unexpected internal error

#include <filesystem>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "vimu/experiments.hpp"
#include "vimu/har_classifier.hpp"
#include "vimu/imu_dsp.hpp"
#include "vimu/imu_regressor.hpp"
#include "vimu/pose_features.hpp"
#include "vimu/pose_ingest.hpp"
#include "vimu/synth_oracle.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vimu;

namespace {

constexpr const char* kExitCodeHelp =
    "Exit codes: 0 success, 2 usage/config error, 3 missing file, "
    "4 schema violation, 5 failed invariant, 1 internal error.";

struct MissingFile : std::exception {
    std::string message;
    explicit MissingFile(const std::string& path) : message("missing file: " + path) {}
    const char* what() const noexcept override { return message.c_str(); }
};

std::string must_read(const std::string& path) {
    if (!fs::exists(path)) throw MissingFile(path);
    return read_text_file(path);
}

/// Options shared across subcommands; a --config JSON may preset any of
/// them, command-line flags win.
struct Opts {
    uint64_t seed = 0;
    int workers = 1;
    std::string out;
    std::string manifest;
    std::string plan;

    std::string placement = "left_wrist";
    std::string channel = "acc_norm";
    std::vector<std::string> channels = {"acc_norm"};
    std::string filter = "8hz";
    std::string scaler = "standard";
    std::string mix = "real";
    int k = 1;
    int j = 1;

    double fps = 50.0;
    double image_width = 1280.0;
    double image_height = 720.0;

    int train_users = 3;
    int test_users = 1;
    int external_videos = 0;
    double duration = 8.0;
    double pixel_noise = 0.0;
    double joint_dropout = 0.0;

    int max_epochs = 500;
    int patience = 25;
    int batch_size = 64;
    double lr = 0.001;
    std::vector<int> tcn_channels = {32, 32, 16};
    std::vector<int> tcn_dilations = {1, 2, 4};
    double dropout = 0.1;
    int kernel_width = 3;

    std::vector<std::string> models;
    std::vector<int> anchor_frames;
    std::string real_file;
    std::string simulated_file;
    bool dry_run = false;
};

/// Applies config-file values for flags the user did not pass explicitly.
void apply_config(const std::string& path, CLI::App* cmd, Opts& o) {
    json doc;
    try {
        doc = json::parse(must_read(path));
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
    }
    auto set = [&](const char* key, auto& field) {
        if (!doc.contains(key)) return;
        const CLI::Option* opt = cmd->get_option_no_throw(std::string("--") + key);
        if (opt != nullptr && opt->count() > 0) return;  // explicit flag wins
        doc.at(key).get_to(field);
        doc.erase(key);
    };
    set("seed", o.seed);
    set("workers", o.workers);
    set("out", o.out);
    set("manifest", o.manifest);
    set("plan", o.plan);
    set("placement", o.placement);
    set("channel", o.channel);
    set("channels", o.channels);
    set("filter", o.filter);
    set("scaler", o.scaler);
    set("mix", o.mix);
    set("k", o.k);
    set("j", o.j);
    set("fps", o.fps);
    set("image-width", o.image_width);
    set("image-height", o.image_height);
    set("train-users", o.train_users);
    set("test-users", o.test_users);
    set("external-videos", o.external_videos);
    set("duration", o.duration);
    set("pixel-noise", o.pixel_noise);
    set("joint-dropout", o.joint_dropout);
    set("max-epochs", o.max_epochs);
    set("patience", o.patience);
    set("batch-size", o.batch_size);
    set("lr", o.lr);
    set("tcn-channels", o.tcn_channels);
    set("tcn-dilations", o.tcn_dilations);
    set("dropout", o.dropout);
    set("kernel-width", o.kernel_width);
    set("models", o.models);
    set("anchor-frames", o.anchor_frames);
    set("real", o.real_file);
    set("simulated", o.simulated_file);
    if (!doc.empty()) {
        std::string keys;
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            keys += (keys.empty() ? "" : ", ") + it.key();
        }
        throw CLI::ValidationError("config", "unknown configuration keys: " + keys);
    }
}

json resolved_config(const Opts& o, const std::string& command) {
    return json{{"command", command},
                {"seed", o.seed},
                {"workers", o.workers},
                {"out", o.out},
                {"manifest", o.manifest},
                {"plan", o.plan},
                {"placement", o.placement},
                {"channel", o.channel},
                {"channels", o.channels},
                {"filter", o.filter},
                {"scaler", o.scaler},
                {"mix", o.mix},
                {"k", o.k},
                {"j", o.j},
                {"fps", o.fps},
                {"duration", o.duration},
                {"pixel-noise", o.pixel_noise},
                {"joint-dropout", o.joint_dropout},
                {"train-users", o.train_users},
                {"test-users", o.test_users},
                {"external-videos", o.external_videos},
                {"max-epochs", o.max_epochs},
                {"patience", o.patience},
                {"batch-size", o.batch_size},
                {"lr", o.lr},
                {"tcn-channels", o.tcn_channels},
                {"tcn-dilations", o.tcn_dilations},
                {"dropout", o.dropout},
                {"kernel-width", o.kernel_width},
                {"models", o.models}};
}

/// Every artifact-producing run records the settings it resolved to.
void write_resolved_config(const Opts& o, const std::string& command) {
    if (o.out.empty()) return;
    const fs::path out(o.out);
    const fs::path path = (fs::is_directory(out) || out.extension().empty())
                              ? out / "run_config.json"
                              : out.parent_path() / (out.stem().string() + ".run_config.json");
    write_text_file(path.string(), resolved_config(o, command).dump(2) + "\n");
}

nn::Topology topology_from(const Opts& o) {
    nn::Topology topo;
    topo.kernel_width = o.kernel_width;
    topo.dilations = o.tcn_dilations;
    topo.channels = o.tcn_channels;
    topo.dropout = o.dropout;
    return topo;
}

// ---------------------------------------------------------------------------
// Pose loading shared by train-regression and simulate.

NormalizedPoseSequence load_normalized_poses(const std::string& path, const Opts& o) {
    auto frames = parse_keypoint_file(must_read(path));
    if (frames.empty()) throw std::runtime_error(path + ": no frames");
    std::vector<RawKeypointFrame> kept;
    kept.reserve(frames.size());
    for (const auto& f : frames) kept.push_back(threshold_joints(f));
    auto tracks = track_subjects(kept, tracking_config_for_image(o.image_width, o.image_height, o.fps));
    if (tracks.empty()) throw std::runtime_error(path + ": no trackable person");
    // Largest track is the subject.
    const auto largest = std::max_element(
        tracks.begin(), tracks.end(),
        [](const RawPoseTrack& a, const RawPoseTrack& b) { return a.frames.size() < b.frames.size(); });
    return normalize_pose_sequence(fill_and_resample(*largest));
}

ChannelSeries session_channel(const SessionData& data, Placement placement,
                              const std::string& name) {
    for (const ChannelSeries& c : data.channels) {
        if (c.placement == placement && c.name == name) return c;
    }
    throw std::runtime_error("channel '" + name + "' not found for placement " +
                             placement_name(placement));
}

// ---------------------------------------------------------------------------
// synth-gen

const std::vector<std::string> kOracleClassNames = {"swing", "shake", "kick", "bounce"};

struct GeneratedSession {
    std::vector<RawKeypointFrame> frames;
    std::map<std::string, std::map<std::string, std::vector<double>>> imu;  // placement -> channel
    std::vector<std::array<size_t, 2>> class_ranges;  // [start, end) per class
};

GeneratedSession generate_session(std::mt19937& rng, const Opts& o, bool with_imu) {
    GeneratedSession out;
    oracle::NoiseConfig noise{o.pixel_noise, o.joint_dropout};
    oracle::Camera camera;
    bool have_camera = false;
    size_t sample_base = 0;
    for (int cls = 0; cls < oracle::kOracleClassCount; ++cls) {
        oracle::KinematicScene scene = oracle::generate_scene(cls, rng, {.duration = o.duration});
        if (!have_camera) {  // one camera per session, not per segment
            camera = scene.camera;
            have_camera = true;
        }
        scene.camera = camera;
        auto frames = oracle::render_keypoint_frames(scene, noise, rng);
        for (auto& f : frames) {
            f.frame_index = static_cast<int>(out.frames.size());
            out.frames.push_back(std::move(f));
        }
        if (with_imu) {
            for (Placement p : kAllPlacements) {
                auto channels = oracle::analytic_imu(scene, p);
                for (auto& [name, series] : channels) {
                    auto& dest = out.imu[placement_name(p)][name];
                    dest.insert(dest.end(), series.values.begin(), series.values.end());
                }
            }
        }
        const size_t n = oracle::constant_labels(scene).size();
        out.class_ranges.push_back({sample_base, sample_base + n});
        sample_base += n;
    }
    return out;
}

std::string keypoint_frames_json(const std::vector<RawKeypointFrame>& frames) {
    json doc = json::array();
    for (const RawKeypointFrame& frame : frames) {
        json people = json::array();
        for (const PersonKeypoints& person : frame.people) {
            std::vector<double> flat;
            flat.reserve(3 * body25::kJointCount);
            for (const auto& joint : person) {
                if (joint) {
                    flat.insert(flat.end(), {joint->x, joint->y, joint->confidence});
                } else {
                    flat.insert(flat.end(), {0.0, 0.0, 0.0});
                }
            }
            people.push_back({{"pose_keypoints_2d", flat}});
        }
        doc.push_back({{"frame_index", frame.frame_index}, {"people", people}});
    }
    return doc.dump();
}

std::string labels_csv(const GeneratedSession& s) {
    std::ostringstream out;
    out << "start_sample,end_sample,class_name\n";
    for (size_t cls = 0; cls < s.class_ranges.size(); ++cls) {
        out << s.class_ranges[cls][0] << ',' << s.class_ranges[cls][1] << ','
            << kOracleClassNames[cls] << '\n';
    }
    return out.str();
}

std::string imu_channels_csv(const std::map<std::string, std::vector<double>>& channels) {
    ImuRecording rec;
    rec.channels = channels;
    const size_t n = channels.begin()->second.size();
    rec.timestamps.resize(n);
    for (size_t i = 0; i < n; ++i) rec.timestamps[i] = static_cast<double>(i) / 50.0;
    return write_imu_csv(rec);
}

json session_entry_json(const std::string& id, const std::string& user, const std::string& role,
                        const std::string& source, const GeneratedSession& s) {
    json imu_files = json::object();
    for (const auto& [placement, channels] : s.imu) {
        imu_files[placement] = id + "/" + placement + ".csv";
    }
    return json{{"id", id},          {"user", user},
                {"role", role},      {"source", source},
                {"imu_files", imu_files}, {"pose_files", {id + "/poses.json"}},
                {"label_file", id + "/labels.csv"}, {"fps", 50.0}};
}

void write_session_files(const fs::path& dir, const std::string& id, const GeneratedSession& s) {
    write_text_file((dir / id / "poses.json").string(), keypoint_frames_json(s.frames));
    write_text_file((dir / id / "labels.csv").string(), labels_csv(s));
    for (const auto& [placement, channels] : s.imu) {
        write_text_file((dir / id / (placement + ".csv")).string(), imu_channels_csv(channels));
    }
}

int cmd_synth_gen(const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("synth-gen: --out directory is required");
    const fs::path dir(o.out);
    std::mt19937 rng(o.seed);

    json manifest;
    json sessions = json::array();
    std::vector<std::string> ranked;
    for (int u = 1; u <= o.train_users; ++u) {
        const std::string user = "u" + std::to_string(u);
        const std::string id = user + "_real";
        GeneratedSession s = generate_session(rng, o, true);
        write_session_files(dir, id, s);
        sessions.push_back(session_entry_json(id, user, "train", "real", s));
        ranked.push_back(user);
    }
    for (int u = 1; u <= o.test_users; ++u) {
        const std::string user = "t" + std::to_string(u);
        const std::string id = user + "_real";
        GeneratedSession s = generate_session(rng, o, true);
        write_session_files(dir, id, s);
        sessions.push_back(session_entry_json(id, user, "test", "real", s));
    }
    for (int v = 1; v <= o.external_videos; ++v) {
        // Video-only externals: poses and labels now, signals via `simulate`.
        const std::string user = "ext" + std::to_string(v);
        const std::string id = user + "_video";
        GeneratedSession s = generate_session(rng, o, false);
        write_session_files(dir, id, s);
        sessions.push_back(session_entry_json(id, user, "train", "simulated_external", s));
    }
    json classes = json::object();
    for (size_t c = 0; c < kOracleClassNames.size(); ++c) classes[kOracleClassNames[c]] = c;
    manifest["ranked_users"] = ranked;
    manifest["classes"] = classes;
    manifest["sessions"] = sessions;
    write_text_file((dir / "manifest.json").string(), manifest.dump(2) + "\n");
    write_resolved_config(o, "synth-gen");
    std::cout << "wrote " << sessions.size() << " sessions to " << dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// ingestion commands

int cmd_ingest_poses(const std::string& input, const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("ingest-poses: --out file is required");
    auto frames = parse_keypoint_file(must_read(input));
    if (frames.empty()) throw std::runtime_error(input + ": no frames");
    std::vector<RawKeypointFrame> kept;
    for (const auto& f : frames) kept.push_back(threshold_joints(f));
    auto tracks =
        track_subjects(kept, tracking_config_for_image(o.image_width, o.image_height, o.fps));
    if (tracks.empty()) throw std::runtime_error(input + ": no trackable person");
    for (size_t t = 0; t < tracks.size(); ++t) {
        const NormalizedPoseSequence norm = normalize_pose_sequence(fill_and_resample(tracks[t]));
        fs::path out(o.out);
        if (t > 0) {
            out = out.parent_path() /
                  (out.stem().string() + "_track" + std::to_string(t) + out.extension().string());
        }
        write_text_file(out.string(), write_normalized_csv(norm));
    }
    write_resolved_config(o, "ingest-poses");
    std::cout << tracks.size() << " track(s) written\n";
    return 0;
}

int cmd_ingest_imu(const std::string& input, const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("ingest-imu: --out file is required");
    ImuRecording rec = resample_linear(parse_imu_csv(must_read(input)), 50.0);
    if (rec.channels.count("ax") && rec.channels.count("ay") && rec.channels.count("az")) {
        rec.channels["acc_norm"] =
            channel_norm(rec.channels["ax"], rec.channels["ay"], rec.channels["az"]);
    }
    if (rec.channels.count("gx") && rec.channels.count("gy") && rec.channels.count("gz")) {
        rec.channels["gyr_norm"] =
            channel_norm(rec.channels["gx"], rec.channels["gy"], rec.channels["gz"]);
    }
    if (rec.channels.count("lax")) rec.channels["lin_ax"] = rec.channels["lax"];
    write_text_file(o.out, write_imu_csv(rec));
    write_resolved_config(o, "ingest-imu");
    return 0;
}

int cmd_sync(const std::string& input, const Opts& o) {
    if (o.anchor_frames.empty()) {
        throw std::invalid_argument("sync: --anchor-frames is required");
    }
    ImuRecording rec = resample_linear(parse_imu_csv(must_read(input)), 50.0);
    ChannelSeries acc;
    acc.rate = 50.0;
    if (rec.channels.count("acc_norm")) {
        acc.values = rec.channels["acc_norm"];
    } else if (rec.channels.count("ax") && rec.channels.count("ay") && rec.channels.count("az")) {
        acc.values = channel_norm(rec.channels["ax"], rec.channels["ay"], rec.channels["az"]);
    } else {
        throw std::runtime_error(input + ": no accelerometer channels for sync");
    }
    const double offset = detect_sync_offset(acc, o.anchor_frames, o.fps);
    std::cout << "offset_seconds=" << offset << "\n";
    if (!o.out.empty()) {
        write_text_file(o.out, write_imu_csv(align_recording(rec, offset)));
        write_resolved_config(o, "sync");
    }
    return 0;
}

// ---------------------------------------------------------------------------
// regression commands

int cmd_train_regression(const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("train-regression: --out file is required");
    const DatasetManifest manifest = parse_manifest(must_read(o.manifest));
    const std::string base_dir = fs::path(o.manifest).parent_path().string();
    const Placement placement = placement_from_name(o.placement);

    RegressorSpec spec;
    spec.placement = placement;
    spec.channel = o.channel;
    spec.topology = topology_from(o);
    spec.filter = filter_policy_from_name(o.filter);
    spec.scaler = scaler_policy_from_name(o.scaler);

    std::vector<PairedSeries> data;
    int session_id = 0;
    for (const SessionEntry& entry : manifest.sessions) {
        if (entry.role != SessionRole::train || entry.source != DataSource::real) continue;
        if (entry.pose_files.empty()) continue;
        PairedSeries pair;
        pair.session_id = session_id++;
        const std::string pose_path =
            (fs::path(base_dir) / entry.pose_files[0]).lexically_normal().string();
        pair.poses = load_normalized_poses(pose_path, o);
        pair.target =
            session_channel(load_session(entry, manifest.class_ids, base_dir), placement, o.channel);
        const size_t n = std::min(pair.poses.length(), pair.target.values.size());
        pair.poses.joints.resize(n);
        pair.poses.scales.scale.resize(n);
        pair.poses.scales.speed.resize(n);
        pair.poses.scales.speed_deriv.resize(n);
        pair.target.values.resize(n);
        data.push_back(std::move(pair));
    }
    if (data.empty()) {
        throw std::invalid_argument("train-regression: manifest has no real train sessions");
    }

    RegressorTrainConfig cfg;
    cfg.train.max_epochs = o.max_epochs;
    cfg.train.patience = o.patience;
    cfg.train.batch_size = o.batch_size;
    cfg.train.seed = o.seed;
    cfg.lr = o.lr;
    TrainedRegressor model = train_regressor(spec, data, cfg);
    write_text_file(o.out, save_checkpoint(model));
    write_resolved_config(o, "train-regression");
    std::cout << "trained " << o.placement << "/" << o.channel << ", best epoch "
              << model.history.best_epoch << ", val loss "
              << model.history.val_loss[model.history.best_epoch - 1] << "\n";
    return 0;
}

int cmd_simulate(const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("simulate: --out directory is required");
    if (o.models.empty()) throw std::invalid_argument("simulate: --models is required");
    const DatasetManifest manifest = parse_manifest(must_read(o.manifest));
    const std::string base_dir = fs::path(o.manifest).parent_path().string();
    const fs::path out_dir(o.out);

    std::vector<TrainedRegressor> models;
    for (const std::string& path : o.models) models.push_back(load_checkpoint(must_read(path)));

    // Copied sessions keep living next to the input manifest, so their
    // paths become absolute; only newly-written files stay relative.
    auto absolute = [&](const std::string& p) {
        const fs::path path(p);
        return path.is_absolute() ? p : fs::absolute(fs::path(base_dir) / path).lexically_normal().string();
    };
    json sessions = json::array();
    auto entry_json = [&](const SessionEntry& e, const json& imu_files, const std::string& id,
                          const std::string& source, bool resolve_paths) {
        json pose_files = json::array();
        for (const std::string& p : e.pose_files) {
            pose_files.push_back(resolve_paths ? absolute(p) : p);
        }
        return json{{"id", id},           {"user", e.user},
                    {"role", e.role == SessionRole::train ? "train" : "test"},
                    {"source", source},   {"imu_files", imu_files},
                    {"pose_files", pose_files},
                    {"label_file", resolve_paths ? absolute(e.label_file) : e.label_file},
                    {"fps", e.fps}};
    };

    int simulated_count = 0;
    for (const SessionEntry& entry : manifest.sessions) {
        // Keep the original entry (externals get their files filled in below).
        const bool fill_external =
            entry.source == DataSource::simulated_external && entry.imu_files.empty();
        const bool derive_local =
            entry.role == SessionRole::train && entry.source == DataSource::real;
        if (!fill_external) {
            json imu_files = json::object();
            for (const auto& [p, f] : entry.imu_files) imu_files[p] = absolute(f);
            sessions.push_back(entry_json(entry, imu_files, entry.id,
                                          source_name(entry.source), true));
        }
        if (!fill_external && !derive_local) continue;
        if (entry.pose_files.empty()) {
            throw std::runtime_error("session '" + entry.id + "' has no pose files to simulate");
        }

        const std::string pose_path =
            (fs::path(base_dir) / entry.pose_files[0]).lexically_normal().string();
        const NormalizedPoseSequence norm = load_normalized_poses(pose_path, o);

        const std::string sim_id = fill_external ? entry.id : entry.id + "_sim";
        std::map<std::string, std::map<std::string, std::vector<double>>> by_placement;
        for (TrainedRegressor& model : models) {
            ChannelSeries sim = simulate_channel(model, norm);
            by_placement[placement_name(model.spec.placement)][model.spec.channel] =
                std::move(sim.values);
        }
        json imu_files = json::object();
        for (const auto& [placement, channels] : by_placement) {
            const std::string rel = sim_id + "/" + placement + ".csv";
            write_text_file((out_dir / rel).string(), imu_channels_csv(channels));
            imu_files[placement] = rel;
        }
        // Labels describe the activity, which simulation does not change.
        const std::string label_rel = sim_id + "/labels.csv";
        write_text_file((out_dir / label_rel).string(),
                        must_read((fs::path(base_dir) / entry.label_file).string()));
        SessionEntry sim_entry = entry;
        sim_entry.label_file = label_rel;
        sim_entry.pose_files.clear();
        sim_entry.pose_files.push_back(absolute(entry.pose_files[0]));
        json sim_json = entry_json(sim_entry, imu_files, sim_id,
                                   fill_external ? "simulated_external" : "simulated_local", false);
        sessions.push_back(std::move(sim_json));
        ++simulated_count;
    }

    json out_manifest;
    out_manifest["ranked_users"] = manifest.ranked_users;
    json classes = json::object();
    for (const auto& [name, id] : manifest.class_ids) classes[name] = id;
    out_manifest["classes"] = classes;
    out_manifest["sessions"] = sessions;
    write_text_file((out_dir / "manifest.json").string(), out_manifest.dump(2) + "\n");
    write_resolved_config(o, "simulate");
    std::cout << "simulated " << simulated_count << " session(s), manifest at "
              << (out_dir / "manifest.json").string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// classification commands

struct PreparedChannels {
    std::vector<ChannelSeries> channels;
    std::vector<std::string> layout;
};

PreparedChannels prepare_channels(const SessionData& data, const std::vector<std::string>& names,
                                  FilterPolicy filter, const std::vector<ScalerParams>& scalers) {
    PreparedChannels out;
    out.channels = select_channels(data, names);
    const double cutoff = filter_cutoff_hz(filter);
    for (size_t c = 0; c < out.channels.size(); ++c) {
        if (cutoff > 0.0) out.channels[c] = butterworth_lowpass(out.channels[c], cutoff);
        if (!scalers.empty()) {
            out.channels[c].values = apply_scaler(out.channels[c].values, scalers[c]);
        }
    }
    out.layout = channel_layout(out.channels);
    return out;
}

/// Pose-only sessions (externals before `simulate`) carry no signals and
/// cannot feed training; drop them rather than failing the whole load.
DatasetManifest drop_signal_free_sessions(DatasetManifest manifest) {
    auto removed = std::erase_if(manifest.sessions, [](const SessionEntry& e) {
        return e.imu_files.empty();
    });
    if (removed > 0) {
        std::cerr << "note: skipping " << removed
                  << " session(s) without signal files; run `simulate` to fill them\n";
    }
    return manifest;
}

int cmd_train_har(const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("train-har: --out file is required");
    const DatasetManifest manifest =
        drop_signal_free_sessions(parse_manifest(must_read(o.manifest)));
    const std::string base_dir = fs::path(o.manifest).parent_path().string();
    const SessionTable table = load_sessions(manifest, base_dir);
    const FilterPolicy filter = filter_policy_from_name(o.filter);
    const ScalerPolicy scaler_policy = scaler_policy_from_name(o.scaler);
    const TrainingMix mix{o.mix, o.k, o.j};

    const auto selected = select_training_sessions(manifest, mix);
    const double cutoff = filter_cutoff_hz(filter);
    std::vector<std::vector<ChannelSeries>> filtered;
    for (const auto& [id, simulated] : selected) {
        std::vector<ChannelSeries> chans = select_channels(table.at(id), o.channels);
        if (cutoff > 0.0) {
            for (ChannelSeries& c : chans) c = butterworth_lowpass(c, cutoff);
        }
        filtered.push_back(std::move(chans));
    }
    std::vector<ScalerParams> scalers;
    if (scaler_policy == ScalerPolicy::standard) {
        for (size_t c = 0; c < filtered[0].size(); ++c) {
            std::vector<const std::vector<double>*> pool;
            for (const auto& session : filtered) pool.push_back(&session[c].values);
            scalers.push_back(fit_scaler(pool));
        }
    }
    std::vector<LabeledWindow> windows;
    std::vector<std::string> layout;
    for (size_t i = 0; i < selected.size(); ++i) {
        if (!scalers.empty()) {
            for (size_t c = 0; c < filtered[i].size(); ++c) {
                filtered[i][c].values = apply_scaler(filtered[i][c].values, scalers[c]);
            }
        }
        if (layout.empty()) layout = channel_layout(filtered[i]);
        auto w = make_classification_windows(filtered[i], table.at(selected[i].first).labels,
                                             selected[i].second);
        windows.insert(windows.end(), w.begin(), w.end());
    }

    ClassifierConfig cfg;
    cfg.topology = topology_from(o);
    cfg.class_count = manifest.class_count();
    for (const auto& [name, id] : manifest.class_ids) {
        cfg.class_names.resize(manifest.class_count());
        cfg.class_names[id] = name;
    }
    cfg.train.max_epochs = o.max_epochs;
    cfg.train.patience = o.patience;
    cfg.train.batch_size = o.batch_size;
    cfg.train.seed = o.seed;
    cfg.lr = o.lr;
    ClassifierModel model = train_classifier(windows, layout, cfg);

    write_text_file(o.out, save_classifier(model));
    json meta;
    meta["channels"] = o.channels;
    meta["filter"] = filter_policy_name(filter);
    meta["scaler"] = scaler_policy_name(scaler_policy);
    json scaler_json = json::array();
    for (const ScalerParams& s : scalers) {
        scaler_json.push_back({{"mean", s.mean}, {"std", s.std}});
    }
    meta["scaler_params"] = scaler_json;
    write_text_file(o.out + ".meta.json", meta.dump(2) + "\n");
    write_resolved_config(o, "train-har");
    std::cout << "trained classifier on " << windows.size() << " windows\n";
    return 0;
}

int cmd_evaluate(const Opts& o) {
    if (o.models.empty()) throw std::invalid_argument("evaluate: --models is required");
    const DatasetManifest manifest = parse_manifest(must_read(o.manifest));
    const std::string base_dir = fs::path(o.manifest).parent_path().string();

    std::vector<const SessionEntry*> test_sessions;
    for (const SessionEntry& e : manifest.sessions) {
        if (e.role == SessionRole::test && e.source == DataSource::real) {
            test_sessions.push_back(&e);
        }
    }
    if (test_sessions.empty()) {
        throw std::invalid_argument(
            "evaluate: manifest field 'sessions' has no entries with role=test source=real");
    }

    ClassifierModel model = load_classifier(must_read(o.models[0]));
    const json meta = json::parse(must_read(o.models[0] + ".meta.json"));
    const std::vector<std::string> names = meta.at("channels").get<std::vector<std::string>>();
    const FilterPolicy filter = filter_policy_from_name(meta.at("filter").get<std::string>());
    std::vector<ScalerParams> scalers;
    for (const json& s : meta.at("scaler_params")) {
        scalers.push_back({s.at("mean").get<double>(), s.at("std").get<double>()});
    }

    std::vector<int> pred, truth;
    for (const SessionEntry* entry : test_sessions) {
        const SessionData data = load_session(*entry, manifest.class_ids, base_dir);
        PreparedChannels prepared = prepare_channels(data, names, filter, scalers);
        auto windows = make_classification_windows(prepared.channels, data.labels);
        Prediction p = predict(model, windows, prepared.layout);
        for (size_t i = 0; i < windows.size(); ++i) {
            pred.push_back(p.window_labels[i]);
            truth.push_back(windows[i].majority);
        }
    }
    const F1Report f1 = mean_f1(pred, truth, manifest.class_count());
    std::cout << "macro_f1=" << f1.macro << "\n";
    if (!o.out.empty()) {
        json report;
        report["macro_f1"] = f1.macro;
        report["per_class_f1"] = f1.per_class;
        report["confusion"] = f1.confusion;
        report["test_windows"] = pred.size();
        write_text_file((fs::path(o.out) / "evaluation.json").string(), report.dump(2) + "\n");
        write_resolved_config(o, "evaluate");
    }
    return 0;
}

int cmd_sweep(const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("sweep: --out directory is required");
    const DatasetManifest manifest =
        drop_signal_free_sessions(parse_manifest(must_read(o.manifest)));
    ExperimentPlan plan = parse_plan(must_read(o.plan));
    plan.seed ^= o.seed;
    if (o.dry_run) {
        for (const PlanCell& cell : expand_plan(plan)) std::cout << cell.id << "\n";
        return 0;
    }
    const std::string base_dir = fs::path(o.manifest).parent_path().string();
    const SessionTable table = load_sessions(manifest, base_dir);
    EvalReport report = run_sweep(manifest, table, plan, o.out, o.workers);
    write_resolved_config(o, "sweep");
    size_t failed = 0;
    for (const CellResult& cell : report.cells) failed += !cell.error.empty();
    std::cout << report.cells.size() << " cell(s), " << failed << " failed, report at "
              << (fs::path(o.out) / "report.csv").string() << "\n";
    return 0;
}

int cmd_compare_signals(const Opts& o) {
    if (o.out.empty()) throw std::invalid_argument("compare-signals: --out base path is required");
    auto read_channel = [&](const std::string& path) {
        ImuRecording rec = parse_imu_csv(must_read(path));
        if (!rec.channels.count(o.channel)) {
            throw std::runtime_error(path + ": no channel '" + o.channel + "'");
        }
        ChannelSeries s;
        s.name = o.channel;
        s.rate = 50.0;
        s.values = rec.channels[o.channel];
        return s;
    };
    const OverlaySummary summary =
        emit_signal_overlay(read_channel(o.real_file), read_channel(o.simulated_file), o.out);
    write_resolved_config(o, "compare-signals");
    std::cout << "mse=" << summary.mse << " pearson=" << summary.pearson << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pose-to-IMU simulation and activity recognition pipeline"};
    app.footer(kExitCodeHelp);
    app.require_subcommand(1);

    Opts o;
    std::string config_path;
    std::string input;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON configuration file");
        cmd->add_option("--seed", o.seed, "Deterministic seed");
        cmd->add_option("--workers", o.workers, "Worker threads (default 1 for reproducibility)");
        cmd->add_option("--out", o.out, "Output file or directory");
        return cmd;
    };
    auto add_training = [&](CLI::App* cmd) {
        cmd->add_option("--max-epochs", o.max_epochs);
        cmd->add_option("--patience", o.patience);
        cmd->add_option("--batch-size", o.batch_size);
        cmd->add_option("--lr", o.lr);
        cmd->add_option("--tcn-channels", o.tcn_channels);
        cmd->add_option("--tcn-dilations", o.tcn_dilations);
        cmd->add_option("--dropout", o.dropout);
        cmd->add_option("--kernel-width", o.kernel_width);
    };

    CLI::App* synth = add_common(app.add_subcommand("synth-gen", "Generate an oracle dataset"));
    synth->add_option("--train-users", o.train_users);
    synth->add_option("--test-users", o.test_users);
    synth->add_option("--external-videos", o.external_videos,
                      "Pose-only sessions to be filled by `simulate`");
    synth->add_option("--duration", o.duration, "Seconds per activity segment");
    synth->add_option("--pixel-noise", o.pixel_noise);
    synth->add_option("--joint-dropout", o.joint_dropout);

    CLI::App* ingest_poses =
        add_common(app.add_subcommand("ingest-poses", "Keypoint file to normalized pose CSV"));
    ingest_poses->add_option("input", input)->required();
    ingest_poses->add_option("--fps", o.fps);
    ingest_poses->add_option("--image-width", o.image_width);
    ingest_poses->add_option("--image-height", o.image_height);

    CLI::App* ingest_imu =
        add_common(app.add_subcommand("ingest-imu", "Sensor CSV to 50 Hz with norm channels"));
    ingest_imu->add_option("input", input)->required();

    CLI::App* sync = add_common(app.add_subcommand("sync", "Clock offset from sync jumps"));
    sync->add_option("input", input)->required();
    sync->add_option("--anchor-frames", o.anchor_frames, "Video frames of the sync jumps");
    sync->add_option("--fps", o.fps);

    CLI::App* train_reg =
        add_common(app.add_subcommand("train-regression", "Train one pose-to-IMU regressor"));
    train_reg->add_option("--manifest", o.manifest)->required();
    train_reg->add_option("--placement", o.placement);
    train_reg->add_option("--channel", o.channel);
    train_reg->add_option("--filter", o.filter);
    train_reg->add_option("--scaler", o.scaler);
    train_reg->add_option("--fps", o.fps);
    add_training(train_reg);

    CLI::App* simulate =
        add_common(app.add_subcommand("simulate", "Run regressors over videos, emit signals"));
    simulate->add_option("--manifest", o.manifest)->required();
    simulate->add_option("--models", o.models, "Regressor checkpoint files");
    simulate->add_option("--fps", o.fps);

    CLI::App* train_har = add_common(app.add_subcommand("train-har", "Train the activity classifier"));
    train_har->add_option("--manifest", o.manifest)->required();
    train_har->add_option("--channels", o.channels);
    train_har->add_option("--filter", o.filter);
    train_har->add_option("--scaler", o.scaler);
    train_har->add_option("--mix", o.mix, "real | sim | sim+real | real+external");
    train_har->add_option("--k", o.k);
    train_har->add_option("--j", o.j);
    add_training(train_har);

    CLI::App* evaluate = add_common(app.add_subcommand("evaluate", "Evaluate on real test sessions"));
    evaluate->add_option("--manifest", o.manifest)->required();
    evaluate->add_option("--models", o.models, "Classifier model file");

    CLI::App* sweep = add_common(app.add_subcommand("sweep", "Run the experiment grid"));
    sweep->add_option("--manifest", o.manifest)->required();
    sweep->add_option("--plan", o.plan)->required();
    sweep->add_flag("--dry-run", o.dry_run, "List resolved cells without training");

    CLI::App* compare =
        add_common(app.add_subcommand("compare-signals", "Overlay a real and a simulated channel"));
    compare->add_option("--real", o.real_file)->required();
    compare->add_option("--simulated", o.simulated_file)->required();
    compare->add_option("--channel", o.channel);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    CLI::App* cmd = app.get_subcommands().front();

    try {
        if (!config_path.empty()) apply_config(config_path, cmd, o);
        if (cmd == synth) return cmd_synth_gen(o);
        if (cmd == ingest_poses) return cmd_ingest_poses(input, o);
        if (cmd == ingest_imu) return cmd_ingest_imu(input, o);
        if (cmd == sync) return cmd_sync(input, o);
        if (cmd == train_reg) return cmd_train_regression(o);
        if (cmd == simulate) return cmd_simulate(o);
        if (cmd == train_har) return cmd_train_har(o);
        if (cmd == evaluate) return cmd_evaluate(o);
        if (cmd == sweep) return cmd_sweep(o);
        if (cmd == compare) return cmd_compare_signals(o);
        std::cerr << "error: usage: unknown subcommand\n";
        return 2;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: config: " << e.what() << "\n";
        return 4;
    } catch (const MissingFile& e) {
        std::cerr << "error: missing-file: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: invariant: " << e.what() << "\n";
        return 5;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: schema: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
}

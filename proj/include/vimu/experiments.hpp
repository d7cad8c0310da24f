#pragma once

#include <map>
#include <string>
#include <vector>

#include "vimu/har_classifier.hpp"
#include "vimu/imu_regressor.hpp"
#include "vimu/types.hpp"

namespace vimu {

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

enum class SessionRole { train, test };
enum class DataSource { real, simulated_local, simulated_external };

std::string source_name(DataSource s);
DataSource source_from_name(const std::string& name);

struct SessionEntry {
    std::string id;
    std::string user;
    SessionRole role = SessionRole::train;
    DataSource source = DataSource::real;
    std::map<std::string, std::string> imu_files;  // placement name -> CSV path
    std::vector<std::string> pose_files;
    std::string label_file;
    double fps = 50.0;
};

/// The dataset catalogue: ranked training users (best first), the class
/// name map and every session with its role and data source.
struct DatasetManifest {
    std::vector<std::string> ranked_users;
    std::map<std::string, int> class_ids;
    std::vector<SessionEntry> sessions;

    int class_count() const { return static_cast<int>(class_ids.size()); }
};

/// Parses and validates: unique session ids, ranking a permutation of the
/// train-role users, known source/role names.
DatasetManifest parse_manifest(const std::string& json_text);

/// In-memory session signals: every available (placement, channel) series
/// on the common 50 Hz grid plus per-sample class labels.
struct SessionData {
    std::vector<ChannelSeries> channels;
    std::vector<int> labels;
};
using SessionTable = std::map<std::string, SessionData>;

/// Reads the session's IMU CSVs (resampled to 50 Hz, xyz triplets reduced
/// to *_norm channels, named norm columns passed through) and labels.
SessionData load_session(const SessionEntry& entry, const std::map<std::string, int>& class_ids,
                         const std::string& base_dir);
SessionTable load_sessions(const DatasetManifest& manifest, const std::string& base_dir);

/// Placement-major channel stack: for every placement, every requested name.
std::vector<ChannelSeries> select_channels(const SessionData& data,
                                           const std::vector<std::string>& names);

/// kind: "real" (top-k users' real sessions), "sim" (their simulated
/// sessions), "sim+real" (simulated top-k plus real top-j), "real+external"
/// (real top-k plus every external simulated session, which is never
/// counted per user).
struct TrainingMix {
    std::string kind = "real";
    int k = 0;
    int real_j = 0;
};

/// Session ids with their provenance flag, in manifest order. Test-role
/// sessions are never selected.
std::vector<std::pair<std::string, bool>> select_training_sessions(const DatasetManifest& manifest,
                                                                   const TrainingMix& mix);

std::vector<LabeledWindow> build_training_set(const DatasetManifest& manifest,
                                              const SessionTable& table,
                                              const std::vector<std::string>& channel_names,
                                              const TrainingMix& mix);

/// Macro F1 over the classes present in the ground truth; per-class F1 is
/// 2PR/(P+R) with 0 when the denominator vanishes.
struct F1Report {
    double macro = 0.0;
    std::vector<double> per_class;              // indexed by class id
    std::vector<bool> in_truth;                 // class appears in ground truth
    std::vector<std::vector<long>> confusion;   // [truth][predicted]
};
F1Report mean_f1(const std::vector<int>& pred, const std::vector<int>& truth, int class_count);

struct ExperimentPlan {
    std::vector<std::vector<std::string>> channel_sets = {{"acc_norm"}};
    std::vector<FilterPolicy> filters = {FilterPolicy::none};
    std::vector<ScalerPolicy> scalers = {ScalerPolicy::standard};
    std::vector<std::string> mixes = {"real"};
    std::vector<int> k_values = {1};
    int real_j = 1;
    std::vector<uint64_t> seeds = {0};
    uint64_t seed = 0;  // global seed mixed into every cell's seed
    ClassifierConfig classifier;
};
ExperimentPlan parse_plan(const std::string& json_text);

/// One fully-resolved sweep cell; the training seed is derived from the
/// global seed and the cell id so scheduling order cannot matter.
struct PlanCell {
    std::string id;
    std::vector<std::string> channel_names;
    FilterPolicy filter = FilterPolicy::none;
    ScalerPolicy scaler = ScalerPolicy::none;
    TrainingMix mix;
    uint64_t seed = 0;
};
std::vector<PlanCell> expand_plan(const ExperimentPlan& plan);

struct CellResult {
    std::string cell_id;
    double macro_f1 = 0.0;
    std::vector<double> per_class_f1;
    std::vector<std::vector<long>> confusion;
    size_t train_windows = 0;
    size_t test_windows = 0;
    double runtime_seconds = 0.0;  // cached per cell, excluded from report.csv
    std::string error;             // empty on success
};

struct EvalReport {
    std::vector<CellResult> cells;
};

/// Runs every cell: build training set, preprocess (filter, then scaler
/// fitted on the training pool), train, evaluate on all real test-role
/// sessions. Finished cells are cached as JSON under out_dir/cells and
/// skipped on rerun; failures are recorded and the sweep continues.
/// Writes report.csv and one confusion CSV per cell into out_dir. Cells
/// are independent; `workers` > 1 runs them on a thread pool without
/// changing any result (per-cell seeds are derived from the cell id).
EvalReport run_sweep(const DatasetManifest& manifest, const SessionTable& table,
                     const ExperimentPlan& plan, const std::string& out_dir, int workers = 1);

struct OverlaySummary {
    double mse = 0.0;
    double pearson = 0.0;
};

/// Writes out_base.csv (t, real, simulated) and out_base.svg with both
/// series as polylines.
OverlaySummary emit_signal_overlay(const ChannelSeries& real, const ChannelSeries& simulated,
                                   const std::string& out_base);

}  // namespace vimu

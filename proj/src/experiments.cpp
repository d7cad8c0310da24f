#include "vimu/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"

namespace vimu {

namespace {

using nlohmann::json;

uint64_t fnv1a(const std::string& text) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

uint64_t mix_seed(uint64_t global, const std::string& cell_id) {
    uint64_t h = fnv1a(cell_id) ^ (global * 0x9e3779b97f4a7c15ull);
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
}

SessionRole role_from_name(const std::string& name) {
    if (name == "train") return SessionRole::train;
    if (name == "test") return SessionRole::test;
    throw std::runtime_error("manifest: unknown session role '" + name + "'");
}

std::vector<std::string> top_users(const DatasetManifest& manifest, int k, const char* what) {
    if (k < 0 || k > static_cast<int>(manifest.ranked_users.size())) {
        throw std::invalid_argument(std::string("training mix: ") + what + " count " +
                                    std::to_string(k) + " exceeds the " +
                                    std::to_string(manifest.ranked_users.size()) +
                                    " ranked users");
    }
    return {manifest.ranked_users.begin(), manifest.ranked_users.begin() + k};
}

void append_sessions(const DatasetManifest& manifest, const std::vector<std::string>& users,
                     DataSource source, bool simulated,
                     std::vector<std::pair<std::string, bool>>& out) {
    const std::set<std::string> wanted(users.begin(), users.end());
    for (const SessionEntry& s : manifest.sessions) {
        if (s.role == SessionRole::train && s.source == source && wanted.count(s.user)) {
            out.emplace_back(s.id, simulated);
        }
    }
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

std::string format_double(double v) {
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
}

json cell_to_json(const CellResult& r) {
    return json{{"cell_id", r.cell_id},
                {"macro_f1", r.macro_f1},
                {"per_class_f1", r.per_class_f1},
                {"confusion", r.confusion},
                {"train_windows", r.train_windows},
                {"test_windows", r.test_windows},
                {"runtime_seconds", r.runtime_seconds},
                {"error", r.error}};
}

CellResult cell_from_json(const json& j) {
    CellResult r;
    r.cell_id = j.at("cell_id").get<std::string>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.per_class_f1 = j.at("per_class_f1").get<std::vector<double>>();
    r.confusion = j.at("confusion").get<std::vector<std::vector<long>>>();
    r.train_windows = j.at("train_windows").get<size_t>();
    r.test_windows = j.at("test_windows").get<size_t>();
    r.runtime_seconds = j.at("runtime_seconds").get<double>();
    r.error = j.at("error").get<std::string>();
    return r;
}

ClassifierConfig classifier_from_json(const json& j) {
    ClassifierConfig cfg;
    if (j.contains("topology")) {
        const json& topo = j["topology"];
        if (topo.contains("kernel_width")) cfg.topology.kernel_width = topo["kernel_width"];
        if (topo.contains("dilations"))
            cfg.topology.dilations = topo["dilations"].get<std::vector<int>>();
        if (topo.contains("channels"))
            cfg.topology.channels = topo["channels"].get<std::vector<int>>();
        if (topo.contains("dropout")) cfg.topology.dropout = topo["dropout"];
    }
    if (j.contains("class_count")) cfg.class_count = j["class_count"];
    if (j.contains("class_names"))
        cfg.class_names = j["class_names"].get<std::vector<std::string>>();
    if (j.contains("max_epochs")) cfg.train.max_epochs = j["max_epochs"];
    if (j.contains("patience")) cfg.train.patience = j["patience"];
    if (j.contains("batch_size")) cfg.train.batch_size = j["batch_size"];
    if (j.contains("lr")) cfg.lr = j["lr"];
    if (j.contains("val_fraction")) cfg.val_fraction = j["val_fraction"];
    return cfg;
}

}  // namespace

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

std::string source_name(DataSource s) {
    switch (s) {
        case DataSource::real: return "real";
        case DataSource::simulated_local: return "simulated_local";
        case DataSource::simulated_external: return "simulated_external";
    }
    throw std::invalid_argument("unknown data source");
}

DataSource source_from_name(const std::string& name) {
    if (name == "real") return DataSource::real;
    if (name == "simulated_local") return DataSource::simulated_local;
    if (name == "simulated_external") return DataSource::simulated_external;
    throw std::runtime_error("manifest: unknown data source '" + name + "'");
}

DatasetManifest parse_manifest(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("manifest: invalid JSON: ") + e.what());
    }
    DatasetManifest m;
    try {
        m.ranked_users = doc.at("ranked_users").get<std::vector<std::string>>();
        m.class_ids = doc.at("classes").get<std::map<std::string, int>>();
        for (const json& s : doc.at("sessions")) {
            SessionEntry e;
            e.id = s.at("id").get<std::string>();
            e.user = s.at("user").get<std::string>();
            e.role = role_from_name(s.at("role").get<std::string>());
            e.source = source_from_name(s.at("source").get<std::string>());
            e.imu_files = s.at("imu_files").get<std::map<std::string, std::string>>();
            e.label_file = s.at("label_file").get<std::string>();
            if (s.contains("pose_files"))
                e.pose_files = s["pose_files"].get<std::vector<std::string>>();
            if (s.contains("fps")) e.fps = s["fps"].get<double>();
            m.sessions.push_back(std::move(e));
        }
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("manifest: missing field: ") + e.what());
    }

    std::set<std::string> ids;
    for (const SessionEntry& s : m.sessions) {
        if (!ids.insert(s.id).second) {
            throw std::runtime_error("manifest: duplicate session id '" + s.id + "'");
        }
        for (const auto& [placement, file] : s.imu_files) placement_from_name(placement);
    }
    // The ranking must be a permutation of the local train-role users.
    std::set<std::string> ranked(m.ranked_users.begin(), m.ranked_users.end());
    if (ranked.size() != m.ranked_users.size()) {
        throw std::runtime_error("manifest: ranked_users contains duplicates");
    }
    std::set<std::string> train_users;
    for (const SessionEntry& s : m.sessions) {
        if (s.role == SessionRole::train && s.source != DataSource::simulated_external) {
            train_users.insert(s.user);
        }
    }
    if (ranked != train_users) {
        throw std::runtime_error(
            "manifest: ranked_users must be a permutation of the train-session users");
    }
    return m;
}

SessionData load_session(const SessionEntry& entry, const std::map<std::string, int>& class_ids,
                         const std::string& base_dir) {
    auto resolve = [&](const std::string& p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? p : (std::filesystem::path(base_dir) / path).string();
    };
    SessionData data;
    size_t min_len = SIZE_MAX;
    for (const auto& [placement_str, file] : entry.imu_files) {
        const Placement placement = placement_from_name(placement_str);
        ImuRecording rec = parse_imu_csv(read_text_file(resolve(file)));
        rec = resample_linear(rec, 50.0);
        auto add = [&](const std::string& name, std::vector<double> values) {
            ChannelSeries s;
            s.placement = placement;
            s.name = name;
            s.rate = 50.0;
            s.values = std::move(values);
            min_len = std::min(min_len, s.values.size());
            data.channels.push_back(std::move(s));
        };
        for (const auto& [name, values] : rec.channels) add(name, values);
        if (rec.channels.count("ax") && rec.channels.count("ay") && rec.channels.count("az")) {
            add("acc_norm",
                channel_norm(rec.channels.at("ax"), rec.channels.at("ay"), rec.channels.at("az")));
        }
        if (rec.channels.count("gx") && rec.channels.count("gy") && rec.channels.count("gz")) {
            add("gyr_norm",
                channel_norm(rec.channels.at("gx"), rec.channels.at("gy"), rec.channels.at("gz")));
        }
        if (rec.channels.count("lax")) {
            add("lin_ax", rec.channels.at("lax"));
        }
    }
    if (data.channels.empty()) {
        throw std::runtime_error("session '" + entry.id + "': no IMU channels");
    }
    for (ChannelSeries& c : data.channels) c.values.resize(min_len);
    data.labels = parse_label_csv(read_text_file(resolve(entry.label_file)), class_ids, min_len);
    return data;
}

SessionTable load_sessions(const DatasetManifest& manifest, const std::string& base_dir) {
    SessionTable table;
    for (const SessionEntry& entry : manifest.sessions) {
        table.emplace(entry.id, load_session(entry, manifest.class_ids, base_dir));
    }
    return table;
}

std::vector<ChannelSeries> select_channels(const SessionData& data,
                                           const std::vector<std::string>& names) {
    std::vector<ChannelSeries> out;
    for (Placement p : kAllPlacements) {
        for (const std::string& name : names) {
            auto it = std::find_if(data.channels.begin(), data.channels.end(),
                                   [&](const ChannelSeries& c) {
                                       return c.placement == p && c.name == name;
                                   });
            if (it == data.channels.end()) {
                throw std::runtime_error("channel '" + name + "' missing for placement " +
                                         placement_name(p));
            }
            out.push_back(*it);
        }
    }
    return out;
}

std::vector<std::pair<std::string, bool>> select_training_sessions(const DatasetManifest& manifest,
                                                                   const TrainingMix& mix) {
    std::vector<std::pair<std::string, bool>> out;
    if (mix.kind == "real") {
        append_sessions(manifest, top_users(manifest, mix.k, "k"), DataSource::real, false, out);
    } else if (mix.kind == "sim") {
        append_sessions(manifest, top_users(manifest, mix.k, "k"), DataSource::simulated_local,
                        true, out);
    } else if (mix.kind == "sim+real") {
        append_sessions(manifest, top_users(manifest, mix.k, "k"), DataSource::simulated_local,
                        true, out);
        append_sessions(manifest, top_users(manifest, mix.real_j, "j"), DataSource::real, false,
                        out);
    } else if (mix.kind == "real+external") {
        append_sessions(manifest, top_users(manifest, mix.k, "k"), DataSource::real, false, out);
        for (const SessionEntry& s : manifest.sessions) {
            // External data is always included as a whole, never per user.
            if (s.role == SessionRole::train && s.source == DataSource::simulated_external) {
                out.emplace_back(s.id, true);
            }
        }
    } else {
        throw std::invalid_argument("unknown training mix kind '" + mix.kind + "'");
    }
    if (out.empty()) {
        throw std::invalid_argument("training mix '" + mix.kind + "' with k=" +
                                    std::to_string(mix.k) + " selects no sessions");
    }
    return out;
}

std::vector<LabeledWindow> build_training_set(const DatasetManifest& manifest,
                                              const SessionTable& table,
                                              const std::vector<std::string>& channel_names,
                                              const TrainingMix& mix) {
    std::vector<LabeledWindow> windows;
    for (const auto& [session_id, simulated] : select_training_sessions(manifest, mix)) {
        const SessionData& data = table.at(session_id);
        auto w = make_classification_windows(select_channels(data, channel_names), data.labels,
                                             simulated);
        windows.insert(windows.end(), w.begin(), w.end());
    }
    return windows;
}

F1Report mean_f1(const std::vector<int>& pred, const std::vector<int>& truth, int class_count) {
    if (pred.empty() || pred.size() != truth.size()) {
        throw std::invalid_argument("mean_f1: empty or mismatched label vectors");
    }
    F1Report report;
    report.per_class.assign(class_count, 0.0);
    report.in_truth.assign(class_count, false);
    report.confusion.assign(class_count, std::vector<long>(class_count, 0));
    for (size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] < 0 || pred[i] >= class_count || truth[i] < 0 || truth[i] >= class_count) {
            throw std::invalid_argument("mean_f1: label outside the configured class range");
        }
        ++report.confusion[truth[i]][pred[i]];
        report.in_truth[truth[i]] = true;
    }
    double total = 0.0;
    int present = 0;
    for (int c = 0; c < class_count; ++c) {
        long tp = report.confusion[c][c], fp = 0, fn = 0;
        for (int o = 0; o < class_count; ++o) {
            if (o == c) continue;
            fp += report.confusion[o][c];
            fn += report.confusion[c][o];
        }
        const long denom = 2 * tp + fp + fn;
        report.per_class[c] = denom == 0 ? 0.0 : 2.0 * tp / denom;
        if (report.in_truth[c]) {
            total += report.per_class[c];
            ++present;
        }
    }
    report.macro = total / present;
    return report;
}

ExperimentPlan parse_plan(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("plan: invalid JSON: ") + e.what());
    }
    ExperimentPlan plan;
    try {
        if (doc.contains("channel_sets"))
            plan.channel_sets = doc["channel_sets"].get<std::vector<std::vector<std::string>>>();
        if (doc.contains("filters")) {
            plan.filters.clear();
            for (const json& f : doc["filters"])
                plan.filters.push_back(filter_policy_from_name(f.get<std::string>()));
        }
        if (doc.contains("scalers")) {
            plan.scalers.clear();
            for (const json& s : doc["scalers"])
                plan.scalers.push_back(scaler_policy_from_name(s.get<std::string>()));
        }
        if (doc.contains("mixes")) plan.mixes = doc["mixes"].get<std::vector<std::string>>();
        if (doc.contains("k_values")) plan.k_values = doc["k_values"].get<std::vector<int>>();
        if (doc.contains("real_j")) plan.real_j = doc["real_j"].get<int>();
        if (doc.contains("seeds")) plan.seeds = doc["seeds"].get<std::vector<uint64_t>>();
        if (doc.contains("seed")) plan.seed = doc["seed"].get<uint64_t>();
        if (doc.contains("classifier")) plan.classifier = classifier_from_json(doc["classifier"]);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("plan: bad field: ") + e.what());
    }
    return plan;
}

std::vector<PlanCell> expand_plan(const ExperimentPlan& plan) {
    std::vector<PlanCell> cells;
    for (const auto& names : plan.channel_sets) {
        for (FilterPolicy filter : plan.filters) {
            for (ScalerPolicy scaler : plan.scalers) {
                for (const std::string& mix : plan.mixes) {
                    for (int k : plan.k_values) {
                        for (uint64_t seed : plan.seeds) {
                            PlanCell cell;
                            cell.channel_names = names;
                            cell.filter = filter;
                            cell.scaler = scaler;
                            cell.mix = {mix, k, plan.real_j};
                            cell.id = join(names, "+") + "_" + filter_policy_name(filter) + "_" +
                                      scaler_policy_name(scaler) + "_" + mix + "_k" +
                                      std::to_string(k) + "_j" + std::to_string(plan.real_j) +
                                      "_s" + std::to_string(seed);
                            cell.seed = mix_seed(plan.seed ^ seed, cell.id);
                            cells.push_back(std::move(cell));
                        }
                    }
                }
            }
        }
    }
    return cells;
}

namespace {

CellResult run_cell(const DatasetManifest& manifest, const SessionTable& table,
                    const ExperimentPlan& plan, const PlanCell& cell) {
    CellResult result;
    result.cell_id = cell.id;

    const auto selected = select_training_sessions(manifest, cell.mix);
    std::set<std::string> test_ids;
    for (const SessionEntry& s : manifest.sessions) {
        if (s.role == SessionRole::test && s.source == DataSource::real) test_ids.insert(s.id);
    }
    if (test_ids.empty()) throw std::runtime_error("manifest has no real test sessions");
    for (const auto& [id, simulated] : selected) {
        if (test_ids.count(id)) {
            throw std::runtime_error("test session '" + id + "' selected for training");
        }
    }

    const double cutoff = filter_cutoff_hz(cell.filter);
    auto prepare = [&](const std::string& session_id) {
        std::vector<ChannelSeries> chans =
            select_channels(table.at(session_id), cell.channel_names);
        if (cutoff > 0.0) {
            for (ChannelSeries& c : chans) c = butterworth_lowpass(c, cutoff);
        }
        return chans;
    };

    std::vector<std::vector<ChannelSeries>> train_chans;
    for (const auto& [id, simulated] : selected) train_chans.push_back(prepare(id));

    std::vector<ScalerParams> scalers;
    if (cell.scaler == ScalerPolicy::standard) {
        const size_t n_chan = train_chans[0].size();
        for (size_t c = 0; c < n_chan; ++c) {
            std::vector<const std::vector<double>*> pool;
            for (const auto& session : train_chans) pool.push_back(&session[c].values);
            scalers.push_back(fit_scaler(pool));
        }
    }
    auto scale = [&](std::vector<ChannelSeries>& chans) {
        if (scalers.empty()) return;
        for (size_t c = 0; c < chans.size(); ++c) {
            chans[c].values = apply_scaler(chans[c].values, scalers[c]);
        }
    };

    std::vector<LabeledWindow> train_windows;
    std::vector<std::string> layout;
    for (size_t i = 0; i < selected.size(); ++i) {
        scale(train_chans[i]);
        if (layout.empty()) layout = channel_layout(train_chans[i]);
        auto w = make_classification_windows(train_chans[i], table.at(selected[i].first).labels,
                                             selected[i].second);
        train_windows.insert(train_windows.end(), w.begin(), w.end());
    }
    if (train_windows.empty()) throw std::runtime_error("training mix produced no windows");

    ClassifierConfig cfg = plan.classifier;
    cfg.class_count = manifest.class_count();
    cfg.train.seed = cell.seed;
    ClassifierModel model = train_classifier(train_windows, layout, cfg);

    std::vector<int> pred, truth;
    size_t test_windows = 0;
    for (const std::string& id : test_ids) {
        std::vector<ChannelSeries> chans = prepare(id);
        scale(chans);
        auto windows = make_classification_windows(chans, table.at(id).labels);
        Prediction p = predict(model, windows, layout);
        for (size_t i = 0; i < windows.size(); ++i) {
            pred.push_back(p.window_labels[i]);
            truth.push_back(windows[i].majority);
        }
        test_windows += windows.size();
    }

    const F1Report f1 = mean_f1(pred, truth, manifest.class_count());
    result.macro_f1 = f1.macro;
    result.per_class_f1 = f1.per_class;
    result.confusion = f1.confusion;
    result.train_windows = train_windows.size();
    result.test_windows = test_windows;
    return result;
}

}  // namespace

EvalReport run_sweep(const DatasetManifest& manifest, const SessionTable& table,
                     const ExperimentPlan& plan, const std::string& out_dir, int workers) {
    namespace fs = std::filesystem;
    const fs::path cells_dir = fs::path(out_dir) / "cells";
    fs::create_directories(cells_dir);

    const std::vector<PlanCell> cells = expand_plan(plan);
    std::vector<CellResult> results(cells.size());
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
            const PlanCell& cell = cells[i];
            const fs::path cache = cells_dir / (cell.id + ".json");
            if (fs::exists(cache)) {
                results[i] = cell_from_json(json::parse(read_text_file(cache.string())));
                continue;
            }
            CellResult result;
            const auto start = std::chrono::steady_clock::now();
            try {
                result = run_cell(manifest, table, plan, cell);
            } catch (const std::exception& e) {
                result.cell_id = cell.id;
                result.error = e.what();
            }
            result.runtime_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            write_text_file(cache.string(), cell_to_json(result).dump(2));
            results[i] = std::move(result);
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    EvalReport report;
    report.cells = std::move(results);

    // report.csv: one row per cell; runtime lives only in the cell cache
    // so reruns stay byte-identical.
    std::ostringstream csv;
    csv << "cell_id,channels,filter,scaler,mix,k,j,seed,macro_f1,per_class_f1,"
           "train_windows,test_windows,error\n";
    for (size_t i = 0; i < cells.size(); ++i) {
        const PlanCell& cell = cells[i];
        const CellResult& r = report.cells[i];
        std::vector<std::string> per_class;
        for (double f : r.per_class_f1) per_class.push_back(format_double(f));
        csv << cell.id << ',' << join(cell.channel_names, "+") << ','
            << filter_policy_name(cell.filter) << ',' << scaler_policy_name(cell.scaler) << ','
            << cell.mix.kind << ',' << cell.mix.k << ',' << cell.mix.real_j << ',' << cell.seed
            << ',' << format_double(r.macro_f1) << ',' << join(per_class, ";") << ','
            << r.train_windows << ',' << r.test_windows << ',' << r.error << '\n';

        if (r.error.empty()) {
            std::ostringstream conf;
            for (const auto& row : r.confusion) {
                for (size_t c = 0; c < row.size(); ++c) conf << (c ? "," : "") << row[c];
                conf << '\n';
            }
            write_text_file((fs::path(out_dir) / ("confusion_" + cell.id + ".csv")).string(),
                            conf.str());
        }
    }
    write_text_file((fs::path(out_dir) / "report.csv").string(), csv.str());
    return report;
}

OverlaySummary emit_signal_overlay(const ChannelSeries& real, const ChannelSeries& simulated,
                                   const std::string& out_base) {
    if (real.values.size() != simulated.values.size() || real.values.empty()) {
        throw std::invalid_argument("emit_signal_overlay: series must be non-empty and aligned");
    }
    const size_t n = real.values.size();

    OverlaySummary summary;
    double mr = 0.0, ms = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = real.values[i] - simulated.values[i];
        summary.mse += d * d;
        mr += real.values[i];
        ms += simulated.values[i];
    }
    summary.mse /= n;
    mr /= n;
    ms /= n;
    double num = 0.0, dr = 0.0, ds = 0.0;
    for (size_t i = 0; i < n; ++i) {
        num += (real.values[i] - mr) * (simulated.values[i] - ms);
        dr += (real.values[i] - mr) * (real.values[i] - mr);
        ds += (simulated.values[i] - ms) * (simulated.values[i] - ms);
    }
    summary.pearson = num / std::sqrt(dr * ds);

    std::ostringstream csv;
    csv.precision(17);
    csv << "t,real,simulated\n";
    for (size_t i = 0; i < n; ++i) {
        csv << (static_cast<double>(i) / real.rate) << ',' << real.values[i] << ','
            << simulated.values[i] << '\n';
    }
    write_text_file(out_base + ".csv", csv.str());

    const double lo = std::min(*std::min_element(real.values.begin(), real.values.end()),
                               *std::min_element(simulated.values.begin(), simulated.values.end()));
    const double hi = std::max(*std::max_element(real.values.begin(), real.values.end()),
                               *std::max_element(simulated.values.begin(), simulated.values.end()));
    const double span = hi > lo ? hi - lo : 1.0;
    const double width = 1000.0, height = 300.0, pad = 10.0;
    auto polyline = [&](const std::vector<double>& values, const char* color) {
        std::ostringstream svg;
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1\" points=\"";
        for (size_t i = 0; i < n; ++i) {
            const double x = pad + (width - 2 * pad) * i / (n > 1 ? n - 1 : 1);
            const double y = height - pad - (height - 2 * pad) * (values[i] - lo) / span;
            svg << x << ',' << y << ' ';
        }
        svg << "\"/>\n";
        return svg.str();
    };
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n"
        << polyline(real.values, "#cc2222") << polyline(simulated.values, "#2244cc") << "</svg>\n";
    write_text_file(out_base + ".svg", svg.str());
    return summary;
}

}  // namespace vimu

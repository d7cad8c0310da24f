#include "vimu/imu_dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace vimu {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.push_back("");
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median of empty range");
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        m = (m + *std::max_element(v.begin(), v.begin() + mid)) / 2.0;
    }
    return m;
}

}  // namespace

ImuRecording parse_imu_csv(const std::string& raw) {
    std::stringstream ss(raw);
    std::string line;
    if (!std::getline(ss, line)) throw std::runtime_error("imu csv: empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split(line, ',');
    if (header.empty() || header[0] != "t") {
        throw std::runtime_error("imu csv: header must start with 't'");
    }
    ImuRecording rec;
    for (size_t i = 1; i < header.size(); ++i) rec.channels[header[i]] = {};

    size_t row = 1;
    while (std::getline(ss, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split(line, ',');
        if (fields.size() != header.size()) {
            throw std::runtime_error("imu csv: ragged row at line " + std::to_string(row));
        }
        double t;
        try {
            t = std::stod(fields[0]);
        } catch (const std::exception&) {
            throw std::runtime_error("imu csv: bad timestamp at line " + std::to_string(row));
        }
        if (!rec.timestamps.empty() && t <= rec.timestamps.back()) {
            throw std::runtime_error("imu csv: non-monotonic timestamp at line " +
                                     std::to_string(row));
        }
        rec.timestamps.push_back(t);
        for (size_t i = 1; i < header.size(); ++i) {
            try {
                rec.channels[header[i]].push_back(std::stod(fields[i]));
            } catch (const std::exception&) {
                throw std::runtime_error("imu csv: bad value at line " + std::to_string(row));
            }
        }
    }
    if (rec.timestamps.size() >= 2) {
        rec.native_rate = static_cast<double>(rec.timestamps.size() - 1) /
                          (rec.timestamps.back() - rec.timestamps.front());
    }
    return rec;
}

std::string write_imu_csv(const ImuRecording& rec) {
    std::ostringstream out;
    out.precision(17);
    out << "t";
    for (const auto& [name, values] : rec.channels) out << ',' << name;
    out << '\n';
    for (size_t i = 0; i < rec.timestamps.size(); ++i) {
        out << rec.timestamps[i];
        for (const auto& [name, values] : rec.channels) out << ',' << values[i];
        out << '\n';
    }
    return out.str();
}

ImuRecording resample_linear(const ImuRecording& rec, double target_rate) {
    if (rec.timestamps.size() < 2) {
        throw std::invalid_argument("resample_linear: need at least 2 samples");
    }
    const double t0 = rec.timestamps.front();
    const double t1 = rec.timestamps.back();
    const size_t n = static_cast<size_t>(std::floor((t1 - t0) * target_rate + 1e-9)) + 1;

    ImuRecording out;
    out.placement = rec.placement;
    out.native_rate = target_rate;
    out.timestamps.resize(n);
    for (size_t k = 0; k < n; ++k) out.timestamps[k] = t0 + static_cast<double>(k) / target_rate;

    for (const auto& [name, values] : rec.channels) {
        std::vector<double> res(n);
        size_t j = 0;
        for (size_t k = 0; k < n; ++k) {
            const double t = out.timestamps[k];
            while (j + 2 < rec.timestamps.size() && rec.timestamps[j + 1] < t) ++j;
            const double ta = rec.timestamps[j], tb = rec.timestamps[j + 1];
            const double w = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
            res[k] = values[j] * (1.0 - w) + values[j + 1] * w;
        }
        out.channels[name] = std::move(res);
    }
    return out;
}

std::vector<double> channel_norm(const std::vector<double>& x, const std::vector<double>& y,
                                 const std::vector<double>& z) {
    if (x.size() != y.size() || y.size() != z.size()) {
        throw std::invalid_argument("channel_norm: length mismatch");
    }
    std::vector<double> out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        out[i] = std::sqrt(x[i] * x[i] + y[i] * y[i] + z[i] * z[i]);
    }
    return out;
}

std::vector<BiquadSection> design_butterworth_lowpass(double cutoff_hz, double rate_hz,
                                                      int order) {
    if (cutoff_hz <= 0.0 || cutoff_hz >= rate_hz / 2.0) {
        throw std::invalid_argument("butterworth: cutoff must lie in (0, rate/2)");
    }
    if (order < 2 || order % 2 != 0) {
        throw std::invalid_argument("butterworth: order must be even and >= 2");
    }
    // Analog prototype pole pairs, cutoff prewarped for the bilinear transform.
    const double k = 2.0 * rate_hz;
    const double wc = k * std::tan(std::numbers::pi * cutoff_hz / rate_hz);
    std::vector<BiquadSection> sos;
    for (int i = 1; i <= order / 2; ++i) {
        const double angle = std::numbers::pi * (2.0 * i + order - 1.0) / (2.0 * order);
        const double c = -2.0 * std::cos(angle);  // s^2 + c s + 1 prototype section
        const double a = wc * wc;
        const double b = c * wc;
        const double d0 = k * k + b * k + a;
        sos.push_back({a / d0, 2.0 * a / d0, a / d0,
                       (2.0 * a - 2.0 * k * k) / d0, (k * k - b * k + a) / d0});
    }
    return sos;
}

std::vector<double> butterworth_lowpass(const std::vector<double>& values, double rate_hz,
                                        double cutoff_hz, int order) {
    const std::vector<BiquadSection> sos = design_butterworth_lowpass(cutoff_hz, rate_hz, order);
    std::vector<double> out = values;
    for (const BiquadSection& s : sos) {
        // Transposed direct form II, state seeded with the steady-state
        // response to a constant first sample.
        const double x0 = out.empty() ? 0.0 : out.front();
        double s2 = s.b2 * x0 - s.a2 * x0;
        double s1 = s.b1 * x0 - s.a1 * x0 + s2;
        for (double& x : out) {
            const double y = s.b0 * x + s1;
            s1 = s.b1 * x - s.a1 * y + s2;
            s2 = s.b2 * x - s.a2 * y;
            x = y;
        }
    }
    return out;
}

ChannelSeries butterworth_lowpass(const ChannelSeries& s, double cutoff_hz, int order) {
    ChannelSeries out = s;
    out.values = butterworth_lowpass(s.values, s.rate, cutoff_hz, order);
    return out;
}

ScalerParams fit_scaler(const std::vector<const std::vector<double>*>& train) {
    size_t n = 0;
    double sum = 0.0;
    for (const auto* series : train) {
        n += series->size();
        for (double x : *series) sum += x;
    }
    if (n < 2) throw std::invalid_argument("fit_scaler: need at least 2 pooled samples");
    const double mean = sum / static_cast<double>(n);
    double sq = 0.0;
    for (const auto* series : train) {
        for (double x : *series) sq += (x - mean) * (x - mean);
    }
    const double std = std::sqrt(sq / static_cast<double>(n));
    if (std <= 0.0) throw std::invalid_argument("fit_scaler: zero variance in training pool");
    return {mean, std};
}

ScalerParams fit_scaler(const std::vector<double>& train) {
    return fit_scaler(std::vector<const std::vector<double>*>{&train});
}

std::vector<double> apply_scaler(const std::vector<double>& values, const ScalerParams& p) {
    std::vector<double> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - p.mean) / p.std;
    return out;
}

std::vector<double> invert_scaler(const std::vector<double>& values, const ScalerParams& p) {
    std::vector<double> out(values.size());
    for (size_t i = 0; i < values.size(); ++i) out[i] = values[i] * p.std + p.mean;
    return out;
}

std::vector<Peak> find_prominent_peaks(const std::vector<double>& values,
                                       double min_prominence) {
    std::vector<Peak> peaks;
    for (size_t i = 1; i + 1 < values.size(); ++i) {
        if (!(values[i] > values[i - 1] && values[i] >= values[i + 1])) continue;
        // Prominence: drop to the highest saddle separating this peak from
        // higher terrain (or the series edge).
        double left_min = values[i];
        for (size_t j = i; j-- > 0;) {
            left_min = std::min(left_min, values[j]);
            if (values[j] > values[i]) break;
        }
        double right_min = values[i];
        for (size_t j = i + 1; j < values.size(); ++j) {
            right_min = std::min(right_min, values[j]);
            if (values[j] > values[i]) break;
        }
        const double prom = values[i] - std::max(left_min, right_min);
        if (prom >= min_prominence) peaks.push_back({i, prom});
    }
    return peaks;
}

double detect_sync_offset(const ChannelSeries& acc_norm,
                          const std::vector<int>& video_anchor_frames, double video_fps,
                          const SyncConfig& cfg) {
    if (video_anchor_frames.size() < 3) {
        throw std::invalid_argument("detect_sync_offset: need at least 3 anchor frames");
    }
    const std::vector<double>& v = acc_norm.values;
    const double med = median(v);
    std::vector<double> dev(v.size());
    for (size_t i = 0; i < v.size(); ++i) dev[i] = std::abs(v[i] - med);
    const double mad = median(dev);
    std::vector<Peak> peaks = find_prominent_peaks(v, cfg.prominence_mad_factor * mad);
    if (peaks.size() < video_anchor_frames.size()) {
        std::ostringstream msg;
        msg << "detect_sync_offset: found " << peaks.size() << " peaks for "
            << video_anchor_frames.size() << " anchors; peak times:";
        for (const Peak& p : peaks) msg << ' ' << static_cast<double>(p.index) / acc_norm.rate;
        throw std::runtime_error(msg.str());
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& a, const Peak& b) { return a.prominence > b.prominence; });
    peaks.resize(video_anchor_frames.size());
    std::sort(peaks.begin(), peaks.end(),
              [](const Peak& a, const Peak& b) { return a.index < b.index; });

    std::vector<int> anchors = video_anchor_frames;
    std::sort(anchors.begin(), anchors.end());
    double acc = 0.0;
    for (size_t i = 0; i < peaks.size(); ++i) {
        const double peak_time = static_cast<double>(peaks[i].index) / acc_norm.rate;
        const double anchor_time = static_cast<double>(anchors[i]) / video_fps;
        acc += anchor_time - peak_time;
    }
    return acc / static_cast<double>(peaks.size());
}

ImuRecording align_recording(const ImuRecording& rec, double offset_seconds) {
    ImuRecording out = rec;
    for (double& t : out.timestamps) t += offset_seconds;
    return out;
}

}  // namespace vimu

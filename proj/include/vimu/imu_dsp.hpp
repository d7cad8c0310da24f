#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vimu/types.hpp"

namespace vimu {

/// Raw sensor recording, one file per placement per session.
struct ImuRecording {
    std::optional<Placement> placement;
    double native_rate = 0.0;  // Hz, derived from timestamps
    std::map<std::string, std::vector<double>> channels;
    std::vector<double> timestamps;  // seconds, strictly increasing
};

struct ScalerParams {
    double mean = 0.0;
    double std = 1.0;
};

/// CSV schema: header "t,ax,ay,az[,gx,gy,gz][,lax,lay,laz]", t in seconds.
ImuRecording parse_imu_csv(const std::string& raw);
std::string write_imu_csv(const ImuRecording& rec);

ImuRecording resample_linear(const ImuRecording& rec, double target_rate = 50.0);

std::vector<double> channel_norm(const std::vector<double>& x,
                                 const std::vector<double>& y,
                                 const std::vector<double>& z);

/// Second-order sections of a digital low-pass Butterworth filter,
/// bilinear transform with prewarped cutoff. Each section has unity DC gain.
struct BiquadSection {
    double b0, b1, b2;  // numerator
    double a1, a2;      // denominator (a0 normalized to 1)
};

std::vector<BiquadSection> design_butterworth_lowpass(double cutoff_hz, double rate_hz,
                                                      int order = 6);

/// Single-pass causal filtering; state initialized to the first sample's
/// steady state to suppress start-up transients.
std::vector<double> butterworth_lowpass(const std::vector<double>& values, double rate_hz,
                                        double cutoff_hz, int order = 6);
ChannelSeries butterworth_lowpass(const ChannelSeries& s, double cutoff_hz, int order = 6);

ScalerParams fit_scaler(const std::vector<const std::vector<double>*>& train);
ScalerParams fit_scaler(const std::vector<double>& train);
std::vector<double> apply_scaler(const std::vector<double>& values, const ScalerParams& p);
std::vector<double> invert_scaler(const std::vector<double>& values, const ScalerParams& p);

struct SyncConfig {
    double prominence_mad_factor = 3.0;  // threshold = factor * MAD of the series
};

struct Peak {
    size_t index;
    double prominence;
};

std::vector<Peak> find_prominent_peaks(const std::vector<double>& values, double min_prominence);

/// Offset such that sensor_time + offset == video_time. Pairs the k most
/// prominent sensor peaks with the k anchor frame times in temporal order
/// and returns the least-squares constant offset.
double detect_sync_offset(const ChannelSeries& acc_norm,
                          const std::vector<int>& video_anchor_frames, double video_fps,
                          const SyncConfig& cfg = {});

ImuRecording align_recording(const ImuRecording& rec, double offset_seconds);

}  // namespace vimu

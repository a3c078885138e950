#pragma once

// Analysis over recordings: Slerp resampling, joint-angle series, MAE,
// Pearson correlation and sliding-window delivery rates.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bodynet/recording.hpp"
#include "bodynet/skeleton.hpp"

namespace bodynet {

struct AngleSample {
  std::int64_t timestamp_us = 0;
  double deg = 0.0;
};

struct AngleSeries {
  std::string label;
  std::vector<AngleSample> samples;  // strictly increasing timestamps
};

// Per sensor, a uniform grid at target_hz from the first to the last
// timestamp (t0 + round(k * 1e6 / hz) us). Each point slerps the bracketing
// input frames (a point on an input timestamp copies that frame's components);
// seq restarts at 0 and status comes from the earlier bracket.
// Output is grouped by sensor id. Throws AnalysisError for a sensor with
// fewer than 2 frames or a non-positive rate.
std::vector<RecordingFrame> slerp_resample(const std::vector<RecordingFrame>& frames, double target_hz);

// Joint angle over the union of both sensors' timestamps, starting once both
// have reported; each sensor contributes its latest sample at or before the
// evaluation time. Throws AnalysisError when a sensor of the joint is absent
// from the placement or the recording.
AngleSeries joint_angle_series(const std::vector<RecordingFrame>& frames, const CalibrationRecord& calib,
                               const Skeleton& skel, const JointSpec& joint);

// Calibration from each placed sensor's first frame. Throws AnalysisError
// when a placed sensor never reports.
CalibrationRecord calibrate_from_first_frames(const std::vector<RecordingFrame>& frames,
                                              const SensorPlacement& placement, CalibrationPose pose);

struct AlignedAngle {
  std::int64_t timestamp_us = 0;
  double a_deg = 0.0;
  double b_deg = 0.0;
};

// a's samples inside b's time support, paired with b linearly interpolated.
std::vector<AlignedAngle> align(const AngleSeries& a, const AngleSeries& b);

// Mean |a - b| over a's timestamps inside b's time support, b linearly
// interpolated. Throws AnalysisError without overlap.
double mae(const AngleSeries& a, const AngleSeries& b);

// Sample Pearson correlation on the same grid as mae(). Throws AnalysisError
// without overlap or when either side has zero variance.
double pearson(const AngleSeries& a, const AngleSeries& b);

struct RateSeries {
  SensorId sensor = 0;
  std::vector<std::pair<std::int64_t, double>> points;  // (window end us, Hz)
};

struct TimeSpan {
  std::int64_t begin_us = 0;
  std::int64_t end_us = 0;
};

// Delivered samples per second in a trailing window (t - W, t], evaluated
// every `step_s` from begin + W to end. The span defaults to the recording's
// first and last timestamps; a span shorter than W gets a single point at its
// end. Sensors are listed in id order.
std::vector<RateSeries> rate_series(const std::vector<RecordingFrame>& frames, double window_s = 1.0,
                                    double step_s = 0.1, std::optional<TimeSpan> span = std::nullopt,
                                    const std::vector<SensorId>& sensors = {});

struct SeriesSummary {
  std::string label;
  std::size_t count = 0;
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  bool zero_range = false;  // max - min below 1e-9
  std::size_t peaks = 0;    // see count_peaks()
};

SeriesSummary summarize(const std::string& label, const std::vector<double>& values);

// Excursions that rise above min + 0.5 (max - min) and fall back below
// min + 0.25 (max - min); zero for a flat series.
std::size_t count_peaks(const std::vector<double>& values);

}  // namespace bodynet

#include "bodynet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bodynet {

namespace {

std::map<SensorId, std::vector<const RecordingFrame*>> by_sensor(const std::vector<RecordingFrame>& frames) {
  std::map<SensorId, std::vector<const RecordingFrame*>> out;
  for (const auto& f : frames) {
    out[f.sensor_id].push_back(&f);
  }
  for (auto& [id, list] : out) {
    std::stable_sort(list.begin(), list.end(),
                     [](const RecordingFrame* a, const RecordingFrame* b) { return a->timestamp_us < b->timestamp_us; });
  }
  return out;
}

}  // namespace

std::vector<AlignedAngle> align(const AngleSeries& a, const AngleSeries& b) {
  std::vector<AlignedAngle> out;
  if (a.samples.empty() || b.samples.empty()) {
    return out;
  }
  const auto& bs = b.samples;
  for (const auto& s : a.samples) {
    if (s.timestamp_us < bs.front().timestamp_us || s.timestamp_us > bs.back().timestamp_us) {
      continue;
    }
    auto hi = std::lower_bound(bs.begin(), bs.end(), s.timestamp_us,
                               [](const AngleSample& x, std::int64_t t) { return x.timestamp_us < t; });
    double value = hi->deg;
    if (hi->timestamp_us != s.timestamp_us) {
      const auto lo = std::prev(hi);
      const double u = static_cast<double>(s.timestamp_us - lo->timestamp_us) /
                       static_cast<double>(hi->timestamp_us - lo->timestamp_us);
      value = lo->deg + u * (hi->deg - lo->deg);
    }
    out.push_back({s.timestamp_us, s.deg, value});
  }
  return out;
}

namespace {

std::vector<std::pair<double, double>> paired(const AngleSeries& a, const AngleSeries& b) {
  std::vector<std::pair<double, double>> out;
  for (const auto& p : align(a, b)) {
    out.emplace_back(p.a_deg, p.b_deg);
  }
  return out;
}

}  // namespace

std::vector<RecordingFrame> slerp_resample(const std::vector<RecordingFrame>& frames, double target_hz) {
  if (!(target_hz > 0.0) || !std::isfinite(target_hz)) {
    throw AnalysisError("resampling rate must be positive");
  }
  std::vector<RecordingFrame> out;
  for (const auto& [id, list] : by_sensor(frames)) {
    if (list.size() < 2) {
      throw AnalysisError("sensor " + std::to_string(id) + " has fewer than 2 frames");
    }
    const std::int64_t t0 = list.front()->timestamp_us;
    const std::int64_t t1 = list.back()->timestamp_us;
    std::size_t i = 0;
    for (std::int64_t k = 0;; ++k) {
      const std::int64_t t = t0 + std::llround(static_cast<double>(k) * 1e6 / target_hz);
      if (t > t1) {
        break;
      }
      while (i + 1 < list.size() && list[i + 1]->timestamp_us <= t) {
        ++i;
      }
      const RecordingFrame& lo = *list[i];
      if (lo.timestamp_us == t) {
        // On a knot: keep the input components verbatim.
        RecordingFrame f = lo;
        f.seq = k;
        out.push_back(f);
        continue;
      }
      const RecordingFrame& hi = *list[i + 1];
      const double u =
          static_cast<double>(t - lo.timestamp_us) / static_cast<double>(hi.timestamp_us - lo.timestamp_us);
      out.push_back(make_frame(t, id, k, slerp(lo.quaternion(), hi.quaternion(), u), lo.status));
    }
  }
  return out;
}

CalibrationRecord calibrate_from_first_frames(const std::vector<RecordingFrame>& frames,
                                              const SensorPlacement& placement, CalibrationPose pose) {
  QuaternionSnapshot snapshot;
  std::int64_t latest = 0;
  for (const auto& f : frames) {
    if (placement.bone_of(f.sensor_id) && !snapshot.contains(f.sensor_id)) {
      snapshot.emplace(f.sensor_id, f.quaternion());
      latest = std::max(latest, f.timestamp_us);
    }
  }
  std::string missing;
  for (SensorId s : placement.sensors()) {
    if (!snapshot.contains(s)) {
      missing += " " + std::to_string(s);
    }
  }
  if (!missing.empty()) {
    throw AnalysisError("recording has no frames for sensor(s):" + missing);
  }
  return calibrate(snapshot, placement, pose, latest);
}

AngleSeries joint_angle_series(const std::vector<RecordingFrame>& frames, const CalibrationRecord& calib,
                               const Skeleton& skel, const JointSpec& joint) {
  const auto parent = calib.placement.sensor_on(joint.parent_side);
  const auto child = calib.placement.sensor_on(joint.child_side);
  for (auto [bone, sensor] : {std::pair{joint.parent_side, parent}, std::pair{joint.child_side, child}}) {
    if (!sensor) {
      throw AnalysisError("joint '" + joint.label + "': no sensor on bone '" + std::string(bone_name(bone)) + "'");
    }
    if (!calib.q_calib.contains(*sensor)) {
      throw AnalysisError("joint '" + joint.label + "': sensor " + std::to_string(*sensor) + " is not calibrated");
    }
  }
  std::vector<const RecordingFrame*> relevant;
  for (const auto& f : frames) {
    if (f.sensor_id == *parent || f.sensor_id == *child) {
      relevant.push_back(&f);
    }
  }
  std::stable_sort(relevant.begin(), relevant.end(),
                   [](const RecordingFrame* a, const RecordingFrame* b) { return a->timestamp_us < b->timestamp_us; });
  for (SensorId s : {*parent, *child}) {
    if (std::none_of(relevant.begin(), relevant.end(), [s](const RecordingFrame* f) { return f->sensor_id == s; })) {
      throw AnalysisError("joint '" + joint.label + "': sensor " + std::to_string(s) + " has no frames");
    }
  }
  AngleSeries series;
  series.label = joint.label;
  QuaternionSnapshot latest;
  for (std::size_t i = 0; i < relevant.size();) {
    const std::int64_t t = relevant[i]->timestamp_us;
    for (; i < relevant.size() && relevant[i]->timestamp_us == t; ++i) {
      latest.insert_or_assign(relevant[i]->sensor_id, relevant[i]->quaternion());
    }
    if (latest.size() == 2) {
      series.samples.push_back({t, joint_angle(animate_frame(latest, calib, skel, t), joint)});
    }
  }
  return series;
}

double mae(const AngleSeries& a, const AngleSeries& b) {
  const auto pairs = paired(a, b);
  if (pairs.empty()) {
    throw AnalysisError("series '" + a.label + "' and '" + b.label + "' do not overlap in time");
  }
  double sum = 0.0;
  for (const auto& [x, y] : pairs) {
    sum += std::abs(x - y);
  }
  return sum / static_cast<double>(pairs.size());
}

double pearson(const AngleSeries& a, const AngleSeries& b) {
  const auto pairs = paired(a, b);
  if (pairs.empty()) {
    throw AnalysisError("series '" + a.label + "' and '" + b.label + "' do not overlap in time");
  }
  const double n = static_cast<double>(pairs.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pairs) {
    mx += x;
    my += y;
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pairs) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw AnalysisError("correlation undefined: a series has zero variance over the overlap");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<RateSeries> rate_series(const std::vector<RecordingFrame>& frames, double window_s, double step_s,
                                    std::optional<TimeSpan> span, const std::vector<SensorId>& sensors) {
  if (!(window_s > 0.0) || !(step_s > 0.0)) {
    throw AnalysisError("rate window and step must be positive");
  }
  auto grouped = by_sensor(frames);
  std::vector<SensorId> ids = sensors;
  if (ids.empty()) {
    for (const auto& [id, list] : grouped) {
      ids.push_back(id);
    }
  }
  if (!span) {
    if (frames.empty()) {
      return {};
    }
    const auto [lo, hi] = std::minmax_element(frames.begin(), frames.end(), [](const auto& a, const auto& b) {
      return a.timestamp_us < b.timestamp_us;
    });
    span = TimeSpan{lo->timestamp_us, hi->timestamp_us};
  }
  const auto window_us = std::llround(window_s * 1e6);
  std::vector<std::int64_t> ends;
  for (std::int64_t k = 0;; ++k) {
    const std::int64_t t = span->begin_us + window_us + std::llround(static_cast<double>(k) * step_s * 1e6);
    if (t > span->end_us) {
      break;
    }
    ends.push_back(t);
  }
  if (ends.empty()) {
    ends.push_back(span->end_us);
  }
  std::vector<RateSeries> out;
  for (SensorId id : ids) {
    RateSeries rs;
    rs.sensor = id;
    std::vector<std::int64_t> ts;
    if (auto it = grouped.find(id); it != grouped.end()) {
      for (const auto* f : it->second) {
        ts.push_back(f->timestamp_us);
      }
    }
    for (std::int64_t t : ends) {
      const auto hi = std::upper_bound(ts.begin(), ts.end(), t);
      const auto lo = std::upper_bound(ts.begin(), ts.end(), t - window_us);
      rs.points.emplace_back(t, static_cast<double>(hi - lo) / window_s);
    }
    out.push_back(std::move(rs));
  }
  return out;
}

std::size_t count_peaks(const std::vector<double>& values) {
  if (values.empty()) {
    return 0;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (range < 1e-9) {
    return 0;
  }
  const double rise = *lo + 0.5 * range;
  const double fall = *lo + 0.25 * range;
  std::size_t peaks = 0;
  bool up = false;
  for (double v : values) {
    if (!up && v > rise) {
      up = true;
      ++peaks;
    } else if (up && v < fall) {
      up = false;
    }
  }
  return peaks;
}

SeriesSummary summarize(const std::string& label, const std::vector<double>& values) {
  SeriesSummary s;
  s.label = label;
  s.count = values.size();
  if (values.empty()) {
    s.zero_range = true;
    return s;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  s.min = *lo;
  s.max = *hi;
  double sum = 0.0;
  for (double v : values) {
    sum += v;
  }
  s.mean = sum / static_cast<double>(values.size());
  s.zero_range = s.max - s.min < 1e-9;
  s.peaks = count_peaks(values);
  return s;
}

}  // namespace bodynet

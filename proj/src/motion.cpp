#include "bodynet/motion.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace bodynet {

namespace {

constexpr Vector3 kUp{0.0, 0.0, 1.0};
constexpr double kPi = std::numbers::pi;

struct AngleAt {
  double t_s;
  double operator()(const ConstantAngle& c) const { return c.deg; }
  double operator()(const SinusoidAngle& s) const {
    const double local = std::max(t_s, s.start_s) - s.start_s;
    return s.center_deg + s.amplitude_deg * std::sin(2.0 * kPi * local / s.period_s + s.phase_rad);
  }
  double operator()(const PiecewiseAngle& p) const {
    const auto& k = p.knots;
    if (k.empty()) {
      return 0.0;
    }
    if (t_s <= k.front().first) {
      return k.front().second;
    }
    if (t_s >= k.back().first) {
      return k.back().second;
    }
    auto hi = std::upper_bound(k.begin(), k.end(), t_s, [](double t, const auto& knot) { return t < knot.first; });
    auto lo = std::prev(hi);
    const double span = hi->first - lo->first;
    if (span <= 0.0) {
      return hi->second;
    }
    const double u = (t_s - lo->first) / span;
    return lo->second + u * (hi->second - lo->second);
  }
};

// Raised-cosine move from `from` to `to` over [t0, t1], appended as knots every `step` seconds.
void append_ease(PiecewiseAngle& f, double t0, double t1, double from, double to, double step = 0.02) {
  const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / step)));
  for (int i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / n;
    const double t = t0 + u * (t1 - t0);
    if (!f.knots.empty() && t <= f.knots.back().first) {
      continue;
    }
    f.knots.emplace_back(t, from + (to - from) * (1.0 - std::cos(kPi * u)) / 2.0);
  }
}

void append_hold(PiecewiseAngle& f, double t_end) {
  const double value = f.knots.empty() ? 0.0 : f.knots.back().second;
  if (f.knots.empty() || t_end > f.knots.back().first) {
    f.knots.emplace_back(t_end, value);
  }
}

double take(PresetParams& params, const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) {
    return fallback;
  }
  const double v = it->second;
  params.erase(it);
  if (!std::isfinite(v)) {
    throw ConfigError("preset parameter '" + key + "' must be finite");
  }
  return v;
}

void require_positive(const std::string& key, double v) {
  if (!(v > 0.0)) {
    throw ConfigError("preset parameter '" + key + "' must be positive");
  }
}

void reject_leftovers(const std::string& preset, const PresetParams& params) {
  if (!params.empty()) {
    throw ConfigError("preset '" + preset + "' has no parameter '" + params.begin()->first + "'");
  }
}

UnitQuaternion random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  for (;;) {
    const double w = n01(rng), x = n01(rng), y = n01(rng), z = n01(rng);
    if (w * w + x * x + y * y + z * z > 1e-6) {
      return {w, x, y, z};
    }
  }
}

MotionPreset artificial_joint(PresetParams params) {
  const double angle = take(params, "angle_deg", 90.0);
  const double hold = take(params, "hold_s", 1.0);
  const double ramp = take(params, "ramp_s", 1.0);
  const double dwell = take(params, "dwell_s", 5.0);
  reject_leftovers("artificial-joint", params);
  require_positive("hold_s", hold);
  require_positive("ramp_s", ramp);
  require_positive("dwell_s", dwell);
  if (angle < 0.0 || angle > 180.0) {
    throw ConfigError("artificial-joint angle_deg must lie in [0, 180]");
  }
  MotionPreset p;
  p.placement = SensorPlacement::preset("p2-joint");
  p.trajectory.name = "artificial-joint";
  p.trajectory.duration_s = hold + ramp + dwell;
  PiecewiseAngle hinge{{{0.0, 0.0}, {hold, 0.0}, {hold + ramp, angle}, {hold + ramp + dwell, angle}}};
  p.trajectory.joints.push_back({BoneId::LeftLowerArm, hinge, std::nullopt});
  p.steady_from_s = hold + ramp;
  p.steady_to_s = p.trajectory.duration_s;
  return p;
}

// Right arm twice, left arm twice, both arms twice; every bend pauses briefly
// near `stop_deg` on the way up before reaching `peak_deg`.
MotionPreset elbow_flexion(PresetParams params) {
  const double hold = take(params, "hold_s", 1.0);
  const double bend = take(params, "bend_s", 4.0);
  const double pause = take(params, "pause_s", 0.5);
  const double stop_deg = take(params, "stop_deg", 90.0);
  const double stop_s = take(params, "stop_s", 0.3);
  const double peak = take(params, "peak_deg", 145.0);
  reject_leftovers("elbow-flexion", params);
  require_positive("hold_s", hold);
  require_positive("stop_s", stop_s);
  if (!(bend > stop_s + 0.5)) {
    throw ConfigError("elbow-flexion bend_s must exceed stop_s by at least 0.5 s");
  }
  if (pause < 0.0 || stop_deg <= 0.0 || peak <= stop_deg || peak > 180.0) {
    throw ConfigError("elbow-flexion needs pause_s >= 0 and 0 < stop_deg < peak_deg <= 180");
  }
  PiecewiseAngle right{{{0.0, 0.0}}};
  PiecewiseAngle left{{{0.0, 0.0}}};
  auto add_bend = [&](PiecewiseAngle& f, double t0) {
    const double moving = bend - stop_s;
    const double t1 = t0 + 0.3 * moving;
    const double t2 = t1 + stop_s;
    const double t3 = t2 + 0.2 * moving;
    append_hold(f, t0);
    append_ease(f, t0, t1, 0.0, stop_deg);
    append_hold(f, t2);
    append_ease(f, t2, t3, stop_deg, peak);
    append_ease(f, t3, t0 + bend, peak, 0.0);
  };
  double t = hold;
  for (int which : {0, 0, 1, 1, 2, 2}) {
    if (which != 1) {
      add_bend(right, t);
    }
    if (which != 0) {
      add_bend(left, t);
    }
    t += bend + pause;
  }
  MotionPreset p;
  p.placement = SensorPlacement::preset("p5-upper");
  p.trajectory.name = "elbow-flexion";
  p.trajectory.duration_s = t;
  append_hold(right, t);
  append_hold(left, t);
  p.trajectory.joints.push_back({BoneId::RightLowerArm, right, std::nullopt});
  p.trajectory.joints.push_back({BoneId::LeftLowerArm, left, std::nullopt});
  p.steady_from_s = 0.0;
  p.steady_to_s = t;
  return p;
}

MotionPreset half_jacks(PresetParams params) {
  const double sensors = take(params, "sensors", 10.0);
  const double hold = take(params, "hold_s", 1.0);
  const double duration = take(params, "duration_s", 10.0);
  const double period = take(params, "period_s", 1.0);
  const double shoulder = take(params, "shoulder_peak_deg", 120.0);
  const double hip = take(params, "hip_peak_deg", 25.0);
  reject_leftovers("half-jacks", params);
  require_positive("hold_s", hold);
  require_positive("duration_s", duration);
  require_positive("period_s", period);
  if (sensors != 10.0 && sensors != 12.0) {
    throw ConfigError("half-jacks sensors must be 10 or 12");
  }
  MotionPreset p;
  p.placement = SensorPlacement::preset(sensors == 12.0 ? "p12" : "p10");
  p.trajectory.name = "half-jacks";
  p.trajectory.duration_s = hold + duration;
  auto swing = [&](double peak) { return SinusoidAngle{peak / 2.0, peak / 2.0, period, -kPi / 2.0, hold}; };
  for (BoneId b : {BoneId::LeftUpperArm, BoneId::RightUpperArm}) {
    p.trajectory.joints.push_back({b, swing(shoulder), std::nullopt});
  }
  for (BoneId b : {BoneId::LeftUpperLeg, BoneId::RightUpperLeg}) {
    p.trajectory.joints.push_back({b, swing(hip), std::nullopt});
  }
  p.steady_from_s = 0.0;
  p.steady_to_s = p.trajectory.duration_s;
  return p;
}

// Frontal raise (shoulder flexion) of the left arm, then the right one, repeated.
MotionPreset arm_raise(PresetParams params) {
  const double hold = take(params, "hold_s", 1.0);
  const double period = take(params, "period_s", 5.0);
  const double peak = take(params, "peak_deg", 150.0);
  const double reps = take(params, "repetitions", 2.0);
  const double tail = take(params, "tail_s", 0.0);
  reject_leftovers("arm-raise", params);
  require_positive("hold_s", hold);
  require_positive("period_s", period);
  if (reps < 1.0 || reps != std::floor(reps) || tail < 0.0 || peak <= 0.0 || peak > 180.0) {
    throw ConfigError("arm-raise needs an integer repetitions >= 1, tail_s >= 0 and 0 < peak_deg <= 180");
  }
  PiecewiseAngle left{{{0.0, 0.0}}};
  PiecewiseAngle right{{{0.0, 0.0}}};
  const double half = period / 2.0;
  double t = hold;
  for (int r = 0; r < static_cast<int>(reps); ++r) {
    append_hold(left, t);
    append_ease(left, t, t + half / 2.0, 0.0, peak);
    append_ease(left, t + half / 2.0, t + half, peak, 0.0);
    append_hold(right, t + half);
    append_ease(right, t + half, t + 1.5 * half, 0.0, peak);
    append_ease(right, t + 1.5 * half, t + period, peak, 0.0);
    t += period;
  }
  t += tail;
  append_hold(left, t);
  append_hold(right, t);
  MotionPreset p;
  p.placement = SensorPlacement::preset("p5-upper");
  p.trajectory.name = "arm-raise";
  p.trajectory.duration_s = t;
  const Vector3 flexion{1.0, 0.0, 0.0};
  p.trajectory.joints.push_back({BoneId::LeftUpperArm, left, flexion});
  p.trajectory.joints.push_back({BoneId::RightUpperArm, right, flexion});
  p.steady_from_s = 0.0;
  p.steady_to_s = t;
  return p;
}

}  // namespace

double evaluate(const AngleFunction& f, double t_s) { return std::visit(AngleAt{t_s}, f); }

void TrajectorySpec::validate() const {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw ConfigError("trajectory duration must be positive and finite");
  }
  std::set<BoneId> seen;
  for (const auto& j : joints) {
    if (j.bone == BoneId::Hips) {
      throw ConfigError("the root bone has no hinge");
    }
    if (!seen.insert(j.bone).second) {
      throw ConfigError("joint '" + std::string(bone_name(j.bone)) + "' animated twice");
    }
    if (j.axis && !(norm(*j.axis) > 0.0)) {
      throw ConfigError("joint '" + std::string(bone_name(j.bone)) + "' has a zero hinge axis");
    }
    if (const auto* s = std::get_if<SinusoidAngle>(&j.angle); s && !(s->period_s > 0.0)) {
      throw ConfigError("sinusoid period must be positive");
    }
    if (const auto* p = std::get_if<PiecewiseAngle>(&j.angle)) {
      for (std::size_t i = 1; i < p->knots.size(); ++i) {
        if (!(p->knots[i].first > p->knots[i - 1].first)) {
          throw ConfigError("piecewise knots must have strictly increasing times");
        }
      }
    }
    // Piecewise and sinusoid extremes sit at knots / analytic peaks; sampling
    // on a fine grid is enough to catch non-finite parameters.
    for (int i = 0; i <= 100; ++i) {
      if (!std::isfinite(evaluate(j.angle, duration_s * i / 100.0))) {
        throw ConfigError("joint '" + std::string(bone_name(j.bone)) + "' angle is not finite");
      }
    }
  }
}

double TrajectorySpec::hinge_angle_deg(BoneId bone, double t_s) const {
  for (const auto& j : joints) {
    if (j.bone == bone) {
      return evaluate(j.angle, t_s);
    }
  }
  return 0.0;
}

BoneOrientations ground_truth(const TrajectorySpec& spec, const Skeleton& skel, double t_s) {
  if (!(t_s >= 0.0 && t_s <= spec.duration_s)) {
    throw InvalidInput("time " + std::to_string(t_s) + " s outside trajectory [0, " +
                       std::to_string(spec.duration_s) + "]");
  }
  PerBone<const JointMotion*> motion{};
  for (const auto& j : spec.joints) {
    motion[index_of(j.bone)] = &j;
  }
  BoneOrientations world;
  world.fill(UnitQuaternion::identity());
  for (BoneId bone : all_bones()) {
    const auto parent = skel.parent(bone);
    if (!parent) {
      continue;
    }
    const JointMotion* j = motion[index_of(bone)];
    if (j == nullptr) {
      world[index_of(bone)] = world[index_of(*parent)];
      continue;
    }
    const Vector3 axis = j->axis.value_or(skel.hinge_axis(bone));
    world[index_of(bone)] = world[index_of(*parent)] * from_axis_angle(axis, evaluate(j->angle, t_s));
  }
  return world;
}

NoiseModel NoiseModel::none() {
  NoiseModel n;
  n.static_sigma_deg = n.dynamic_sigma_deg = 0.0;
  n.static_max_deg = n.dynamic_max_deg = 0.0;
  n.drift_deg_per_min = 0.0;
  return n;
}

void NoiseModel::validate() const {
  for (double v : {static_sigma_deg, dynamic_sigma_deg, static_max_deg, dynamic_max_deg, drift_deg_per_min,
                   reference_speed_dps}) {
    if (!std::isfinite(v)) {
      throw ConfigError("noise parameters must be finite");
    }
  }
  if (static_sigma_deg < 0.0 || static_sigma_deg > static_max_deg) {
    throw ConfigError("noise requires 0 <= static_sigma_deg <= static_max_deg");
  }
  if (dynamic_sigma_deg < 0.0 || dynamic_sigma_deg > dynamic_max_deg) {
    throw ConfigError("noise requires 0 <= dynamic_sigma_deg <= dynamic_max_deg");
  }
  if (!(reference_speed_dps > 0.0)) {
    throw ConfigError("noise reference_speed_dps must be positive");
  }
}

double NoiseModel::sigma_at(double speed_dps) const {
  const double f = std::min(speed_dps / reference_speed_dps, 1.0);
  return static_sigma_deg + (dynamic_sigma_deg - static_sigma_deg) * f;
}

double NoiseModel::max_at(double speed_dps) const {
  const double f = std::min(speed_dps / reference_speed_dps, 1.0);
  return static_max_deg + (dynamic_max_deg - static_max_deg) * f;
}

MountingOffset MountingOffset::identity(const SensorPlacement& placement) {
  std::map<SensorId, UnitQuaternion> out;
  for (SensorId s : placement.sensors()) {
    out.emplace(s, UnitQuaternion::identity());
  }
  return MountingOffset(std::move(out));
}

MountingOffset MountingOffset::random(const SensorPlacement& placement, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::map<SensorId, UnitQuaternion> out;
  for (SensorId s : placement.sensors()) {
    out.emplace(s, random_rotation(rng));
  }
  return MountingOffset(std::move(out));
}

UnitQuaternion MountingOffset::of(SensorId sensor) const {
  auto it = offsets_.find(sensor);
  return it == offsets_.end() ? UnitQuaternion::identity() : it->second;
}

UnitQuaternion sample_perturbation(double sigma_deg, double max_deg, std::mt19937_64& rng) {
  if (sigma_deg <= 0.0 || max_deg <= 0.0) {
    return UnitQuaternion::identity();
  }
  std::normal_distribution<double> n01(0.0, 1.0);
  Vector3 axis;
  do {
    axis = {n01(rng), n01(rng), n01(rng)};
  } while (norm(axis) < 1e-9);
  double angle = 0.0;
  do {
    angle = std::abs(sigma_deg * n01(rng));
  } while (angle > max_deg);
  return from_axis_angle(axis, angle);
}

double heading_rad(const UnitQuaternion& q) {
  return std::atan2(2.0 * (q.w() * q.z() + q.x() * q.y()), 1.0 - 2.0 * (q.y() * q.y() + q.z() * q.z()));
}

ImuSimulator::ImuSimulator(TrajectorySpec spec, Skeleton skel, SensorPlacement placement, MountingOffset mounting,
                           NoiseModel noise)
    : spec_(std::move(spec)),
      skel_(std::move(skel)),
      placement_(std::move(placement)),
      mounting_(std::move(mounting)),
      noise_(noise),
      rng_(noise.seed) {
  spec_.validate();
  noise_.validate();
  std::uniform_real_distribution<double> heading(-180.0, 180.0);
  for (SensorId s : placement_.sensors()) {
    const UnitQuaternion raw = from_axis_angle(kUp, heading(rng_));
    // Storage-box attitude is level with the box's own heading; the reset sees
    // the raw heading through a static-noise reading.
    const UnitQuaternion in_box = raw * sample_perturbation(noise_.static_sigma_deg, noise_.static_max_deg, rng_);
    const UnitQuaternion reset = from_axis_angle(kUp, -rad_to_deg(heading_rad(in_box)));
    heading_.emplace(s, reset * raw);
  }
}

double ImuSimulator::clamp_time(double t_s) const { return std::clamp(t_s, 0.0, spec_.duration_s); }

double ImuSimulator::bone_speed_dps(BoneId bone, double t_s) const {
  constexpr double h = 1e-3;
  const double t0 = clamp_time(t_s - h);
  const double t1 = clamp_time(t_s + h);
  if (t1 <= t0) {
    return 0.0;
  }
  const auto a = ground_truth(spec_, skel_, t0)[index_of(bone)];
  const auto b = ground_truth(spec_, skel_, t1)[index_of(bone)];
  return shortest_angle_deg(a, b) / (t1 - t0);
}

UnitQuaternion ImuSimulator::ideal_reading(SensorId sensor, double t_s) const {
  const auto bone = placement_.bone_of(sensor);
  if (!bone) {
    throw InvalidInput("sensor " + std::to_string(sensor) + " is not placed on a bone");
  }
  const double t = clamp_time(t_s);
  return ground_truth(spec_, skel_, t)[index_of(*bone)] * mounting_.of(sensor);
}

UnitQuaternion ImuSimulator::reading(SensorId sensor, double t_s) {
  const auto bone = placement_.bone_of(sensor);
  if (!bone) {
    throw InvalidInput("sensor " + std::to_string(sensor) + " is not placed on a bone");
  }
  const double t = clamp_time(t_s);
  const double speed = bone_speed_dps(*bone, t);
  const UnitQuaternion perturbation = sample_perturbation(noise_.sigma_at(speed), noise_.max_at(speed), rng_);
  const UnitQuaternion drift = from_axis_angle(kUp, noise_.drift_deg_per_min * t / 60.0);
  const UnitQuaternion body = ground_truth(spec_, skel_, t)[index_of(*bone)] * mounting_.of(sensor);
  return drift * heading_.at(sensor) * body * perturbation;
}

MotionPreset preset_scenario(const std::string& name, const PresetParams& params) {
  if (name == "artificial-joint") {
    return artificial_joint(params);
  }
  if (name == "elbow-flexion") {
    return elbow_flexion(params);
  }
  if (name == "half-jacks") {
    return half_jacks(params);
  }
  if (name == "arm-raise") {
    return arm_raise(params);
  }
  throw ConfigError("unknown motion preset '" + name + "'");
}

std::vector<std::string> motion_preset_names() {
  return {"artificial-joint", "elbow-flexion", "half-jacks", "arm-raise"};
}

}  // namespace bodynet

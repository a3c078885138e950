#pragma once

// Ground-truth motion and synthetic IMU readings.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "bodynet/quatmath.hpp"
#include "bodynet/skeleton.hpp"

namespace bodynet {

struct ConstantAngle {
  double deg = 0.0;
};

// center + amplitude * sin(2 pi (t - start) / period + phase); holds its
// start value for t < start.
struct SinusoidAngle {
  double center_deg = 0.0;
  double amplitude_deg = 0.0;
  double period_s = 1.0;
  double phase_rad = 0.0;
  double start_s = 0.0;
};

// Linear segments through (t_s, deg) knots; clamped outside the first/last knot.
struct PiecewiseAngle {
  std::vector<std::pair<double, double>> knots;
};

using AngleFunction = std::variant<ConstantAngle, SinusoidAngle, PiecewiseAngle>;

double evaluate(const AngleFunction& f, double t_s);

// One hinge: the joint between `bone` and its parent.
struct JointMotion {
  BoneId bone;
  AngleFunction angle;
  std::optional<Vector3> axis;  // falls back to Skeleton::hinge_axis
};

struct TrajectorySpec {
  std::string name;
  double duration_s = 0.0;
  std::vector<JointMotion> joints;

  // Throws ConfigError: non-positive duration, root hinge, duplicate joints,
  // non-finite angles on [0, duration].
  void validate() const;
  // Hinge angle of `bone` at t; 0 for joints without motion.
  double hinge_angle_deg(BoneId bone, double t_s) const;
};

using BoneOrientations = PerBone<UnitQuaternion>;

// World (ENU) orientation of every bone: parent orientation composed with the
// joint's hinge rotation. The root stays fixed; all-zero angles give identity
// everywhere. Throws InvalidInput for t outside [0, duration].
BoneOrientations ground_truth(const TrajectorySpec& spec, const Skeleton& skel, double t_s);

struct NoiseModel {
  double static_sigma_deg = 0.3;
  double dynamic_sigma_deg = 1.2;
  double static_max_deg = 2.0;
  double dynamic_max_deg = 3.5;
  double drift_deg_per_min = 0.0;
  // Angular speed at which the dynamic envelope is fully reached.
  double reference_speed_dps = 90.0;
  std::uint64_t seed = 0;

  static NoiseModel none();
  // Throws ConfigError unless 0 <= sigma <= max and every field is finite.
  void validate() const;

  double sigma_at(double speed_dps) const;
  double max_at(double speed_dps) const;
};

// Fixed per-sensor rotation between a bone and the sensor housing strapped to it.
class MountingOffset {
 public:
  MountingOffset() = default;
  explicit MountingOffset(std::map<SensorId, UnitQuaternion> offsets) : offsets_(std::move(offsets)) {}

  static MountingOffset identity(const SensorPlacement& placement);
  // Uniformly distributed rotations, seeded.
  static MountingOffset random(const SensorPlacement& placement, std::uint64_t seed);

  UnitQuaternion of(SensorId sensor) const;
  const std::map<SensorId, UnitQuaternion>& offsets() const { return offsets_; }

 private:
  std::map<SensorId, UnitQuaternion> offsets_;
};

// Small random rotation: uniform axis, angle |N(0, sigma)| truncated at max.
UnitQuaternion sample_perturbation(double sigma_deg, double max_deg, std::mt19937_64& rng);

// Heading (rotation about Up) of an ENU orientation, radians.
double heading_rad(const UnitQuaternion& q);

// Synthetic BNO080-class sensor set.
//
// Each sensor starts with an arbitrary raw heading. At construction the sensors
// sit parallel in their storage box and a heading reset removes each one's
// measured heading, so all of them agree on North afterwards. Readings are
//   drift(t) * reset * raw_heading * bone(t) * mounting * perturbation.
class ImuSimulator {
 public:
  ImuSimulator(TrajectorySpec spec, Skeleton skel, SensorPlacement placement, MountingOffset mounting,
               NoiseModel noise);

  // Noisy fused orientation of `sensor` at t (clamped to the trajectory).
  UnitQuaternion reading(SensorId sensor, double t_s);
  // Same chain with the noise and drift removed.
  UnitQuaternion ideal_reading(SensorId sensor, double t_s) const;

  // Instantaneous angular speed of a bone, central difference.
  double bone_speed_dps(BoneId bone, double t_s) const;

  const TrajectorySpec& trajectory() const { return spec_; }
  const Skeleton& skeleton() const { return skel_; }
  const SensorPlacement& placement() const { return placement_; }
  const NoiseModel& noise() const { return noise_; }

 private:
  double clamp_time(double t_s) const;

  TrajectorySpec spec_;
  Skeleton skel_;
  SensorPlacement placement_;
  MountingOffset mounting_;
  NoiseModel noise_;
  std::mt19937_64 rng_;
  std::map<SensorId, UnitQuaternion> heading_;  // reset * raw heading, per sensor
};

// Experiment presets. Every preset opens with a calibration hold (all joint
// angles zero) so the first samples of a session capture the calibration pose.
struct MotionPreset {
  TrajectorySpec trajectory;
  SensorPlacement placement;
  // Window in which the programmed pose is held (static presets); equal to the
  // whole trajectory otherwise.
  double steady_from_s = 0.0;
  double steady_to_s = 0.0;
};

using PresetParams = std::map<std::string, double>;

// "artificial-joint", "elbow-flexion", "half-jacks", "arm-raise".
// Throws ConfigError for unknown names or parameters.
MotionPreset preset_scenario(const std::string& name, const PresetParams& params = {});
std::vector<std::string> motion_preset_names();

}  // namespace bodynet

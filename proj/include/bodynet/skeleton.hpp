#pragma once

// 20-bone humanoid model, sensor placement presets, IMU-to-segment
// calibration, per-frame bone animation and joint-angle extraction.

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bodynet/errors.hpp"
#include "bodynet/quatmath.hpp"

namespace bodynet {

// Declared parent-first, so enumeration order is a valid topological order.
enum class BoneId : std::uint8_t {
  Hips,
  Spine,
  Chest,
  UpperChest,
  LeftShoulder,
  RightShoulder,
  LeftUpperArm,
  RightUpperArm,
  LeftLowerArm,
  RightLowerArm,
  LeftHand,
  RightHand,
  LeftUpperLeg,
  RightUpperLeg,
  LeftLowerLeg,
  RightLowerLeg,
  LeftFoot,
  RightFoot,
  LeftToes,
  RightToes,
};

inline constexpr std::size_t kBoneCount = 20;

template <typename T>
using PerBone = std::array<T, kBoneCount>;

constexpr std::size_t index_of(BoneId b) { return static_cast<std::size_t>(b); }

const std::array<BoneId, kBoneCount>& all_bones();

// Kebab-case names: "hips", "spine", "left-upper-arm", ...
std::string_view bone_name(BoneId bone);
std::optional<BoneId> find_bone(std::string_view name);
// Throws ConfigError on an unknown name.
BoneId bone_from_name(std::string_view name);

enum class CalibrationPose { Neutral, TPose };

std::string_view pose_name(CalibrationPose pose);
CalibrationPose pose_from_name(std::string_view name);

using SensorId = int;

// Hierarchy, rest orientations and segment lengths of the avatar.
//
// Rest orientations (the q_bone of the animation step, in avatar space):
//   Neutral  every bone identity; arms hang at the sides.
//   TPose    upper arm, forearm and hand of each side share one rest value,
//            the neutral arm abducted 90 deg (left about +North, right about
//            -North) mapped into avatar space; every other bone is identity.
// Sharing one value along each arm chain keeps the elbow rest angle at zero.
class Skeleton {
 public:
  Skeleton();

  std::optional<BoneId> parent(BoneId bone) const { return parents_[index_of(bone)]; }
  const UnitQuaternion& rest_orientation(BoneId bone, CalibrationPose pose) const;

  // Default hinge axis of the joint between `bone` and its parent, expressed
  // in the parent's ENU frame with the subject facing North.
  const Vector3& hinge_axis(BoneId bone) const { return axes_[index_of(bone)]; }

  double segment_length(BoneId bone) const { return lengths_[index_of(bone)]; }
  Skeleton with_segment_length(BoneId bone, double meters) const;

 private:
  PerBone<std::optional<BoneId>> parents_;
  PerBone<UnitQuaternion> rest_neutral_;
  PerBone<UnitQuaternion> rest_tpose_;
  PerBone<Vector3> axes_;
  PerBone<double> lengths_;
};

// Injective sensor -> bone binding.
class SensorPlacement {
 public:
  SensorPlacement() = default;
  SensorPlacement(std::string name, const std::vector<std::pair<SensorId, BoneId>>& bindings);

  // "p2-joint", "p5-upper", "p10", "p12". Throws ConfigError otherwise.
  static SensorPlacement preset(std::string_view name);
  static std::vector<std::string> preset_names();

  const std::string& name() const { return name_; }
  std::size_t size() const { return bones_.size(); }
  std::vector<SensorId> sensors() const;
  const std::map<SensorId, BoneId>& bindings() const { return bones_; }

  std::optional<BoneId> bone_of(SensorId sensor) const;
  std::optional<SensorId> sensor_on(BoneId bone) const;

 private:
  std::string name_;
  std::map<SensorId, BoneId> bones_;
};

using QuaternionSnapshot = std::map<SensorId, UnitQuaternion>;

class IncompleteCalibration : public ValidationError {
 public:
  explicit IncompleteCalibration(std::vector<SensorId> missing);
  const std::vector<SensorId>& missing() const { return missing_; }

 private:
  std::vector<SensorId> missing_;
};

class UncalibratedSensor : public ValidationError {
 public:
  explicit UncalibratedSensor(SensorId sensor)
      : ValidationError("sensor " + std::to_string(sensor) + " is not calibrated"), sensor_(sensor) {}
  SensorId sensor() const { return sensor_; }

 private:
  SensorId sensor_;
};

struct CalibrationRecord {
  CalibrationPose pose = CalibrationPose::Neutral;
  SensorPlacement placement;
  std::map<SensorId, UnitQuaternion> q_calib;
  std::int64_t timestamp_us = 0;
};

// Stores each sensor's instantaneous orientation verbatim as its q_calib.
CalibrationRecord calibrate(const QuaternionSnapshot& snapshot, const SensorPlacement& placement,
                            CalibrationPose pose, std::int64_t timestamp_us = 0);

struct BonePoseFrame {
  std::int64_t timestamp_us = 0;
  std::map<BoneId, UnitQuaternion> bones;
};

// Per sensor: q' = q * q_calib^-1, q'' = enu_to_left_handed(q'), r = q'' * q_bone.
BonePoseFrame animate_frame(const QuaternionSnapshot& snapshot, const CalibrationRecord& calib, const Skeleton& skel,
                            std::int64_t timestamp_us = 0);

struct JointSpec {
  BoneId parent_side;
  BoneId child_side;
  std::string label;
};

// Labels: left/right-elbow, -shoulder, -hip, -knee, -ankle, -wrist.
// Spaces and underscores are accepted in place of hyphens. Throws ConfigError.
JointSpec joint_from_label(std::string_view label);
std::vector<std::string> joint_labels();

// Shortest angle between the two bone rotations of the joint, degrees.
double joint_angle(const BonePoseFrame& frame, const JointSpec& joint);

}  // namespace bodynet

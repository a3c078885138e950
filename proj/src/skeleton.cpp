#include "bodynet/skeleton.hpp"

#include <algorithm>
#include <set>

namespace bodynet {

namespace {

constexpr std::array<std::string_view, kBoneCount> kBoneNames = {
    "hips",           "spine",           "chest",          "upper-chest",     "left-shoulder",
    "right-shoulder", "left-upper-arm",  "right-upper-arm", "left-lower-arm", "right-lower-arm",
    "left-hand",      "right-hand",      "left-upper-leg", "right-upper-leg", "left-lower-leg",
    "right-lower-leg", "left-foot",      "right-foot",     "left-toes",       "right-toes",
};

constexpr Vector3 kLateral{1.0, 0.0, 0.0};
constexpr Vector3 kForward{0.0, 1.0, 0.0};
constexpr Vector3 kBackward{0.0, -1.0, 0.0};
constexpr Vector3 kMedialFlip{-1.0, 0.0, 0.0};

std::string normalize_label(std::string_view label) {
  std::string out(label);
  for (char& c : out) {
    if (c == ' ' || c == '_') {
      c = '-';
    } else if (c >= 'A' && c <= 'Z') {
      c = static_cast<char>(c - 'A' + 'a');
    }
  }
  return out;
}

}  // namespace

const std::array<BoneId, kBoneCount>& all_bones() {
  static const std::array<BoneId, kBoneCount> bones = [] {
    std::array<BoneId, kBoneCount> out{};
    for (std::size_t i = 0; i < kBoneCount; ++i) {
      out[i] = static_cast<BoneId>(i);
    }
    return out;
  }();
  return bones;
}

std::string_view bone_name(BoneId bone) { return kBoneNames[index_of(bone)]; }

std::optional<BoneId> find_bone(std::string_view name) {
  const std::string key = normalize_label(name);
  for (std::size_t i = 0; i < kBoneCount; ++i) {
    if (kBoneNames[i] == key) {
      return static_cast<BoneId>(i);
    }
  }
  return std::nullopt;
}

BoneId bone_from_name(std::string_view name) {
  if (auto bone = find_bone(name)) {
    return *bone;
  }
  throw ConfigError("unknown bone '" + std::string(name) + "'");
}

std::string_view pose_name(CalibrationPose pose) { return pose == CalibrationPose::Neutral ? "neutral" : "t-pose"; }

CalibrationPose pose_from_name(std::string_view name) {
  const std::string key = normalize_label(name);
  if (key == "neutral") {
    return CalibrationPose::Neutral;
  }
  if (key == "t-pose" || key == "tpose") {
    return CalibrationPose::TPose;
  }
  throw ConfigError("unknown calibration pose '" + std::string(name) + "'");
}

Skeleton::Skeleton() {
  using B = BoneId;
  auto set_parent = [this](B child, B parent) { parents_[index_of(child)] = parent; };
  set_parent(B::Spine, B::Hips);
  set_parent(B::Chest, B::Spine);
  set_parent(B::UpperChest, B::Chest);
  set_parent(B::LeftShoulder, B::UpperChest);
  set_parent(B::RightShoulder, B::UpperChest);
  set_parent(B::LeftUpperArm, B::LeftShoulder);
  set_parent(B::RightUpperArm, B::RightShoulder);
  set_parent(B::LeftLowerArm, B::LeftUpperArm);
  set_parent(B::RightLowerArm, B::RightUpperArm);
  set_parent(B::LeftHand, B::LeftLowerArm);
  set_parent(B::RightHand, B::RightLowerArm);
  set_parent(B::LeftUpperLeg, B::Hips);
  set_parent(B::RightUpperLeg, B::Hips);
  set_parent(B::LeftLowerLeg, B::LeftUpperLeg);
  set_parent(B::RightLowerLeg, B::RightUpperLeg);
  set_parent(B::LeftFoot, B::LeftLowerLeg);
  set_parent(B::RightFoot, B::RightLowerLeg);
  set_parent(B::LeftToes, B::LeftFoot);
  set_parent(B::RightToes, B::RightFoot);

  axes_.fill(kLateral);
  // Abduction: the left limbs swing toward West (-X), the right ones toward East.
  axes_[index_of(B::LeftUpperArm)] = kForward;
  axes_[index_of(B::RightUpperArm)] = kBackward;
  axes_[index_of(B::LeftUpperLeg)] = kForward;
  axes_[index_of(B::RightUpperLeg)] = kBackward;
  // Knees flex backward.
  axes_[index_of(B::LeftLowerLeg)] = kMedialFlip;
  axes_[index_of(B::RightLowerLeg)] = kMedialFlip;

  rest_neutral_.fill(UnitQuaternion::identity());
  rest_tpose_.fill(UnitQuaternion::identity());
  const UnitQuaternion left_arm = enu_to_left_handed(from_axis_angle(kForward, 90.0));
  const UnitQuaternion right_arm = enu_to_left_handed(from_axis_angle(kBackward, 90.0));
  for (B b : {B::LeftUpperArm, B::LeftLowerArm, B::LeftHand}) {
    rest_tpose_[index_of(b)] = left_arm;
  }
  for (B b : {B::RightUpperArm, B::RightLowerArm, B::RightHand}) {
    rest_tpose_[index_of(b)] = right_arm;
  }

  lengths_.fill(1.0);
}

const UnitQuaternion& Skeleton::rest_orientation(BoneId bone, CalibrationPose pose) const {
  return pose == CalibrationPose::Neutral ? rest_neutral_[index_of(bone)] : rest_tpose_[index_of(bone)];
}

Skeleton Skeleton::with_segment_length(BoneId bone, double meters) const {
  if (!(meters > 0.0) || !std::isfinite(meters)) {
    throw InvalidInput("segment length must be positive and finite");
  }
  Skeleton copy = *this;
  copy.lengths_[index_of(bone)] = meters;
  return copy;
}

SensorPlacement::SensorPlacement(std::string name, const std::vector<std::pair<SensorId, BoneId>>& bindings)
    : name_(std::move(name)) {
  std::set<BoneId> used;
  for (const auto& [sensor, bone] : bindings) {
    if (sensor < 0) {
      throw ConfigError("sensor ids must be non-negative");
    }
    if (!bones_.emplace(sensor, bone).second) {
      throw ConfigError("sensor " + std::to_string(sensor) + " bound twice");
    }
    if (!used.insert(bone).second) {
      throw ConfigError("bone '" + std::string(bone_name(bone)) + "' carries more than one sensor");
    }
  }
}

SensorPlacement SensorPlacement::preset(std::string_view name) {
  using B = BoneId;
  const std::vector<B> upper = {B::Spine, B::LeftUpperArm, B::RightUpperArm, B::LeftLowerArm, B::RightLowerArm};
  std::vector<B> bones;
  if (name == "p2-joint") {
    bones = {B::LeftUpperArm, B::LeftLowerArm};
  } else if (name == "p5-upper") {
    bones = upper;
  } else if (name == "p10" || name == "p12") {
    bones = upper;
    bones.insert(bones.end(), {B::Hips, B::LeftUpperLeg, B::RightUpperLeg, B::LeftLowerLeg, B::RightLowerLeg});
    if (name == "p12") {
      bones.insert(bones.end(), {B::LeftFoot, B::RightFoot});
    }
  } else {
    throw ConfigError("unknown placement preset '" + std::string(name) + "'");
  }
  std::vector<std::pair<SensorId, BoneId>> bindings;
  for (std::size_t i = 0; i < bones.size(); ++i) {
    bindings.emplace_back(static_cast<SensorId>(i + 1), bones[i]);
  }
  return SensorPlacement(std::string(name), bindings);
}

std::vector<std::string> SensorPlacement::preset_names() { return {"p2-joint", "p5-upper", "p10", "p12"}; }

std::vector<SensorId> SensorPlacement::sensors() const {
  std::vector<SensorId> out;
  out.reserve(bones_.size());
  for (const auto& [sensor, bone] : bones_) {
    out.push_back(sensor);
  }
  return out;
}

std::optional<BoneId> SensorPlacement::bone_of(SensorId sensor) const {
  auto it = bones_.find(sensor);
  if (it == bones_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::optional<SensorId> SensorPlacement::sensor_on(BoneId bone) const {
  for (const auto& [sensor, b] : bones_) {
    if (b == bone) {
      return sensor;
    }
  }
  return std::nullopt;
}

IncompleteCalibration::IncompleteCalibration(std::vector<SensorId> missing)
    : ValidationError([&] {
        std::string msg = "incomplete calibration, missing sensor(s):";
        for (SensorId s : missing) {
          msg += " " + std::to_string(s);
        }
        return msg;
      }()),
      missing_(std::move(missing)) {}

CalibrationRecord calibrate(const QuaternionSnapshot& snapshot, const SensorPlacement& placement,
                            CalibrationPose pose, std::int64_t timestamp_us) {
  std::vector<SensorId> missing;
  for (SensorId s : placement.sensors()) {
    if (!snapshot.contains(s)) {
      missing.push_back(s);
    }
  }
  if (!missing.empty()) {
    throw IncompleteCalibration(std::move(missing));
  }
  CalibrationRecord record;
  record.pose = pose;
  record.placement = placement;
  record.timestamp_us = timestamp_us;
  for (SensorId s : placement.sensors()) {
    record.q_calib.emplace(s, snapshot.at(s));
  }
  return record;
}

BonePoseFrame animate_frame(const QuaternionSnapshot& snapshot, const CalibrationRecord& calib, const Skeleton& skel,
                            std::int64_t timestamp_us) {
  BonePoseFrame frame;
  frame.timestamp_us = timestamp_us;
  for (const auto& [sensor, q] : snapshot) {
    auto calib_it = calib.q_calib.find(sensor);
    if (calib_it == calib.q_calib.end()) {
      throw UncalibratedSensor(sensor);
    }
    const BoneId bone = *calib.placement.bone_of(sensor);
    const UnitQuaternion relative = relative_to_calibration(q, calib_it->second);
    const UnitQuaternion avatar = enu_to_left_handed(relative);
    frame.bones.insert_or_assign(bone, avatar * skel.rest_orientation(bone, calib.pose));
  }
  return frame;
}

JointSpec joint_from_label(std::string_view label) {
  using B = BoneId;
  const std::string key = normalize_label(label);
  struct Entry {
    std::string_view label;
    B parent;
    B child;
  };
  static constexpr std::array<Entry, 12> kJoints = {{
      {"left-shoulder", B::Spine, B::LeftUpperArm},
      {"right-shoulder", B::Spine, B::RightUpperArm},
      {"left-elbow", B::LeftUpperArm, B::LeftLowerArm},
      {"right-elbow", B::RightUpperArm, B::RightLowerArm},
      {"left-wrist", B::LeftLowerArm, B::LeftHand},
      {"right-wrist", B::RightLowerArm, B::RightHand},
      {"left-hip", B::Hips, B::LeftUpperLeg},
      {"right-hip", B::Hips, B::RightUpperLeg},
      {"left-knee", B::LeftUpperLeg, B::LeftLowerLeg},
      {"right-knee", B::RightUpperLeg, B::RightLowerLeg},
      {"left-ankle", B::LeftLowerLeg, B::LeftFoot},
      {"right-ankle", B::RightLowerLeg, B::RightFoot},
  }};
  for (const auto& e : kJoints) {
    if (e.label == key) {
      return {e.parent, e.child, std::string(e.label)};
    }
  }
  throw ConfigError("unknown joint '" + std::string(label) + "'");
}

std::vector<std::string> joint_labels() {
  return {"left-shoulder", "right-shoulder", "left-elbow", "right-elbow", "left-wrist", "right-wrist",
          "left-hip",      "right-hip",      "left-knee",  "right-knee",  "left-ankle", "right-ankle"};
}

double joint_angle(const BonePoseFrame& frame, const JointSpec& joint) {
  auto find = [&](BoneId bone) -> const UnitQuaternion& {
    auto it = frame.bones.find(bone);
    if (it == frame.bones.end()) {
      throw ValidationError("joint '" + joint.label + "': bone '" + std::string(bone_name(bone)) +
                            "' has no pose in this frame");
    }
    return it->second;
  };
  const UnitQuaternion& parent = find(joint.parent_side);
  return shortest_angle_deg(parent, find(joint.child_side));
}

}  // namespace bodynet

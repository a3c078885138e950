#include <gtest/gtest.h>

#include <random>
#include <set>

#include "bodynet/motion.hpp"
#include "bodynet/skeleton.hpp"

using namespace bodynet;

namespace {

UnitQuaternion random_q(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return {n(rng), n(rng), n(rng), n(rng)};
}

QuaternionSnapshot uniform_snapshot(const SensorPlacement& p, const UnitQuaternion& q) {
  QuaternionSnapshot s;
  for (SensorId id : p.sensors()) s.emplace(id, q);
  return s;
}

}  // namespace

TEST(Skeleton, TwentyBonesRootedAtHips) {
  const Skeleton skel;
  EXPECT_EQ(all_bones().size(), 20u);
  int roots = 0;
  for (BoneId b : all_bones()) {
    if (!skel.parent(b)) {
      ++roots;
      EXPECT_EQ(b, BoneId::Hips);
      continue;
    }
    // Walking up always terminates at the root.
    std::optional<BoneId> cur = b;
    int steps = 0;
    while (skel.parent(*cur) && steps < 20) {
      cur = skel.parent(*cur);
      ++steps;
    }
    EXPECT_EQ(*cur, BoneId::Hips);
  }
  EXPECT_EQ(roots, 1);
}

TEST(Skeleton, BoneNamesRoundTrip) {
  std::set<std::string> names;
  for (BoneId b : all_bones()) {
    names.emplace(bone_name(b));
    EXPECT_EQ(bone_from_name(bone_name(b)), b);
  }
  EXPECT_EQ(names.size(), 20u);
  EXPECT_THROW(bone_from_name("tail"), ConfigError);
}

TEST(Skeleton, TPoseKeepsArmChainsAligned) {
  const Skeleton skel;
  for (auto [upper, lower] : {std::pair{BoneId::LeftUpperArm, BoneId::LeftLowerArm},
                              std::pair{BoneId::RightUpperArm, BoneId::RightLowerArm}}) {
    EXPECT_EQ(shortest_angle_deg(skel.rest_orientation(upper, CalibrationPose::TPose),
                                 skel.rest_orientation(lower, CalibrationPose::TPose)),
              0.0);
    EXPECT_NEAR(shortest_angle_deg(skel.rest_orientation(upper, CalibrationPose::TPose), UnitQuaternion::identity()),
                90.0, 1e-9);
  }
  for (BoneId b : all_bones()) {
    EXPECT_EQ(skel.rest_orientation(b, CalibrationPose::Neutral), UnitQuaternion::identity());
  }
}

TEST(Skeleton, SegmentLengthOverride) {
  const Skeleton skel = Skeleton().with_segment_length(BoneId::LeftLowerArm, 0.27);
  EXPECT_DOUBLE_EQ(skel.segment_length(BoneId::LeftLowerArm), 0.27);
  EXPECT_DOUBLE_EQ(skel.segment_length(BoneId::RightLowerArm), 1.0);
  EXPECT_THROW(Skeleton().with_segment_length(BoneId::Hips, -1.0), InvalidInput);
}

TEST(Placement, PresetContents) {
  using B = BoneId;
  auto bones = [](const SensorPlacement& p) {
    std::set<BoneId> out;
    for (const auto& [id, b] : p.bindings()) out.insert(b);
    return out;
  };
  const std::set<BoneId> upper{B::Spine, B::LeftUpperArm, B::RightUpperArm, B::LeftLowerArm, B::RightLowerArm};
  EXPECT_EQ(bones(SensorPlacement::preset("p5-upper")), upper);
  std::set<BoneId> p10 = upper;
  p10.insert({B::Hips, B::LeftUpperLeg, B::RightUpperLeg, B::LeftLowerLeg, B::RightLowerLeg});
  EXPECT_EQ(bones(SensorPlacement::preset("p10")), p10);
  std::set<BoneId> p12 = p10;
  p12.insert({B::LeftFoot, B::RightFoot});
  EXPECT_EQ(bones(SensorPlacement::preset("p12")), p12);
  EXPECT_EQ(SensorPlacement::preset("p12").size(), 12u);
  EXPECT_THROW(SensorPlacement::preset("p7"), ConfigError);
}

TEST(Placement, RejectsDuplicateBone) {
  EXPECT_THROW(SensorPlacement("x", {{1, BoneId::Spine}, {2, BoneId::Spine}}), ConfigError);
  EXPECT_THROW(SensorPlacement("x", {{-1, BoneId::Spine}}), ConfigError);
}

TEST(Calibrate, StoresSnapshotVerbatim) {
  const auto p = SensorPlacement::preset("p5-upper");
  const auto rec = calibrate(uniform_snapshot(p, UnitQuaternion::identity()), p, CalibrationPose::Neutral);
  for (const auto& [id, q] : rec.q_calib) EXPECT_EQ(q, UnitQuaternion::identity());

  auto snap = uniform_snapshot(p, UnitQuaternion::identity());
  const UnitQuaternion x30 = from_axis_angle({1, 0, 0}, 30);
  snap[1] = x30;
  EXPECT_EQ(calibrate(snap, p, CalibrationPose::TPose).q_calib.at(1), x30);
}

TEST(Calibrate, MissingSensorIsNamed) {
  const auto p = SensorPlacement::preset("p5-upper");
  auto snap = uniform_snapshot(p, UnitQuaternion::identity());
  snap.erase(4);
  try {
    calibrate(snap, p, CalibrationPose::Neutral);
    FAIL() << "expected IncompleteCalibration";
  } catch (const IncompleteCalibration& e) {
    EXPECT_EQ(e.missing(), std::vector<SensorId>{4});
    EXPECT_NE(std::string(e.what()).find('4'), std::string::npos);
  }
}

TEST(AnimateFrame, CalibrationSnapshotGivesRestPose) {
  std::mt19937_64 rng(1);
  const Skeleton skel;
  const auto p = SensorPlacement::preset("p10");
  QuaternionSnapshot snap;
  for (SensorId id : p.sensors()) snap.emplace(id, random_q(rng));
  for (auto pose : {CalibrationPose::Neutral, CalibrationPose::TPose}) {
    const auto rec = calibrate(snap, p, pose);
    const auto frame = animate_frame(snap, rec, skel);
    for (const auto& [id, bone] : p.bindings()) {
      EXPECT_EQ(shortest_angle_deg(frame.bones.at(bone), skel.rest_orientation(bone, pose)), 0.0);
    }
  }
}

TEST(AnimateFrame, UnknownSensorRejected) {
  const auto p = SensorPlacement::preset("p2-joint");
  const auto rec = calibrate(uniform_snapshot(p, UnitQuaternion::identity()), p, CalibrationPose::Neutral);
  QuaternionSnapshot snap{{99, UnitQuaternion::identity()}};
  EXPECT_THROW(animate_frame(snap, rec, Skeleton()), UncalibratedSensor);
}

TEST(AnimateFrame, HingeAngleRecoveredUnderArbitraryMounting) {
  std::mt19937_64 rng(2);
  const Skeleton skel;
  const auto p = SensorPlacement::preset("p2-joint");
  const JointSpec elbow = joint_from_label("left-elbow");
  const Vector3 axis{0.2, 1.0, -0.4};
  for (int trial = 0; trial < 200; ++trial) {
    const UnitQuaternion mount_a = random_q(rng), mount_b = random_q(rng), base = random_q(rng);
    const double theta = std::uniform_real_distribution<double>(0.0, 180.0)(rng);
    const QuaternionSnapshot at_rest{{1, base * mount_a}, {2, base * mount_b}};
    const QuaternionSnapshot bent{{1, base * mount_a}, {2, base * from_axis_angle(axis, theta) * mount_b}};
    for (auto pose : {CalibrationPose::Neutral, CalibrationPose::TPose}) {
      const auto rec = calibrate(at_rest, p, pose);
      ASSERT_NEAR(joint_angle(animate_frame(bent, rec, skel), elbow), theta, 1e-6);
    }
  }
}

TEST(JointAngle, RestFrameIsZeroAndMissingBoneNamed) {
  BonePoseFrame f;
  f.bones[BoneId::LeftUpperArm] = UnitQuaternion::identity();
  f.bones[BoneId::LeftLowerArm] = UnitQuaternion::identity();
  EXPECT_EQ(joint_angle(f, joint_from_label("left elbow")), 0.0);
  try {
    joint_angle(f, joint_from_label("right_elbow"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("right-upper-arm"), std::string::npos);
  }
  EXPECT_THROW(joint_from_label("tail"), ConfigError);
}

TEST(JointAngle, SharedJointsMatchAcrossP10AndP12) {
  std::mt19937_64 rng(3);
  const Skeleton skel;
  const auto p10 = SensorPlacement::preset("p10");
  const auto p12 = SensorPlacement::preset("p12");
  std::map<BoneId, UnitQuaternion> calib_pose, moved;
  for (BoneId b : all_bones()) {
    calib_pose[b] = random_q(rng);
    moved[b] = random_q(rng);
  }
  auto snapshot = [](const SensorPlacement& p, const std::map<BoneId, UnitQuaternion>& by_bone) {
    QuaternionSnapshot s;
    for (const auto& [id, bone] : p.bindings()) s.emplace(id, by_bone.at(bone));
    return s;
  };
  const auto f10 = animate_frame(snapshot(p10, moved), calibrate(snapshot(p10, calib_pose), p10, CalibrationPose::Neutral), skel);
  const auto f12 = animate_frame(snapshot(p12, moved), calibrate(snapshot(p12, calib_pose), p12, CalibrationPose::Neutral), skel);
  for (const char* label : {"left-elbow", "right-elbow", "left-knee", "right-knee", "left-hip", "right-shoulder"}) {
    const JointSpec j = joint_from_label(label);
    EXPECT_EQ(joint_angle(f10, j), joint_angle(f12, j)) << label;
  }
}

TEST(CalibrationPose, Names) {
  EXPECT_EQ(pose_from_name("neutral"), CalibrationPose::Neutral);
  EXPECT_EQ(pose_from_name("t-pose"), CalibrationPose::TPose);
  EXPECT_EQ(pose_name(CalibrationPose::TPose), "t-pose");
  EXPECT_THROW(pose_from_name("sitting"), ConfigError);
}

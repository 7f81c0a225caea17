#pragma once

#include <cmath>

#include <Eigen/Geometry>

#include "dartkin/kinematics/kinematics.hpp"
#include "dartkin/skelio/skeleton.hpp"

namespace dartkin::synth {

/// Pose of a right-handed thrower. Angles in degrees, lengths in meters.
struct Pose {
  double shoulder_pitch = 62.0;
  double elbow_flexion = 55.0;
  double wrist_extension = 22.0;
  double trunk_yaw = -13.0;
  double grip_mm = 40.0;
  double upper_arm = 0.30;
  double forearm = 0.27;
  double hand = 0.18;
  Vec3 origin = Vec3(0.0, 0.0, 2.5);  // spine-base floor projection in sensor frame
};

namespace detail {

// Unit direction in the body's sagittal plane, pitched by `deg` from
// straight down towards the front (-z).
inline Vec3 sagittal(double deg) {
  const double a = kinematics::radians(deg);
  return {0.0, -std::cos(a), -std::sin(a)};
}

}  // namespace detail

/// Frame whose joint angles equal the pose angles by construction.
/// Body axes before yaw: +x lateral (right), +y up, -z towards the board.
inline SkeletonFrame posed_frame(const Pose& p) {
  SkeletonFrame f;
  auto set = [&](Joint j, double x, double y, double z) { f[j] = Vec3(x, y, z); };
  set(Joint::SpineBase, 0.0, 0.95, 0.0);
  set(Joint::SpineMid, 0.0, 1.18, 0.0);
  set(Joint::SpineShoulder, 0.0, 1.42, 0.0);
  set(Joint::Neck, 0.0, 1.50, 0.0);
  set(Joint::Head, 0.0, 1.62, 0.0);
  set(Joint::ShoulderLeft, -0.18, 1.40, 0.0);
  set(Joint::ElbowLeft, -0.20, 1.12, 0.0);
  set(Joint::WristLeft, -0.21, 0.88, 0.0);
  set(Joint::HandLeft, -0.21, 0.80, 0.0);
  set(Joint::HandTipLeft, -0.21, 0.72, 0.0);
  set(Joint::ThumbLeft, -0.18, 0.79, -0.02);
  set(Joint::HipLeft, -0.09, 0.92, 0.0);
  set(Joint::KneeLeft, -0.10, 0.50, 0.0);
  set(Joint::AnkleLeft, -0.10, 0.08, 0.0);
  set(Joint::FootLeft, -0.10, 0.02, -0.10);
  set(Joint::HipRight, 0.09, 0.92, 0.0);
  set(Joint::KneeRight, 0.10, 0.50, 0.0);
  set(Joint::AnkleRight, 0.10, 0.08, 0.0);
  set(Joint::FootRight, 0.10, 0.02, -0.10);

  const Vec3 shoulder(0.18, 1.40, 0.0);
  const double upper_pitch = p.shoulder_pitch;
  const double fore_pitch = upper_pitch + 180.0 - p.elbow_flexion;
  const double hand_pitch = fore_pitch + p.wrist_extension;
  const Vec3 elbow = shoulder + p.upper_arm * detail::sagittal(upper_pitch);
  const Vec3 wrist = elbow + p.forearm * detail::sagittal(fore_pitch);
  const Vec3 hand_dir = detail::sagittal(hand_pitch);
  f[Joint::ShoulderRight] = shoulder;
  f[Joint::ElbowRight] = elbow;
  f[Joint::WristRight] = wrist;
  f[Joint::HandRight] = wrist + 0.5 * p.hand * hand_dir;
  f[Joint::HandTipRight] = wrist + p.hand * hand_dir;
  f[Joint::ThumbRight] = f[Joint::HandTipRight] - 0.001 * p.grip_mm * Vec3::UnitX();

  const Eigen::Matrix3d yaw = Eigen::AngleAxisd(kinematics::radians(p.trunk_yaw), Vec3::UnitY()).toRotationMatrix();
  for (auto& q : f.joints) q = yaw * q + p.origin;
  return f;
}

/// Unit throwing direction in the sensor frame: -z tilted upwards by
/// `elevation_deg`.
inline Vec3 throw_direction(double elevation_deg) {
  const double a = kinematics::radians(elevation_deg);
  return {0.0, std::sin(a), -std::cos(a)};
}

}  // namespace dartkin::synth

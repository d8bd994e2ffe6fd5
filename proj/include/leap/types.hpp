#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>

namespace leap {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

inline constexpr int kNumLegs = 4;
inline constexpr double kGravity = 9.81;

// Leg order: FL, FR, RL, RR.  Left legs (FL, RL) have positive y.
enum LegId { FL = 0, FR = 1, RL = 2, RR = 3 };

inline double leg_side_sign(int leg) { return (leg == FL || leg == RL) ? 1.0 : -1.0; }

struct LegGeometry {
  double abduction_offset = 0.08;  // lateral hip->leg-plane offset, m
  double thigh_length = 0.213;
  double calf_length = 0.213;
};

struct RobotModel {
  double mass = 15.0;
  Mat3 inertia = Vec3(0.07, 0.26, 0.30).asDiagonal();  // body frame, kg m^2
  std::array<Vec3, kNumLegs> hip_offsets = {
      Vec3(0.19, 0.05, 0.0), Vec3(0.19, -0.05, 0.0),
      Vec3(-0.19, 0.05, 0.0), Vec3(-0.19, -0.05, 0.0)};
  LegGeometry leg;
  double friction_coefficient = 0.6;
  double max_normal_force_per_foot = 500.0;  // N
  double gravity = kGravity;
  double leg_reach = 0.40;          // swing-foot clip radius around hip, m
  double touchdown_tolerance = 0.01;  // m
  double stand_height = 0.27;
  Vec3 base_box_size = Vec3(0.38, 0.29, 0.11);  // collision proxy for the trunk

  Vec3 gravity_vec() const { return Vec3(0, 0, -gravity); }
};

struct RigidBodyState {
  Vec3 position = Vec3::Zero();            // world
  Quat orientation = Quat::Identity();     // world <- body
  Vec3 linear_velocity = Vec3::Zero();     // world
  Vec3 angular_velocity = Vec3::Zero();    // body frame
  std::array<Vec3, kNumLegs> foot_positions{};  // world
  std::array<bool, kNumLegs> foot_in_contact{};
  double time = 0.0;

  Mat3 rotation() const { return orientation.toRotationMatrix(); }
  bool all_finite() const {
    bool ok = position.allFinite() && linear_velocity.allFinite() &&
              angular_velocity.allFinite() && orientation.coeffs().allFinite();
    for (const auto& f : foot_positions) ok = ok && f.allFinite();
    return ok;
  }
};

struct FootForces {
  std::array<Vec3, kNumLegs> forces{Vec3::Zero(), Vec3::Zero(), Vec3::Zero(),
                                    Vec3::Zero()};  // world frame, zero for swing feet
  std::array<bool, kNumLegs> singular{};  // Jacobian near-singular, force zeroed
};

// roll/pitch/yaw with ZYX convention: R = Rz(yaw) * Ry(pitch) * Rx(roll)
inline Vec3 quat_to_rpy(const Quat& q) {
  const Mat3 R = q.toRotationMatrix();
  const double pitch = std::asin(std::clamp(-R(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(R(2, 0)) < 1.0 - 1e-12) {
    roll = std::atan2(R(2, 1), R(2, 2));
    yaw = std::atan2(R(1, 0), R(0, 0));
  } else {  // gimbal lock
    roll = std::atan2(-R(1, 2), R(1, 1));
    yaw = 0.0;
  }
  return Vec3(roll, pitch, yaw);
}

inline Quat rpy_to_quat(const Vec3& rpy) {
  return Quat(Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()) *
              Eigen::AngleAxisd(rpy.y(), Vec3::UnitY()) *
              Eigen::AngleAxisd(rpy.x(), Vec3::UnitX()));
}

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

inline Quat quat_exp(const Vec3& rot_vec) {
  const double angle = rot_vec.norm();
  if (angle < 1e-12) return Quat(1.0, 0.5 * rot_vec.x(), 0.5 * rot_vec.y(), 0.5 * rot_vec.z()).normalized();
  return Quat(Eigen::AngleAxisd(angle, rot_vec / angle));
}

}  // namespace leap

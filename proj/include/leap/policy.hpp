#pragma once

#include "leap/gait.hpp"
#include "leap/stance_accel.hpp"
#include "leap/types.hpp"

// Residual policy: observation construction, the 1-hidden-layer tanh MLP,
// and composition of residual actions with the acceleration controller.

namespace leap::policy {

inline constexpr int kObsDim = 29;
inline constexpr int kActionDim = 6;
inline constexpr int kHiddenDim = 256;

using ObsVec = Eigen::Matrix<double, kObsDim, 1>;
using ActVec = Eigen::Matrix<double, kActionDim, 1>;

struct ActionScale {
  double linear_accel = 5.0;   // m/s^2
  double yaw_accel = 10.0;     // rad/s^2
  double roll_pitch = 0.3;     // rad

  ActVec vec() const {
    ActVec s;
    s << linear_accel, linear_accel, linear_accel, yaw_accel, roll_pitch, roll_pitch;
    return s;
  }
};

struct PolicyParams {
  Eigen::MatrixXd W1 = Eigen::MatrixXd::Zero(kHiddenDim, kObsDim);
  Eigen::VectorXd b1 = Eigen::VectorXd::Zero(kHiddenDim);
  Eigen::MatrixXd W2 = Eigen::MatrixXd::Zero(kActionDim, kHiddenDim);
  Eigen::VectorXd b2 = Eigen::VectorXd::Zero(kActionDim);
  ObsVec obs_mean = ObsVec::Zero();
  ObsVec obs_std = ObsVec::Ones();
  ActionScale action_scale;

  static constexpr int kWeightCount =
      kHiddenDim * kObsDim + kHiddenDim + kActionDim * kHiddenDim + kActionDim;

  // Flat view over the trainable weights (normalization stats excluded).
  Eigen::VectorXd flatten() const {
    Eigen::VectorXd v(kWeightCount);
    int o = 0;
    v.segment(o, W1.size()) = Eigen::Map<const Eigen::VectorXd>(W1.data(), W1.size());
    o += static_cast<int>(W1.size());
    v.segment(o, b1.size()) = b1;
    o += static_cast<int>(b1.size());
    v.segment(o, W2.size()) = Eigen::Map<const Eigen::VectorXd>(W2.data(), W2.size());
    o += static_cast<int>(W2.size());
    v.segment(o, b2.size()) = b2;
    return v;
  }
  void unflatten(const Eigen::VectorXd& v) {
    int o = 0;
    Eigen::Map<Eigen::VectorXd>(W1.data(), W1.size()) = v.segment(o, W1.size());
    o += static_cast<int>(W1.size());
    b1 = v.segment(o, b1.size());
    o += static_cast<int>(b1.size());
    Eigen::Map<Eigen::VectorXd>(W2.data(), W2.size()) = v.segment(o, W2.size());
    o += static_cast<int>(W2.size());
    b2 = v.segment(o, b2.size());
  }
  bool is_zero() const {
    return W1.isZero(0) && b1.isZero(0) && W2.isZero(0) && b2.isZero(0);
  }
};

struct Observation {
  ObsVec v = ObsVec::Zero();
};

// Layout: base position (3), rpy (3), linear velocity (3), angular velocity
// (3), foot positions in body frame (12), displacement to target (3), yaw to
// target (1), remaining cycle time (1).
inline Observation observe(const RigidBodyState& state, const stance::JumpTask& task,
                           const gait::LegSchedule& schedule, double stance_duration,
                           double swing_duration, const RobotModel& model) {
  Observation obs;
  const Vec3 rpy = quat_to_rpy(state.orientation);
  obs.v.segment<3>(0) = state.position;
  obs.v.segment<3>(3) = rpy;
  obs.v.segment<3>(6) = state.linear_velocity;
  obs.v.segment<3>(9) = state.angular_velocity;
  const Mat3 Rt = state.rotation().transpose();
  for (int i = 0; i < kNumLegs; ++i)
    obs.v.segment<3>(12 + 3 * i) = Rt * (state.foot_positions[i] - state.position);
  obs.v.segment<3>(24) = task.target_position() - state.position;
  obs.v[24 + 3] = wrap_angle(task.target_yaw() - rpy.z());
  const double remaining = schedule.stance
                               ? schedule.remaining_phase_time + swing_duration
                               : schedule.remaining_phase_time;
  obs.v[28] = remaining;  // seconds, in [0, cycle]
  (void)stance_duration;
  (void)model;
  return obs;
}

struct ResidualAction {
  ActVec raw = ActVec::Zero();  // in [-1, 1]
  ActVec scaled = ActVec::Zero();
};

inline ResidualAction forward(const PolicyParams& p, const Observation& obs) {
  ResidualAction a;
  const ObsVec norm =
      (obs.v - p.obs_mean).cwiseQuotient(p.obs_std.cwiseMax(1e-6));
  const Eigen::VectorXd h = ((p.W1 * norm + p.b1).array().tanh()).matrix();
  a.raw = ((p.W2 * h + p.b2).array().tanh()).matrix();
  a.scaled = a.raw.cwiseProduct(p.action_scale.vec());
  return a;
}

// Componentwise sum on the 6 commanded values, clipped to command bounds.
inline stance::StanceCommand compose(const stance::StanceCommand& base,
                                     const ResidualAction& residual,
                                     const stance::StanceAccelConfig& cfg,
                                     double roll_pitch_max = 0.5) {
  stance::StanceCommand out = base;
  out.linear_acceleration = stance::clip_linear_accel(
      base.linear_acceleration + residual.scaled.head<3>(), cfg, &out.clipped);
  double ayaw = base.yaw_angular_acceleration + residual.scaled[3];
  if (std::abs(ayaw) > cfg.yaw_accel_max) {
    ayaw = std::clamp(ayaw, -cfg.yaw_accel_max, cfg.yaw_accel_max);
    out.clipped = true;
  }
  out.yaw_angular_acceleration = ayaw;
  out.roll = std::clamp(base.roll + residual.scaled[4], -roll_pitch_max, roll_pitch_max);
  out.pitch = std::clamp(base.pitch + residual.scaled[5], -roll_pitch_max, roll_pitch_max);
  return out;
}

}  // namespace leap::policy

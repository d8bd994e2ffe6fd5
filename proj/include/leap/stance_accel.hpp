#pragma once

#include "leap/gait.hpp"
#include "leap/types.hpp"

// Manually designed acceleration controller.  Computes the lift-off velocity
// from the jump task, tracks it with a time-to-go law, and falls back to a
// low-standing preparation pose when the predicted lift-off CoM is
// kinematically infeasible.

namespace leap::stance {

struct JumpTask {
  Vec3 displacement = Vec3::Zero();  // p_x, p_y (m), p_yaw (rad)
  Vec3 start_position = Vec3::Zero();
  double start_yaw = 0.0;
  double swing_duration = 0.5;

  // Desired landing position in the world frame (displacement rotated by
  // the yaw at jump start).
  Vec3 target_position() const {
    const double c = std::cos(start_yaw), s = std::sin(start_yaw);
    return start_position + Vec3(c * displacement.x() - s * displacement.y(),
                                 s * displacement.x() + c * displacement.y(), 0.0);
  }
  double target_yaw() const { return start_yaw + displacement.z(); }
};

struct LiftoffVelocity {
  Vec3 linear = Vec3::Zero();  // world
  double yaw_rate = 0.0;
};

struct StanceCommand {
  Vec3 linear_acceleration = Vec3::Zero();  // world
  double yaw_angular_acceleration = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  bool preparation = false;  // infeasible branch taken
  bool clipped = false;
};

struct StanceAccelConfig {
  double box_half_xy = 0.15;      // feasible-CoM box half extent, m
  double box_z_min = 0.12;        // absolute, m
  double box_z_max = 0.32;        // absolute, m
  double t_floor = 0.004;         // time-to-go floor, s (two control substeps)
  double prep_height = 0.16;      // preparation pose height, m
  double prep_kp = 100.0;         // 1/s^2
  double prep_kd = 20.0;          // 1/s
  double accel_max = 40.0;        // m/s^2 (z lower bound is -g)
  double yaw_accel_max = 40.0;    // rad/s^2
  double gravity = kGravity;
};

inline LiftoffVelocity liftoff_velocity(const JumpTask& task,
                                        double gravity = kGravity) {
  LiftoffVelocity v;
  const double c = std::cos(task.start_yaw), s = std::sin(task.start_yaw);
  const double vx = task.displacement.x() / task.swing_duration;
  const double vy = task.displacement.y() / task.swing_duration;
  v.linear = Vec3(c * vx - s * vy, s * vx + c * vy, 0.5 * gravity * task.swing_duration);
  v.yaw_rate = task.displacement.z() / task.swing_duration;
  return v;
}

inline Vec3 clip_linear_accel(const Vec3& a, const StanceAccelConfig& cfg,
                              bool* clipped = nullptr) {
  Vec3 out;
  out.x() = std::clamp(a.x(), -cfg.accel_max, cfg.accel_max);
  out.y() = std::clamp(a.y(), -cfg.accel_max, cfg.accel_max);
  out.z() = std::clamp(a.z(), -cfg.gravity, cfg.accel_max);
  if (clipped && (out - a).norm() > 0) *clipped = true;
  return out;
}

// Componentwise (v_liftoff - v) / max(t_remaining, t_floor), clipped.
inline std::pair<Vec3, double> tracking_acceleration(const LiftoffVelocity& v_liftoff,
                                                     const Vec3& v_current,
                                                     double yaw_rate_current,
                                                     double t_remaining,
                                                     const StanceAccelConfig& cfg,
                                                     bool* clipped = nullptr) {
  const double t = std::max(t_remaining, cfg.t_floor);
  Vec3 a = clip_linear_accel((v_liftoff.linear - v_current) / t, cfg, clipped);
  double ayaw = (v_liftoff.yaw_rate - yaw_rate_current) / t;
  if (std::abs(ayaw) > cfg.yaw_accel_max) {
    ayaw = std::clamp(ayaw, -cfg.yaw_accel_max, cfg.yaw_accel_max);
    if (clipped) *clipped = true;
  }
  return {a, ayaw};
}

// CoM at lift-off under constant acceleration, numerical integration with
// step dt (trapezoidal, exact for constant acceleration).
inline Vec3 predict_liftoff_com(const Vec3& position, const Vec3& velocity,
                                const Vec3& a_des, double t_remaining, double dt) {
  Vec3 p = position, v = velocity;
  double t = 0.0;
  while (t < t_remaining - 1e-12) {
    const double h = std::min(dt, t_remaining - t);
    p += v * h + 0.5 * a_des * h * h;
    v += a_des * h;
    t += h;
  }
  return p;
}

struct FeasibilityCheck {
  bool feasible = false;
  Vec3 liftoff_com = Vec3::Zero();
};

// The candidate acceleration is feasible when the whole predicted CoM path
// up to lift-off stays inside the box: +-box_half_xy around the current CoM
// horizontally, [box_z_min, box_z_max] absolute in z.  Checking the full
// path (not just the endpoint) rejects commands whose trajectory dips below
// the kinematic height limit even though the lift-off point itself is fine.
inline FeasibilityCheck check_feasible(const Vec3& position, const Vec3& velocity,
                                       const Vec3& a_des, double t_remaining,
                                       double dt, const StanceAccelConfig& cfg) {
  FeasibilityCheck out;
  Vec3 p = position, v = velocity;
  bool ok = position.z() >= cfg.box_z_min - 1e-9 && position.z() <= cfg.box_z_max + 1e-9;
  double t = 0.0;
  while (t < t_remaining - 1e-12) {
    const double h = std::min(dt, t_remaining - t);
    v += a_des * h;
    p += v * h;
    t += h;
    if (p.z() < cfg.box_z_min || p.z() > cfg.box_z_max ||
        std::abs(p.x() - position.x()) > cfg.box_half_xy ||
        std::abs(p.y() - position.y()) > cfg.box_half_xy) {
      ok = false;
      break;
    }
  }
  out.feasible = ok;
  out.liftoff_com = p;
  return out;
}

// Critically damped PD toward the preparation pose (crouch over the support
// center at prep_height).
inline Vec3 preparation_accel(const Vec3& position, const Vec3& velocity,
                              const Vec3& support_center,
                              const StanceAccelConfig& cfg, bool* clipped = nullptr) {
  const Vec3 p_prep(support_center.x(), support_center.y(), cfg.prep_height);
  return clip_linear_accel(cfg.prep_kp * (p_prep - position) - cfg.prep_kd * velocity,
                           cfg, clipped);
}

inline Vec3 support_center(const RigidBodyState& state) {
  Vec3 c = Vec3::Zero();
  int n = 0;
  for (int i = 0; i < kNumLegs; ++i)
    if (state.foot_in_contact[i]) {
      c += state.foot_positions[i];
      ++n;
    }
  if (n == 0) return state.position;
  c /= n;
  return c;
}

// Stance-phase command: tracking acceleration when the predicted lift-off
// CoM path is feasible, preparation-pose PD otherwise.  Roll and pitch are
// always commanded to zero; tilt corrections come only from the residual
// policy.
inline StanceCommand select_command(const RigidBodyState& state, const JumpTask& task,
                                    const gait::LegSchedule& schedule,
                                    const StanceAccelConfig& cfg, double dt = 0.002) {
  StanceCommand cmd;
  const LiftoffVelocity v_lo = liftoff_velocity(task, cfg.gravity);
  const double yaw_rate = (state.rotation() * state.angular_velocity).z();
  auto [a_des, a_yaw] = tracking_acceleration(v_lo, state.linear_velocity, yaw_rate,
                                              schedule.remaining_phase_time, cfg,
                                              &cmd.clipped);
  const auto feas = check_feasible(state.position, state.linear_velocity, a_des,
                                   schedule.remaining_phase_time, dt, cfg);
  if (feas.feasible) {
    cmd.linear_acceleration = a_des;
  } else {
    cmd.preparation = true;
    cmd.linear_acceleration = preparation_accel(
        state.position, state.linear_velocity, support_center(state), cfg, &cmd.clipped);
  }
  cmd.yaw_angular_acceleration = a_yaw;
  return cmd;
}

}  // namespace leap::stance

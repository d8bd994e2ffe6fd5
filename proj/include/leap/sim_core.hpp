#pragma once

#include "leap/gait.hpp"
#include "leap/leg_kinematics.hpp"
#include "leap/types.hpp"

// Single-rigid-body quadruped simulator with massless legs.  Stance feet are
// pinned in the world; swing feet are kinematic (set from the swing
// controller, clipped to leg reach).  Contact forces follow from joint
// torques through the leg Jacobians and are projected onto the friction
// pyramid before the Newton-Euler update.

namespace leap::sim {

struct LegState {
  kin::JointAngles angles;
  Vec3 joint_velocity = Vec3::Zero();
  bool valid = false;  // IK failed (foot outside workspace)
};

inline Vec3 foot_in_hip_frame(const RigidBodyState& state, const RobotModel& model,
                              int leg) {
  return state.rotation().transpose() * (state.foot_positions[leg] - state.position) -
         model.hip_offsets[leg];
}

// Joint angles/velocities implied by the rigid-body state.  For a pinned
// foot the world foot velocity is zero; for swing feet it is taken as zero
// too (massless legs, velocity only matters for stance force feedback).
inline LegState leg_state(const RigidBodyState& state, const RobotModel& model,
                          int leg) {
  LegState ls;
  const Vec3 p_hip = foot_in_hip_frame(state, model, leg);
  auto ja = kin::inverse(p_hip, model.leg, leg_side_sign(leg));
  if (!ja) {
    ja = kin::inverse(kin::clip_to_workspace(p_hip, model.leg, leg_side_sign(leg)),
                      model.leg, leg_side_sign(leg));
    if (!ja) return ls;
  }
  ls.angles = *ja;
  ls.valid = true;
  const Mat3 Rt = state.rotation().transpose();
  const Vec3 r_body = Rt * (state.foot_positions[leg] - state.position);
  // d/dt(R^T (p_f - p_b)) with pinned foot: -R^T v_b - w x r_body
  const Vec3 v_hip = -Rt * state.linear_velocity - state.angular_velocity.cross(r_body);
  ls.joint_velocity = kin::joint_velocity(ls.angles, v_hip, model.leg, leg_side_sign(leg));
  return ls;
}

// f_i = -R (J_i^T)^{-1} tau_i for contact feet (zero for swing feet).
// A near-singular Jacobian (|det| < 1e-8) yields zero force plus a flag.
inline FootForces torques_to_foot_forces(const std::array<Vec3, kNumLegs>& joint_torques,
                                         const RigidBodyState& state,
                                         const RobotModel& model) {
  FootForces out;
  const Mat3 R = state.rotation();
  for (int i = 0; i < kNumLegs; ++i) {
    out.forces[i].setZero();
    if (!state.foot_in_contact[i]) continue;
    const LegState ls = leg_state(state, model, i);
    if (!ls.valid) {
      out.singular[i] = true;
      continue;
    }
    const Mat3 J = kin::jacobian(ls.angles, model.leg, leg_side_sign(i));
    if (std::abs(J.determinant()) < 1e-8) {
      out.singular[i] = true;
      continue;
    }
    const Vec3 f_hip = -J.transpose().inverse() * joint_torques[i];
    out.forces[i] = R * f_hip;
  }
  return out;
}

// Per-axis friction pyramid with unilateral normal force in [0, f_max].
inline Vec3 project_friction(const Vec3& force, double mu,
                             double f_max = 1e30) {
  Vec3 f = force;
  f.z() = std::clamp(f.z(), 0.0, f_max);
  const double lim = mu * f.z();
  f.x() = std::clamp(f.x(), -lim, lim);
  f.y() = std::clamp(f.y(), -lim, lim);
  return f;
}

struct MotorCommand {
  std::array<Vec3, kNumLegs> q_des{};
  std::array<Vec3, kNumLegs> qdot_des{};
  std::array<Vec3, kNumLegs> tau_ff{};
  double kp = 30.0;
  double kd = 1.0;
  double tau_max = 35.0;
  bool torque_clipped = false;
};

// Impedance law tau = kp (q_des - q) + kd (qdot_des - qdot) + tau_ff,
// saturated at tau_max per joint.
inline std::array<Vec3, kNumLegs> actuator_torques(const MotorCommand& cmd,
                                                   const RigidBodyState& state,
                                                   const RobotModel& model,
                                                   bool* clipped = nullptr) {
  std::array<Vec3, kNumLegs> tau{};
  for (int i = 0; i < kNumLegs; ++i) {
    tau[i].setZero();
    if (!state.foot_in_contact[i]) continue;  // swing legs are kinematic
    const LegState ls = leg_state(state, model, i);
    if (!ls.valid) continue;
    Vec3 t = cmd.kp * (cmd.q_des[i] - ls.angles.q) +
             cmd.kd * (cmd.qdot_des[i] - ls.joint_velocity) + cmd.tau_ff[i];
    for (int k = 0; k < 3; ++k) {
      if (std::abs(t[k]) > cmd.tau_max) {
        t[k] = std::clamp(t[k], -cmd.tau_max, cmd.tau_max);
        if (clipped) *clipped = true;
      }
    }
    tau[i] = t;
  }
  return tau;
}

struct StepResult {
  RigidBodyState state;
  FootForces applied_forces;
  Vec3 linear_acceleration = Vec3::Zero();  // world, kinematic (includes gravity)
  bool non_finite = false;
};

inline Vec3 clip_to_reach(const Vec3& target_world, const Vec3& hip_world,
                          double reach) {
  const Vec3 d = target_world - hip_world;
  const double n = d.norm();
  if (n <= reach) return target_world;
  return hip_world + d * (reach / n);
}

// One fixed step of semi-implicit Euler (velocity first).  Swing feet are
// teleported to swing_targets (clipped to leg reach); a foot is pinned when
// the schedule wants contact and the foot is within touchdown_tolerance of
// the ground, or when a scheduled-swing foot penetrates the ground.
inline StepResult step(const RigidBodyState& state,
                       const std::array<Vec3, kNumLegs>& joint_torques,
                       const std::array<Vec3, kNumLegs>& swing_targets,
                       const gait::LegSchedule& schedule, const RobotModel& model,
                       double dt) {
  StepResult res;
  RigidBodyState next = state;

  FootForces ff = torques_to_foot_forces(joint_torques, state, model);
  Vec3 force_sum = Vec3::Zero();
  Vec3 torque_body = Vec3::Zero();
  const Mat3 R = state.rotation();
  for (int i = 0; i < kNumLegs; ++i) {
    if (!state.foot_in_contact[i]) continue;
    ff.forces[i] = project_friction(ff.forces[i], model.friction_coefficient,
                                    model.max_normal_force_per_foot);
    force_sum += ff.forces[i];
    const Vec3 r_body = R.transpose() * (state.foot_positions[i] - state.position);
    torque_body += r_body.cross(R.transpose() * ff.forces[i]);
  }
  res.applied_forces = ff;

  const Vec3 accel = force_sum / model.mass + model.gravity_vec();
  res.linear_acceleration = accel;
  next.linear_velocity += dt * accel;
  next.position += dt * next.linear_velocity;

  // momentum-form rotational update: the world angular momentum changes only
  // by the applied torque, so torque-free flight conserves it to machine
  // precision (the gyroscopic term is carried by the frame rotation)
  const Vec3 L_world =
      R * (model.inertia * state.angular_velocity) + dt * (R * torque_body);
  const Vec3 omega_mid = model.inertia.ldlt().solve(R.transpose() * L_world);
  next.orientation = state.orientation * quat_exp(omega_mid * dt);
  next.orientation.normalize();
  next.angular_velocity = model.inertia.ldlt().solve(
      next.orientation.toRotationMatrix().transpose() * L_world);

  const Mat3 Rn = next.orientation.toRotationMatrix();
  for (int i = 0; i < kNumLegs; ++i) {
    const bool want_contact = schedule.desired_contact[i];
    if (state.foot_in_contact[i] && want_contact) continue;  // stays pinned
    const Vec3 hip_w = next.position + Rn * model.hip_offsets[i];
    Vec3 foot = clip_to_reach(swing_targets[i], hip_w, model.leg_reach);
    if (want_contact) {
      if (foot.z() <= model.touchdown_tolerance) {
        foot.z() = 0.0;
        next.foot_positions[i] = foot;
        next.foot_in_contact[i] = true;
      } else {
        next.foot_positions[i] = foot;
        next.foot_in_contact[i] = false;  // late touchdown: contact mismatch
      }
    } else {
      if (foot.z() < 0.0) {  // early touchdown: penetration during scheduled swing
        foot.z() = 0.0;
        next.foot_positions[i] = foot;
        next.foot_in_contact[i] = true;
      } else {
        next.foot_positions[i] = foot;
        next.foot_in_contact[i] = false;
      }
    }
  }

  next.time = state.time + dt;
  if (!next.all_finite()) res.non_finite = true;
  res.state = next;
  return res;
}

}  // namespace leap::sim

#pragma once

#include <vector>

#include "leap/leg_kinematics.hpp"
#include "leap/sim_core.hpp"
#include "leap/stance_accel.hpp"
#include "leap/types.hpp"

// Low-level whole-body controller.  Fills the 18-dim base command from the
// stance command, distributes ground-reaction forces with a constrained
// least-squares QP over the single-rigid-body wrench map, and emits the
// per-motor impedance command (position, velocity, feedforward torque).

namespace leap::wbc {

struct WbcCommand {
  Vec6 base_pose_des = Vec6::Zero();      // x y z roll pitch yaw
  Vec6 base_velocity_des = Vec6::Zero();  // linear (world), angular (body)
  Vec6 base_accel_des = Vec6::Zero();     // linear (world), angular: wx wy wz-dot
  std::array<Vec3, kNumLegs> swing_foot_targets{};  // world, swing feet only
};

struct WbcConfig {
  double kp = 30.0;     // N m / rad
  double kd = 1.0;      // N m s / rad
  double tau_max = 35.0;
  double qp_regularization = 1e-8;
  int qp_max_iterations = 200;
  double qp_tolerance = 1e-6;  // KKT stationarity residual
  double angular_weight = 10.0;
  double attitude_kp = 150.0;  // 1/s^2, roll/pitch wrench feedback
  double attitude_kd = 25.0;   // 1/s
  double dls_lambda = 1e-4;
};

// pose: x,y,z,yaw from the current state; roll,pitch from the stance command.
// velocity: linear current, angular zero.  acceleration: linear and yaw from
// the stance command, roll/pitch angular zero.
inline WbcCommand assemble_command(const stance::StanceCommand& stance_cmd,
                                   const RigidBodyState& state,
                                   const std::array<Vec3, kNumLegs>& swing_targets) {
  WbcCommand cmd;
  const Vec3 rpy = quat_to_rpy(state.orientation);
  cmd.base_pose_des << state.position.x(), state.position.y(), state.position.z(),
      stance_cmd.roll, stance_cmd.pitch, rpy.z();
  cmd.base_velocity_des.head<3>() = state.linear_velocity;
  cmd.base_accel_des.head<3>() = stance_cmd.linear_acceleration;
  cmd.base_accel_des[5] = stance_cmd.yaw_angular_acceleration;
  cmd.swing_foot_targets = swing_targets;
  return cmd;
}

// Euclidean projection of a single foot force onto the per-axis friction
// pyramid {|fx| <= mu fz, |fy| <= mu fz, 0 <= fz <= f_max}.  The normal
// component couples with the tangential clamps, so the optimal z is found
// among the closed-form stationary points of the piecewise-quadratic
// distance function.
inline Vec3 project_pyramid(const Vec3& f, double mu, double f_max) {
  const double ax = std::abs(f.x()), ay = std::abs(f.y()), z0 = f.z();
  auto cost = [&](double z) {
    const double dx = std::max(ax - mu * z, 0.0);
    const double dy = std::max(ay - mu * z, 0.0);
    return dx * dx + dy * dy + (z - z0) * (z - z0);
  };
  double best_z = std::clamp(z0, 0.0, f_max);
  double best_c = cost(best_z);
  const double cands[3] = {
      (z0 + mu * (ax + ay)) / (1.0 + 2.0 * mu * mu),
      (z0 + mu * ax) / (1.0 + mu * mu),
      (z0 + mu * ay) / (1.0 + mu * mu)};
  for (double z : cands) {
    z = std::clamp(z, 0.0, f_max);
    const double c = cost(z);
    if (c < best_c) {
      best_c = c;
      best_z = z;
    }
  }
  const double lim = mu * best_z;
  return Vec3(std::clamp(f.x(), -lim, lim), std::clamp(f.y(), -lim, lim), best_z);
}

struct QpDiagnostics {
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
  bool no_stance_feet = false;
};

// min_f ||A f - b||^2_W + alpha ||f||^2 over the friction pyramid, solved by
// accelerated projected gradient.  The iterate starts from the projected
// regularized least-squares solution, so feasible interior commands converge
// immediately and the iterations only work off active constraints.
inline FootForces distribute_forces(const WbcCommand& cmd, const RigidBodyState& state,
                                    const RobotModel& model,
                                    const WbcConfig& cfg = WbcConfig(),
                                    QpDiagnostics* diag = nullptr) {
  FootForces out;
  QpDiagnostics local;
  QpDiagnostics& d = diag ? *diag : local;

  std::vector<int> stance_feet;
  for (int i = 0; i < kNumLegs; ++i)
    if (state.foot_in_contact[i]) stance_feet.push_back(i);
  const int m = static_cast<int>(stance_feet.size());
  if (m == 0) {
    d.no_stance_feet = true;
    return out;
  }

  const int n = 3 * m;
  const Mat3 R = state.rotation();
  Eigen::MatrixXd A(6, n);
  for (int k = 0; k < m; ++k) {
    const Vec3 r_body = R.transpose() * (state.foot_positions[stance_feet[k]] - state.position);
    Mat3 rx;
    rx << 0, -r_body.z(), r_body.y(), r_body.z(), 0, -r_body.x(), -r_body.y(),
        r_body.x(), 0;
    A.block<3, 3>(0, 3 * k) = Mat3::Identity();
    A.block<3, 3>(3, 3 * k) = rx * R.transpose();
  }
  Vec6 b;
  b.head<3>() = model.mass * (cmd.base_accel_des.head<3>() - model.gravity_vec());
  const Vec3 omega = state.angular_velocity;
  b.tail<3>() = model.inertia * cmd.base_accel_des.tail<3>() +
                omega.cross(model.inertia * omega);
  // roll/pitch PD on the commanded pose and angular velocity, folded into the
  // tracked moment; yaw is driven by the feedforward acceleration alone so
  // the damping never fights a commanded turn
  {
    const Mat3 R_des = rpy_to_quat(Vec3(cmd.base_pose_des[3], cmd.base_pose_des[4],
                                        cmd.base_pose_des[5]))
                           .toRotationMatrix();
    const Mat3 E = 0.5 * (R.transpose() * R_des - R_des.transpose() * R);
    Vec3 pd = cfg.attitude_kp * Vec3(E(2, 1), E(0, 2), E(1, 0)) +
              cfg.attitude_kd * (cmd.base_velocity_des.tail<3>() - omega);
    pd.z() = 0.0;
    b.tail<3>() += model.inertia * pd;
  }

  Vec6 w;
  w << 1, 1, 1, cfg.angular_weight, cfg.angular_weight, cfg.angular_weight;
  const Eigen::MatrixXd AtW = A.transpose() * w.asDiagonal();
  const Eigen::MatrixXd H =
      AtW * A + cfg.qp_regularization * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd g0 = AtW * b;

  auto project = [&](Eigen::VectorXd& f) {
    for (int k = 0; k < m; ++k)
      f.segment<3>(3 * k) = project_pyramid(f.segment<3>(3 * k),
                                            model.friction_coefficient,
                                            model.max_normal_force_per_foot);
  };

  Eigen::VectorXd f = H.ldlt().solve(g0);
  project(f);

  const double L = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(H)
                       .eigenvalues()
                       .maxCoeff();
  const double eta = 1.0 / std::max(L, 1e-12);

  Eigen::VectorXd y = f, f_prev = f;
  double t_mom = 1.0;
  for (int it = 0; it < cfg.qp_max_iterations; ++it) {
    const Eigen::VectorXd grad = H * f - g0;
    Eigen::VectorXd f_proj = f - eta * grad;
    project(f_proj);
    d.kkt_residual = (f_proj - f).lpNorm<Eigen::Infinity>() / eta;
    d.iterations = it;
    if (d.kkt_residual < cfg.qp_tolerance) {
      d.converged = true;
      break;
    }
    const Eigen::VectorXd grad_y = H * y - g0;
    Eigen::VectorXd f_next = y - eta * grad_y;
    project(f_next);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t_mom * t_mom));
    y = f_next + ((t_mom - 1.0) / t_next) * (f_next - f_prev);
    f_prev = f_next;
    f = f_next;
    t_mom = t_next;
  }

  for (int k = 0; k < m; ++k) out.forces[stance_feet[k]] = f.segment<3>(3 * k);
  return out;
}

// Joint targets from inverse kinematics of the desired base pose (stance
// legs) or the swing targets (swing legs), plus Jacobian-transpose torque
// feedforward for the distributed forces.
inline sim::MotorCommand motor_command(const WbcCommand& cmd, const FootForces& forces,
                                       const RigidBodyState& state,
                                       const RobotModel& model,
                                       const WbcConfig& cfg = WbcConfig(),
                                       bool* out_of_reach = nullptr) {
  sim::MotorCommand mc;
  mc.kp = cfg.kp;
  mc.kd = cfg.kd;
  mc.tau_max = cfg.tau_max;

  const Vec3 pose_rpy(cmd.base_pose_des[3], cmd.base_pose_des[4], cmd.base_pose_des[5]);
  const Mat3 R_des = rpy_to_quat(pose_rpy).toRotationMatrix();
  const Vec3 p_des = cmd.base_pose_des.head<3>();
  const Mat3 R = state.rotation();

  for (int i = 0; i < kNumLegs; ++i) {
    const double side = leg_side_sign(i);
    bool clipped = false;
    if (state.foot_in_contact[i]) {
      const Vec3 p_hip = R_des.transpose() * (state.foot_positions[i] - p_des) -
                         model.hip_offsets[i];
      const auto ja = kin::inverse_clipped(p_hip, model.leg, side, &clipped);
      if (ja) {
        mc.q_des[i] = ja->q;
        // desired angular velocity is zero, so only the linear term remains
        const Vec3 v_hip_des = -R_des.transpose() * cmd.base_velocity_des.head<3>();
        mc.qdot_des[i] =
            kin::joint_velocity(*ja, v_hip_des, model.leg, side, cfg.dls_lambda);
      }
      const sim::LegState ls = sim::leg_state(state, model, i);
      if (ls.valid) {
        const Mat3 J = kin::jacobian(ls.angles, model.leg, side);
        mc.tau_ff[i] = J.transpose() * (-R.transpose() * forces.forces[i]);
      }
    } else {
      const Vec3 p_hip =
          R.transpose() * (cmd.swing_foot_targets[i] - state.position) -
          model.hip_offsets[i];
      const auto ja = kin::inverse_clipped(p_hip, model.leg, side, &clipped);
      if (ja) mc.q_des[i] = ja->q;
      mc.tau_ff[i].setZero();
    }
    if (clipped && out_of_reach) *out_of_reach = true;
  }
  return mc;
}

}  // namespace leap::wbc

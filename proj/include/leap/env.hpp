#pragma once

#include <random>
#include <vector>

#include "leap/config.hpp"
#include "leap/estimator.hpp"
#include "leap/gait.hpp"
#include "leap/policy.hpp"
#include "leap/sim_core.hpp"
#include "leap/stance_accel.hpp"
#include "leap/swing.hpp"
#include "leap/types.hpp"
#include "leap/wbc.hpp"

// The jumping MDP: scheduler -> stance/swing controllers -> WBC -> simulator
// at 500 Hz, with the policy acting at the control rate (zero-order hold).
// Each episode runs the configured jump sequence; a new JumpTask is recorded
// at every cycle boundary from the robot's current (estimated) position.

namespace leap::env {

enum class Mode { ControllerPlusPolicy, ControllerOnly, PolicyOnly };

enum class TerminationReason { None, Height, Orientation, BodyContact, NonFinite };

inline const char* to_string(TerminationReason r) {
  switch (r) {
    case TerminationReason::Height: return "height";
    case TerminationReason::Orientation: return "orientation";
    case TerminationReason::BodyContact: return "body_contact";
    case TerminationReason::NonFinite: return "non_finite";
    default: return "none";
  }
}

struct RewardTerms {
  double alive = 0.0;
  double position = 0.0;     // <= 0
  double orientation = 0.0;  // <= 0
  double contact = 0.0;      // <= 0
  double total = 0.0;
};

inline RewardTerms compute_reward(const RigidBodyState& state,
                                  const stance::JumpTask& task,
                                  const gait::LegSchedule& schedule,
                                  const std::array<bool, kNumLegs>& contacts,
                                  const EnvConfig& cfg) {
  RewardTerms r;
  r.alive = cfg.alive_bonus;
  const Vec3 target = task.target_position();
  const double dx = state.position.x() - target.x();
  const double dy = state.position.y() - target.y();
  const double d_total = std::max(task.displacement.head<2>().norm(), cfg.distance_floor);
  r.position = -(dx * dx + dy * dy) / (d_total * d_total);
  const Vec3 rpy = quat_to_rpy(state.orientation);
  r.orientation = -(rpy.x() * rpy.x() + rpy.y() * rpy.y());
  int mismatches = 0;
  for (int i = 0; i < kNumLegs; ++i)
    if (contacts[i] != schedule.desired_contact[i]) ++mismatches;
  r.contact = -static_cast<double>(mismatches);
  r.total = r.alive + cfg.w_position * r.position + cfg.w_orientation * r.orientation +
            cfg.w_contact * r.contact;
  return r;
}

inline TerminationReason check_termination(const RigidBodyState& state,
                                           const RobotModel& model,
                                           const EnvConfig& cfg) {
  if (!state.all_finite()) return TerminationReason::NonFinite;
  if (state.position.z() < cfg.min_height) return TerminationReason::Height;
  const Mat3 R = state.rotation();
  if (R(2, 2) < cfg.min_up_cosine) return TerminationReason::Orientation;
  const Vec3 h = 0.5 * model.base_box_size;
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2) {
        const Vec3 corner = state.position + R * Vec3(sx * h.x(), sy * h.y(), sz * h.z());
        if (corner.z() < 0.0) return TerminationReason::BodyContact;
      }
  return TerminationReason::None;
}

struct TrajectoryRow {
  double time = 0.0;
  RigidBodyState state;
  Vec3 total_force = Vec3::Zero();   // world
  Vec3 total_torque = Vec3::Zero();  // body
  RewardTerms reward;
  Vec3 task_target = Vec3::Zero();
  double estimator_pos_error = 0.0;
  double estimator_vel_error = 0.0;
  int qp_iterations = 0;
  double qp_residual = 0.0;
  double stance_roll_cmd = 0.0;
  double stance_pitch_cmd = 0.0;
};

struct EpisodeSummary {
  double episode_return = 0.0;
  int ticks = 0;
  int jumps_completed = 0;
  std::vector<double> flight_times;    // per jump, s
  std::vector<double> landing_errors;  // per jump, planar m
  std::vector<double> yaw_progress;    // per jump, rad
  double peak_yaw_rate = 0.0;          // |world z angular velocity|
  TerminationReason termination = TerminationReason::None;
  bool success = false;  // all jumps completed without termination
};

struct StepOutput {
  policy::Observation observation;
  double reward = 0.0;
  bool done = false;
  RewardTerms reward_terms;
};

class JumpEnv {
 public:
  explicit JumpEnv(const Config& cfg, Mode mode = Mode::ControllerPlusPolicy)
      : cfg_(cfg), mode_(mode) {
    n_substeps_ = std::max(1, static_cast<int>(std::llround(cfg_.env.control_dt /
                                                            cfg_.env.sim_dt)));
  }

  const Config& config() const { return cfg_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }
  void set_record_trajectory(bool on) { record_ = on; }
  const std::vector<TrajectoryRow>& trajectory() const { return traj_; }
  const RigidBodyState& true_state() const { return state_; }
  const stance::JumpTask& current_task() const { return task_; }
  const EpisodeSummary& summary() const { return summary_; }
  bool done() const { return done_; }
  double cycle_duration() const {
    return cfg_.gait.stance_duration + cfg_.gait.swing_duration;
  }
  int num_jumps() const { return static_cast<int>(cfg_.env.jump_sequence.size()); }

  // Observations the policy consumes during an episode (for the trainer's
  // running normalization statistics).
  const std::vector<policy::ObsVec>& observation_log() const { return obs_log_; }

  policy::Observation reset(std::uint64_t seed) {
    rng_.seed(seed);
    step_count_ = 0;
    done_ = false;
    traj_.clear();
    obs_log_.clear();
    summary_ = EpisodeSummary{};
    summary_.flight_times.assign(num_jumps(), 0.0);
    summary_.landing_errors.assign(num_jumps(), 0.0);
    summary_.yaw_progress.assign(num_jumps(), 0.0);

    state_ = RigidBodyState{};
    state_.position = Vec3(0, 0, cfg_.robot.stand_height);
    for (int i = 0; i < kNumLegs; ++i) {
      Vec3 hip = state_.position + cfg_.robot.hip_offsets[i];
      state_.foot_positions[i] =
          Vec3(hip.x(), hip.y() + leg_side_sign(i) * cfg_.robot.leg.abduction_offset, 0.0);
      state_.foot_in_contact[i] = true;
      landing_targets_[i] = state_.foot_positions[i];
      liftoff_feet_[i] = state_.foot_positions[i];
    }
    kf_ = est::EstimatorState{};
    kf_.mean.head<3>() = state_.position;
    kf_.mean.tail<3>() = state_.linear_velocity;
    prev_stance_ = true;

    jump_index_ = 0;
    record_task(0);
    jump_start_yaw_ = 0.0;
    prev_yaw_ = 0.0;

    const auto sched = gait::schedule_at(0.0, cfg_.gait.stance_duration,
                                         cfg_.gait.swing_duration);
    return policy::observe(control_state(), task_, sched, cfg_.gait.stance_duration,
                           cfg_.gait.swing_duration, cfg_.robot);
  }

  StepOutput step(const policy::ResidualAction& action) {
    if (done_) throw std::logic_error("JumpEnv::step called after episode end");
    StepOutput out;
    wbc::QpDiagnostics diag;
    for (int s = 0; s < n_substeps_ && !done_; ++s) substep(action, diag);

    const double t = step_count_ * cfg_.env.sim_dt;
    const auto sched = gait::schedule_at(t, cfg_.gait.stance_duration,
                                         cfg_.gait.swing_duration);
    // the contact flags were produced by the tick's last substep, which ran
    // under the schedule at t - dt; scoring them against the next tick's
    // schedule would charge one phantom mismatch tick at every transition
    const auto sched_scored = gait::schedule_at(t - cfg_.env.sim_dt,
                                                cfg_.gait.stance_duration,
                                                cfg_.gait.swing_duration);
    out.reward_terms = compute_reward(state_, task_, sched_scored,
                                      state_.foot_in_contact, cfg_.env);
    out.reward = out.reward_terms.total;
    summary_.episode_return += out.reward;
    ++summary_.ticks;
    last_reward_ = out.reward_terms;

    if (!done_ && sched.cycle_index >= num_jumps()) {
      finish_jump(num_jumps() - 1);
      summary_.jumps_completed = num_jumps();
      summary_.success = true;
      done_ = true;
    }
    out.done = done_;
    out.observation = policy::observe(control_state(), task_, sched,
                                      cfg_.gait.stance_duration,
                                      cfg_.gait.swing_duration, cfg_.robot);
    obs_log_.push_back(out.observation.v);
    return out;
  }

  // Convenience: roll out one full episode with a fixed policy.
  EpisodeSummary rollout(const policy::PolicyParams& params, std::uint64_t seed) {
    policy::Observation obs = reset(seed);
    while (!done_) {
      policy::ResidualAction a;
      if (mode_ != Mode::ControllerOnly) a = policy::forward(params, obs);
      obs = step(a).observation;
    }
    return summary_;
  }

 private:
  RigidBodyState control_state() const {
    RigidBodyState s = state_;
    s.position = kf_.position();
    s.linear_velocity = kf_.velocity();
    return s;
  }

  void record_task(int jump) {
    const Vec3& d = cfg_.env.jump_sequence[jump];
    task_.displacement = d;
    task_.start_position = control_state().position;
    task_.start_yaw = quat_to_rpy(state_.orientation).z();
    task_.swing_duration = cfg_.gait.swing_duration;
  }

  void finish_jump(int jump) {
    const Vec3 target = task_.target_position();
    summary_.landing_errors[jump] =
        (state_.position.head<2>() - target.head<2>()).norm();
    const double yaw = quat_to_rpy(state_.orientation).z();
    summary_.yaw_progress[jump] = std::abs(wrap_angle(yaw - jump_start_yaw_));
  }

  void substep(const policy::ResidualAction& action, wbc::QpDiagnostics& diag) {
    const double t = step_count_ * cfg_.env.sim_dt;
    auto sched = gait::schedule_at(t, cfg_.gait.stance_duration,
                                   cfg_.gait.swing_duration);

    // cycle boundary: close out the previous jump, record the next task
    if (sched.cycle_index > jump_index_) {
      finish_jump(jump_index_);
      ++jump_index_;
      if (jump_index_ >= num_jumps()) {
        summary_.jumps_completed = num_jumps();
        summary_.success = true;
        done_ = true;
        return;
      }
      summary_.jumps_completed = jump_index_;
      record_task(jump_index_);
      jump_start_yaw_ = quat_to_rpy(state_.orientation).z();
    }

    const RigidBodyState ctrl = control_state();

    // swing targets
    if (prev_stance_ && !sched.stance)
      for (int i = 0; i < kNumLegs; ++i) liftoff_feet_[i] = state_.foot_positions[i];
    prev_stance_ = sched.stance;

    const auto v_lo = stance::liftoff_velocity(task_, cfg_.robot.gravity);
    const Vec3 v_des = cfg_.swing.raibert_vdes_is_liftoff
                           ? Vec3(v_lo.linear.x(), v_lo.linear.y(), 0.0)
                           : Vec3::Zero();
    std::array<Vec3, kNumLegs> swing_targets;
    const double yaw = quat_to_rpy(ctrl.orientation).z();
    const Mat3 Ryaw = Eigen::AngleAxisd(yaw, Vec3::UnitZ()).toRotationMatrix();
    for (int i = 0; i < kNumLegs; ++i) {
      if (sched.stance) {
        swing_targets[i] = landing_targets_[i];
        continue;
      }
      const Vec3 hip_w = ctrl.position + Ryaw * cfg_.robot.hip_offsets[i];
      Vec3 target = swing::raibert_target(ctrl.linear_velocity, v_des, hip_w,
                                          cfg_.swing.placement_time,
                                          cfg_.swing.raibert_gain);
      // keep the landing point reachable with the foot on the ground
      const Eigen::Vector2d off = target.head<2>() - hip_w.head<2>();
      if (off.norm() > cfg_.swing.max_planar_offset)
        target.head<2>() =
            hip_w.head<2>() + off * (cfg_.swing.max_planar_offset / off.norm());
      landing_targets_[i] = target;
      swing_targets[i] = swing::swing_path(liftoff_feet_[i], target,
                                           sched.phase_fraction,
                                           cfg_.swing.apex_height);
    }

    // stance command + residual
    stance::StanceCommand base;
    if (sched.stance && mode_ != Mode::PolicyOnly)
      base = stance::select_command(ctrl, task_, sched, cfg_.stance_accel,
                                    cfg_.env.sim_dt);
    stance::StanceCommand composed = base;
    if (mode_ != Mode::ControllerOnly) {
      composed = policy::compose(base, action, cfg_.stance_accel,
                                 cfg_.env.roll_pitch_max);
      if (!sched.stance && mode_ != Mode::PolicyOnly) {
        // in flight only the attitude / yaw channels are consumed
        composed.linear_acceleration.setZero();
      }
    }

    const auto wbc_cmd = wbc::assemble_command(composed, ctrl, swing_targets);
    const FootForces forces =
        wbc::distribute_forces(wbc_cmd, ctrl, cfg_.robot, cfg_.wbc, &diag);
    const auto mc = wbc::motor_command(wbc_cmd, forces, ctrl, cfg_.robot, cfg_.wbc);
    const auto tau = sim::actuator_torques(mc, state_, cfg_.robot);

    const auto res = sim::step(state_, tau, swing_targets, sched, cfg_.robot,
                               cfg_.env.sim_dt);
    state_ = res.state;
    ++step_count_;
    state_.time = step_count_ * cfg_.env.sim_dt;

    // estimator
    Vec3 accel_meas = res.linear_acceleration;
    if (cfg_.estimator.inject_noise) {
      std::normal_distribution<double> na(0.0, cfg_.estimator.sigma_accel);
      accel_meas += Vec3(na(rng_), na(rng_), na(rng_));
    }
    kf_ = est::predict(kf_, accel_meas, cfg_.env.sim_dt,
                       est::process_noise(cfg_.estimator.sigma_accel, cfg_.env.sim_dt));
    std::array<Vec3, kNumLegs> base_meas{};
    for (int i = 0; i < kNumLegs; ++i) {
      if (!state_.foot_in_contact[i]) continue;
      const Vec3 foot_body =
          state_.rotation().transpose() * (state_.foot_positions[i] - state_.position);
      Vec3 meas = state_.foot_positions[i] - state_.rotation() * foot_body;
      if (cfg_.estimator.inject_noise) {
        std::normal_distribution<double> nf(0.0, cfg_.estimator.sigma_foot);
        meas += Vec3(nf(rng_), nf(rng_), nf(rng_));
      }
      base_meas[i] = meas;
    }
    kf_ = est::update(kf_, base_meas, state_.foot_in_contact, cfg_.estimator.sigma_foot);

    // episode statistics
    bool any_contact = false;
    for (bool c : state_.foot_in_contact) any_contact |= c;
    if (!any_contact && jump_index_ < num_jumps())
      summary_.flight_times[jump_index_] += cfg_.env.sim_dt;
    const double yaw_rate = (state_.rotation() * state_.angular_velocity).z();
    summary_.peak_yaw_rate = std::max(summary_.peak_yaw_rate, std::abs(yaw_rate));

    const auto term = res.non_finite ? TerminationReason::NonFinite
                                     : check_termination(state_, cfg_.robot, cfg_.env);
    if (term != TerminationReason::None) {
      summary_.termination = term;
      done_ = true;
    }

    if (record_) {
      TrajectoryRow row;
      row.time = state_.time;
      row.state = state_;
      for (int i = 0; i < kNumLegs; ++i) row.total_force += res.applied_forces.forces[i];
      const Mat3 R = state_.rotation();
      for (int i = 0; i < kNumLegs; ++i)
        row.total_torque += (R.transpose() * (state_.foot_positions[i] - state_.position))
                                .cross(R.transpose() * res.applied_forces.forces[i]);
      row.reward = last_reward_;
      row.task_target = task_.target_position();
      row.estimator_pos_error = (kf_.position() - state_.position).norm();
      row.estimator_vel_error = (kf_.velocity() - state_.linear_velocity).norm();
      row.qp_iterations = diag.iterations;
      row.qp_residual = diag.kkt_residual;
      row.stance_roll_cmd = composed.roll;
      row.stance_pitch_cmd = composed.pitch;
      traj_.push_back(row);
    }
  }

  Config cfg_;
  Mode mode_;
  int n_substeps_ = 10;
  RigidBodyState state_;
  est::EstimatorState kf_;
  stance::JumpTask task_;
  int jump_index_ = 0;
  double jump_start_yaw_ = 0.0;
  double prev_yaw_ = 0.0;
  std::array<Vec3, kNumLegs> landing_targets_{};
  std::array<Vec3, kNumLegs> liftoff_feet_{};
  bool prev_stance_ = true;
  long step_count_ = 0;
  bool done_ = false;
  bool record_ = false;
  std::vector<TrajectoryRow> traj_;
  std::vector<policy::ObsVec> obs_log_;
  EpisodeSummary summary_;
  RewardTerms last_reward_;
  std::mt19937_64 rng_;
};

}  // namespace leap::env

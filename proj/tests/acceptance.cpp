// Acceptance gate: one pass/fail line per criterion, exit nonzero if any fail.
// Criteria 4 and 5 run real training and dominate the runtime; training stops
// as soon as the uplift target is met.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "helpers.hpp"
#include "leap/env.hpp"
#include "leap/io.hpp"
#include "leap/trainer.hpp"
#include "leap/wbc.hpp"

using namespace leap;

namespace {

int failures = 0;

void report(int criterion, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("%s criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---- criterion 1: lift-off velocity formula -------------------------------
void criterion_liftoff() {
  stance::JumpTask task;
  task.displacement = Vec3(0.7, -0.3, 1.0);
  const auto v = stance::liftoff_velocity(task);
  const bool pass = v.linear.z() == 0.5 * 9.81 * 0.5 && v.linear.x() == 0.7 / 0.5 &&
                    v.linear.y() == -0.3 / 0.5 && v.yaw_rate == 1.0 / 0.5;
  report(1, pass, "lift-off velocity formula is exact",
         "v_z=" + fmt(v.linear.z()) + " expected 2.4525");
}

// ---- criterion 2: ballistic fidelity --------------------------------------
void criterion_ballistic() {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.foot_in_contact.fill(false);
  s.linear_velocity = Vec3(0, 0, 2.4525);
  s.angular_velocity = Vec3(0.3, -0.2, 3.0);
  const Vec3 L0 = s.rotation() * (model.inertia * s.angular_velocity);
  std::array<Vec3, kNumLegs> targets;
  targets.fill(Vec3(0, 0, 0.2));
  const double z0 = s.position.z();
  const double dt = 0.002;
  double t_return = -1.0;
  const auto sched = gait::schedule_at(0.6);  // swing
  for (int i = 0; i < 400; ++i) {
    const double z_prev = s.position.z();
    s = sim::step(s, test::zero_torques(), targets, sched, model, dt).state;
    const double t = (i + 1) * dt;
    if (t > 0.1 && z_prev >= z0 && s.position.z() < z0 && t_return < 0)
      t_return = t;
  }
  const Vec3 L1 = s.rotation() * (model.inertia * s.angular_velocity);
  const double l_drift = (L1 - L0).norm() / L0.norm();
  const bool pass = std::abs(t_return - 0.5) <= 0.01 && l_drift < 1e-6;
  report(2, pass, "ballistic flight returns in 0.5 s, momentum conserved",
         "t_return=" + fmt(t_return) + " s, L drift=" + fmt(l_drift));
}

// ---- criterion 3: controller-only viability --------------------------------
void criterion_controller_only() {
  Config cfg;
  bool pass = true;
  double min_flight = 1e9;
  std::string term = "none";
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    env::JumpEnv e(cfg, env::Mode::ControllerOnly);
    const auto s = e.rollout(policy::PolicyParams{}, seed);
    if (!s.success || s.termination != env::TerminationReason::None) {
      pass = false;
      term = env::to_string(s.termination);
    }
    for (double ft : s.flight_times) min_flight = std::min(min_flight, ft);
  }
  pass = pass && min_flight >= 0.35;
  report(3, pass, "controller-only finishes 5-jump episodes over 5 seeds",
         "min flight=" + fmt(min_flight) + " s, termination=" + term);
}

// ---- criteria 4 and 5: training uplift and policy-only degeneracy ----------
void criteria_training() {
  Config cfg;
  cfg.ars.rollout_workers = train::resolve_workers(0);

  const auto rollouter =
      train::make_env_rollouter(cfg, env::Mode::ControllerPlusPolicy);
  train::ArsTrainer trainer(cfg.ars, rollouter);

  policy::PolicyParams params;
  const auto baseline_stats =
      trainer.evaluate(params, cfg.ars.eval_episodes, cfg.ars.seed * 7919);
  const double baseline = baseline_stats.mean_return;

  double best = baseline;
  int iters_used = 0;
  for (int it = 1; it <= cfg.ars.iterations; ++it) {
    trainer.iterate(params);
    iters_used = it;
    if (it % cfg.ars.eval_interval == 0 || it == cfg.ars.iterations) {
      const auto es = trainer.evaluate(params, cfg.ars.eval_episodes,
                                       cfg.ars.seed * 7919 + it);
      best = std::max(best, es.mean_return);
      if (es.mean_return >= 1.1 * baseline) break;  // uplift reached
    }
  }
  const bool uplift = best >= 1.1 * baseline;

  // policy-only ablation trained for the same number of iterations
  const auto ablation_rollouter =
      train::make_env_rollouter(cfg, env::Mode::PolicyOnly);
  train::ArsTrainer ablation(cfg.ars, ablation_rollouter);
  policy::PolicyParams ablation_params;
  for (int it = 1; it <= iters_used; ++it) ablation.iterate(ablation_params);
  const auto ab_stats = ablation.evaluate(ablation_params, cfg.ars.eval_episodes,
                                          cfg.ars.seed * 7919 + 1000000);
  const auto final_stats = trainer.evaluate(params, cfg.ars.eval_episodes,
                                            cfg.ars.seed * 7919 + 1000000);

  const bool beats_ablation = final_stats.mean_return > ab_stats.mean_return;
  report(4, uplift && beats_ablation,
         "ARS improves >=10% over controller-only and beats policy-only",
         "baseline=" + fmt(baseline) + ", best=" + fmt(best) + " (" +
             fmt(iters_used) + " iters), ablation=" + fmt(ab_stats.mean_return));

  double mean_flight = 0.0;
  int n_flight = 0;
  for (double ft : ab_stats.mean_flight_times) {
    mean_flight += ft;
    ++n_flight;
  }
  if (n_flight > 0) mean_flight /= n_flight;
  const bool degenerate =
      mean_flight < 0.1 || ab_stats.mean_return < baseline;
  report(5, degenerate, "policy-only ablation degenerates",
         "mean flight=" + fmt(mean_flight) + " s, return=" +
             fmt(ab_stats.mean_return) + " vs baseline=" + fmt(baseline));
}

// ---- criterion 6: jump-turn ------------------------------------------------
void criterion_jump_turn() {
  Config cfg;
  cfg.env.jump_sequence = {Vec3(0, 0, M_PI / 2), Vec3(0, 0, M_PI / 2),
                           Vec3(0, 0, M_PI / 2)};
  env::JumpEnv e(cfg, env::Mode::ControllerOnly);
  const auto s = e.rollout(policy::PolicyParams{}, 0);
  double mean_yaw = 0.0;
  for (double y : s.yaw_progress) mean_yaw += y;
  mean_yaw /= std::max<size_t>(s.yaw_progress.size(), 1);
  const bool pass = s.termination == env::TerminationReason::None &&
                    s.peak_yaw_rate >= 2.4 && s.peak_yaw_rate <= 4.6 &&
                    mean_yaw >= 60.0 * M_PI / 180.0;
  report(6, pass, "90-degree jump-turns hit the target yaw-rate band",
         "peak yaw rate=" + fmt(s.peak_yaw_rate) + " rad/s, mean progress=" +
             fmt(mean_yaw * 180.0 / M_PI) + " deg");
}

// ---- criterion 7: omni-directional jumps ------------------------------------
void criterion_omni() {
  bool pass = true;
  double worst = 0.0;
  double fwd_err = 0.0, back_err = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double ang = 2.0 * M_PI * k / 8.0;
    Config cfg;
    cfg.env.jump_sequence = {Vec3(0.3 * std::cos(ang), 0.3 * std::sin(ang), 0)};
    env::JumpEnv e(cfg, env::Mode::ControllerOnly);
    const auto s = e.rollout(policy::PolicyParams{}, 0);
    const double err = s.landing_errors.empty() ? 1e9 : s.landing_errors[0];
    worst = std::max(worst, err);
    if (!s.success || err >= 0.15) pass = false;
    if (k == 0) fwd_err = err;
    if (k == 4) back_err = err;
  }
  report(7, pass, "8-direction 0.3 m jumps land within half the distance",
         "worst error=" + fmt(worst) + " m, fwd=" + fmt(fwd_err) + ", back=" +
             fmt(back_err));
}

// ---- criterion 8: WBC correctness -------------------------------------------
void criterion_wbc() {
  RobotModel model;
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_rel = 0.0;
  bool constraints_ok = true;
  for (int trial = 0; trial < 1000; ++trial) {
    auto s = test::standing_state(model, 0.23 + 0.06 * std::abs(u(rng)));
    s.angular_velocity = Vec3(0.5 * u(rng), 0.5 * u(rng), u(rng));
    const Mat3 R = s.rotation();
    Vec6 w_star = Vec6::Zero();
    for (int i = 0; i < kNumLegs; ++i) {
      const double fz = 25.0 + 30.0 * std::abs(u(rng));
      const Vec3 f(0.5 * model.friction_coefficient * fz * u(rng),
                   0.5 * model.friction_coefficient * fz * u(rng), fz);
      w_star.head<3>() += f;
      const Vec3 r_body = R.transpose() * (s.foot_positions[i] - s.position);
      w_star.tail<3>() += r_body.cross(R.transpose() * f);
    }
    wbc::WbcCommand cmd;
    cmd.base_velocity_des.tail<3>() = s.angular_velocity;
    cmd.base_accel_des.head<3>() = w_star.head<3>() / model.mass + model.gravity_vec();
    cmd.base_accel_des.tail<3>() = model.inertia.ldlt().solve(
        w_star.tail<3>() - s.angular_velocity.cross(model.inertia * s.angular_velocity));
    const auto ff = wbc::distribute_forces(cmd, s, model);
    Vec6 w = Vec6::Zero();
    for (int i = 0; i < kNumLegs; ++i) {
      const Vec3& f = ff.forces[i];
      if (f.z() < -1e-12 || f.z() > model.max_normal_force_per_foot + 1e-12 ||
          std::abs(f.x()) > model.friction_coefficient * f.z() + 1e-9 ||
          std::abs(f.y()) > model.friction_coefficient * f.z() + 1e-9)
        constraints_ok = false;
      w.head<3>() += f;
      const Vec3 r_body = R.transpose() * (s.foot_positions[i] - s.position);
      w.tail<3>() += r_body.cross(R.transpose() * f);
    }
    worst_rel = std::max(worst_rel, (w - w_star).norm() / w_star.norm());
  }

  const auto s = test::standing_state(model);
  const auto hover = wbc::distribute_forces(wbc::WbcCommand{}, s, model);
  double hover_err = 0.0;
  for (int i = 0; i < kNumLegs; ++i)
    hover_err = std::max(hover_err, (hover.forces[i] - Vec3(0, 0, 36.7875)).norm());

  const bool pass = worst_rel < 1e-6 && constraints_ok && hover_err < 1e-3;
  report(8, pass, "force QP reproduces feasible wrenches and the hover split",
         "worst rel wrench err=" + fmt(worst_rel) + ", hover err=" + fmt(hover_err) +
             " N");
}

// ---- criterion 9: kinematics suite ------------------------------------------
void criterion_kinematics() {
  LegGeometry geo;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst_rt = 0.0, worst_jac = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double side = trial % 2 == 0 ? 1.0 : -1.0;
    kin::JointAngles ja;
    ja.q = Vec3(0.6 * u(rng), 0.9 * u(rng), -0.3 - 1.2 * std::abs(u(rng)));
    const Vec3 p = kin::forward(ja, geo, side);
    const auto back = kin::inverse(p, geo, side);
    if (!back) {
      worst_rt = 1e9;
      continue;
    }
    worst_rt = std::max(worst_rt, (kin::forward(*back, geo, side) - p).norm());
    const Mat3 J = kin::jacobian(ja, geo, side);
    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      kin::JointAngles jp = ja, jm = ja;
      jp.q[k] += h;
      jm.q[k] -= h;
      const Vec3 col = (kin::forward(jp, geo, side) - kin::forward(jm, geo, side)) /
                       (2.0 * h);
      worst_jac = std::max(worst_jac, (col - J.col(k)).lpNorm<Eigen::Infinity>());
    }
  }
  const bool pass = worst_rt < 1e-9 && worst_jac < 1e-5;
  report(9, pass, "kinematics roundtrip and Jacobian checks",
         "roundtrip=" + fmt(worst_rt) + " m, jacobian err=" + fmt(worst_jac));
}

// ---- criterion 10: reward oracle --------------------------------------------
void criterion_reward() {
  RobotModel model;
  EnvConfig ecfg;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    RigidBodyState s;
    s.position = Vec3(2 * u(rng), 2 * u(rng), 0.1 + 0.3 * std::abs(u(rng)));
    s.orientation = rpy_to_quat(Vec3(0.4 * u(rng), 0.4 * u(rng), 3 * u(rng)));
    for (int i = 0; i < kNumLegs; ++i) s.foot_in_contact[i] = u(rng) > 0;
    stance::JumpTask task;
    task.displacement = Vec3(u(rng), u(rng), u(rng));
    task.start_position = Vec3(u(rng), u(rng), 0);
    task.start_yaw = 2 * u(rng);
    const auto sched = gait::schedule_at(std::abs(u(rng)) * 2.0);
    const auto r = env::compute_reward(s, task, sched, s.foot_in_contact, ecfg);

    const double cy = std::cos(task.start_yaw), sy = std::sin(task.start_yaw);
    const double tx = task.start_position.x() + cy * task.displacement.x() -
                      sy * task.displacement.y();
    const double ty = task.start_position.y() + sy * task.displacement.x() +
                      cy * task.displacement.y();
    const double d = std::max(std::hypot(task.displacement.x(), task.displacement.y()),
                              0.1);
    const Vec3 rpy = quat_to_rpy(s.orientation);
    double mismatch = 0.0;
    for (int i = 0; i < kNumLegs; ++i)
      if (s.foot_in_contact[i] != sched.desired_contact[i]) mismatch += 1.0;
    const double expected =
        4.0 +
        1.0 * (-((s.position.x() - tx) * (s.position.x() - tx) +
                 (s.position.y() - ty) * (s.position.y() - ty)) /
               (d * d)) +
        5.0 * (-(rpy.x() * rpy.x() + rpy.y() * rpy.y())) + 0.4 * (-mismatch);
    worst = std::max(worst, std::abs(r.total - expected));
  }
  // upright at target with matched contacts scores exactly the alive bonus
  RobotModel m2;
  const auto s2 = test::standing_state(m2);
  stance::JumpTask t2;
  t2.start_position = s2.position;
  const auto r2 = env::compute_reward(s2, t2, gait::schedule_at(0.0),
                                      s2.foot_in_contact, ecfg);
  const bool pass = worst < 1e-12 && r2.total == 4.0;
  report(10, pass, "reward matches the straight-line oracle",
         "worst err=" + fmt(worst) + ", upright tick=" + fmt(r2.total));
}

// ---- criterion 11: performance ----------------------------------------------
void criterion_performance() {
  Config cfg;
  env::JumpEnv e(cfg, env::Mode::ControllerOnly);
  e.reset(0);
  std::vector<double> tick_ms;
  const auto t0 = std::chrono::steady_clock::now();
  double sim_time = 0.0;
  while (!e.done()) {
    const auto a = std::chrono::steady_clock::now();
    e.step({});
    const auto b = std::chrono::steady_clock::now();
    tick_ms.push_back(std::chrono::duration<double, std::milli>(b - a).count());
    sim_time += cfg.env.control_dt;
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::sort(tick_ms.begin(), tick_ms.end());
  const double p99 = tick_ms[static_cast<size_t>(0.99 * (tick_ms.size() - 1))];
  const double rt_factor = sim_time / wall;
  const bool pass = p99 < 2.0 && rt_factor >= 10.0;
  report(11, pass, "p99 control tick < 2 ms and >= 10x real time",
         "p99=" + fmt(p99) + " ms, realtime factor=" + fmt(rt_factor) + "x");
}

// ---- criterion 12: determinism across worker counts --------------------------
void criterion_determinism() {
  Config cfg;
  cfg.env.jump_sequence = {Vec3(0, 0, 0), Vec3(0.3, 0, 0)};
  cfg.ars.num_directions = 8;
  cfg.ars.top_directions = 4;
  cfg.ars.iterations = 3;
  cfg.ars.eval_interval = 1;
  cfg.ars.eval_episodes = 3;
  cfg.ars.seed = 9;

  auto run = [&](int workers) {
    cfg.ars.rollout_workers = workers;
    train::ArsTrainer trainer(
        cfg.ars, train::make_env_rollouter(cfg, env::Mode::ControllerPlusPolicy));
    policy::PolicyParams p;
    const auto curve = trainer.train(p);
    env::JumpEnv e(cfg, env::Mode::ControllerPlusPolicy);
    e.set_record_trajectory(true);
    e.rollout(p, 77);
    return std::make_tuple(p.flatten(), curve, e.trajectory());
  };
  const auto [w1, c1, t1] = run(1);
  const auto [w16, c16, t16] = run(16);
  bool pass = (w1 - w16).lpNorm<Eigen::Infinity>() == 0.0 && c1.size() == c16.size() &&
              t1.size() == t16.size();
  if (pass)
    for (size_t i = 0; i < c1.size(); ++i)
      pass = pass && c1[i].mean_return == c16[i].mean_return &&
             c1[i].std_return == c16[i].std_return;
  if (pass)
    for (size_t i = 0; i < t1.size(); ++i)
      pass = pass && (t1[i].state.position - t16[i].state.position).norm() == 0.0 &&
             t1[i].reward.total == t16[i].reward.total;
  report(12, pass, "1 vs 16 workers reproduce curves and trajectories",
         pass ? "bit-identical" : "mismatch");
}

}  // namespace

int main() {
  criterion_liftoff();
  criterion_ballistic();
  criterion_controller_only();
  criterion_jump_turn();
  criterion_omni();
  criterion_wbc();
  criterion_kinematics();
  criterion_reward();
  criterion_performance();
  criterion_determinism();
  criteria_training();  // slowest last
  std::printf("%s: %d criterion failure(s)\n", failures == 0 ? "OK" : "GATE FAILED",
              failures);
  return failures == 0 ? 0 : 1;
}

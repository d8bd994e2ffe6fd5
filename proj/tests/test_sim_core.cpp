#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "helpers.hpp"
#include "leap/sim_core.hpp"

using namespace leap;
using namespace leap::sim;

namespace {
gait::LegSchedule all_stance() {
  auto s = gait::schedule_at(0.0);
  return s;
}
gait::LegSchedule all_swing() { return gait::schedule_at(0.6); }
}  // namespace

TEST_CASE("friction projection") {
  CHECK((project_friction(Vec3(0, 0, 100), 0.6) - Vec3(0, 0, 100)).norm() == 0.0);
  CHECK((project_friction(Vec3(80, 0, 100), 0.6) - Vec3(60, 0, 100)).norm() == 0.0);
  CHECK((project_friction(Vec3(10, 10, -5), 0.6) - Vec3::Zero()).norm() == 0.0);
  CHECK(project_friction(Vec3(0, 0, 900), 0.6, 500.0).z() == 500.0);
}

TEST_CASE("zero torques give zero forces") {
  RobotModel model;
  const auto s = test::standing_state(model);
  const auto ff = torques_to_foot_forces(test::zero_torques(), s, model);
  for (int i = 0; i < kNumLegs; ++i) CHECK(ff.forces[i].norm() == 0.0);
}

TEST_CASE("statics identity: J^T of quarter-weight recovers the force") {
  RobotModel model;
  const auto s = test::standing_state(model);
  const double fz = model.mass * model.gravity / 4.0;  // 36.7875 N
  std::array<Vec3, kNumLegs> forces;
  forces.fill(Vec3(0, 0, fz));
  const auto tau = test::torques_for_forces(s, model, forces);
  const auto ff = torques_to_foot_forces(tau, s, model);
  double total = 0.0;
  for (int i = 0; i < kNumLegs; ++i) {
    CHECK((ff.forces[i] - Vec3(0, 0, fz)).norm() < 1e-9);
    total += ff.forces[i].z();
  }
  CHECK(total == Catch::Approx(147.15).margin(1e-9));
}

TEST_CASE("torque/force roundtrip at random configurations") {
  RobotModel model;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = test::standing_state(model, 0.22 + 0.1 * std::abs(u(rng)));
    for (int i = 0; i < kNumLegs; ++i) {
      s.foot_positions[i].x() += 0.05 * u(rng);
      s.foot_positions[i].y() += 0.03 * u(rng);
    }
    std::array<Vec3, kNumLegs> forces;
    for (auto& f : forces) f = Vec3(20 * u(rng), 20 * u(rng), 50 + 30 * u(rng));
    const auto tau = test::torques_for_forces(s, model, forces);
    const auto ff = torques_to_foot_forces(tau, s, model);
    for (int i = 0; i < kNumLegs; ++i) REQUIRE((ff.forces[i] - forces[i]).norm() < 1e-9);
  }
}

TEST_CASE("near-singular leg yields zero force and a flag") {
  RobotModel model;
  auto s = test::standing_state(model);
  // straight leg: foot at full extension under the hip
  s.foot_positions[0] = s.position + model.hip_offsets[0] +
                        Vec3(0, model.leg.abduction_offset, -0.426);
  std::array<Vec3, kNumLegs> tau{};
  tau[0] = Vec3(1.0, 1.0, 1.0);
  const auto ff = torques_to_foot_forces(tau, s, model);
  CHECK(ff.singular[0]);
  CHECK(ff.forces[0].norm() == 0.0);
}

TEST_CASE("ballistic arc in flight") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.foot_in_contact.fill(false);
  const double z0 = s.position.z();
  s.linear_velocity = Vec3(0, 0, 2.4525);
  std::array<Vec3, kNumLegs> targets;
  targets.fill(Vec3(0, 0, 0.05));
  const double dt = 0.002;
  double apex = z0;
  RigidBodyState at_half;
  for (int i = 0; i < 250; ++i) {
    s = step(s, test::zero_torques(), targets, all_swing(), model, dt).state;
    apex = std::max(apex, s.position.z());
    if (i == 124) at_half = s;
  }
  CHECK(apex - z0 == Catch::Approx(0.3066).margin(0.004));
  CHECK(at_half.position.z() - z0 == Catch::Approx(0.3066).margin(0.004));
  CHECK(s.position.z() == Catch::Approx(z0).margin(0.01 * 0.3066 + 0.003));
  CHECK(std::abs(s.linear_velocity.z() + 2.4525) < 0.02);
}

TEST_CASE("torque-free flight conserves world angular momentum") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.foot_in_contact.fill(false);
  s.angular_velocity = Vec3(0, 0, 3.5);
  std::array<Vec3, kNumLegs> targets;
  targets.fill(Vec3(0, 0, 0.2));
  const Vec3 L0 = s.rotation() * (model.inertia * s.angular_velocity);
  for (int i = 0; i < 250; ++i) s = step(s, test::zero_torques(), targets, all_swing(), model, 0.002).state;
  const Vec3 L1 = s.rotation() * (model.inertia * s.angular_velocity);
  CHECK((L1 - L0).norm() / L0.norm() < 1e-6);
}

TEST_CASE("static stand under exact quarter-weight forces") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  std::array<Vec3, kNumLegs> forces;
  forces.fill(Vec3(0, 0, model.mass * model.gravity / 4.0));
  for (int i = 0; i < 100; ++i) {
    const auto tau = test::torques_for_forces(s, model, forces);
    s = step(s, tau, test::stance_hold_targets(s), all_stance(), model, 0.002).state;
    REQUIRE(s.linear_velocity.norm() < 1e-9);
  }
  CHECK((s.position - Vec3(0, 0, 0.27)).norm() < 1e-9);
}

TEST_CASE("pinned feet do not move") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  const auto feet0 = s.foot_positions;
  std::array<Vec3, kNumLegs> forces;
  forces.fill(Vec3(3, -2, 40.0));
  for (int i = 0; i < 50; ++i) {
    const auto tau = test::torques_for_forces(s, model, forces);
    s = step(s, tau, test::stance_hold_targets(s), all_stance(), model, 0.002).state;
    for (int k = 0; k < kNumLegs; ++k)
      REQUIRE((s.foot_positions[k] - feet0[k]).norm() < 1e-12);
  }
}

TEST_CASE("quaternion stays normalized") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.foot_in_contact.fill(false);
  s.angular_velocity = Vec3(1.0, 2.0, -3.0);
  std::array<Vec3, kNumLegs> targets;
  targets.fill(Vec3(0, 0, 0.2));
  for (int i = 0; i < 500; ++i) {
    s = step(s, test::zero_torques(), targets, all_swing(), model, 0.002).state;
    REQUIRE(std::abs(s.orientation.norm() - 1.0) < 1e-9);
  }
}

TEST_CASE("step is deterministic") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  std::array<Vec3, kNumLegs> forces;
  forces.fill(Vec3(1, 2, 30));
  const auto tau = test::torques_for_forces(s, model, forces);
  const auto a = step(s, tau, test::stance_hold_targets(s), all_stance(), model, 0.002);
  const auto b = step(s, tau, test::stance_hold_targets(s), all_stance(), model, 0.002);
  CHECK(a.state.position == b.state.position);
  CHECK(a.state.linear_velocity == b.state.linear_velocity);
  CHECK(a.state.orientation.coeffs() == b.state.orientation.coeffs());
}

TEST_CASE("touchdown pins a foot within tolerance of the ground") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.foot_in_contact.fill(false);
  std::array<Vec3, kNumLegs> targets = s.foot_positions;
  for (auto& t : targets) t.z() = 0.005;  // within touchdown_tolerance
  const auto res = step(s, test::zero_torques(), targets, all_stance(), model, 0.002);
  for (int i = 0; i < kNumLegs; ++i) {
    CHECK(res.state.foot_in_contact[i]);
    CHECK(res.state.foot_positions[i].z() == 0.0);
  }
}

TEST_CASE("late touchdown leaves unreachable feet in swing") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model, 0.6);  // base too high
  s.foot_in_contact.fill(false);
  std::array<Vec3, kNumLegs> targets;
  for (int i = 0; i < kNumLegs; ++i) {
    targets[i] = s.position + model.hip_offsets[i];
    targets[i].z() = 0.0;
  }
  const auto res = step(s, test::zero_torques(), targets, all_stance(), model, 0.002);
  for (int i = 0; i < kNumLegs; ++i) CHECK_FALSE(res.state.foot_in_contact[i]);
}

TEST_CASE("early touchdown pins a penetrating swing foot") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.foot_in_contact.fill(false);
  std::array<Vec3, kNumLegs> targets = s.foot_positions;
  targets[2].z() = -0.05;
  const auto res = step(s, test::zero_torques(), targets, all_swing(), model, 0.002);
  CHECK(res.state.foot_in_contact[2]);
  CHECK(res.state.foot_positions[2].z() == 0.0);
  CHECK_FALSE(res.state.foot_in_contact[0]);
}

TEST_CASE("swing targets are clipped to leg reach") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.foot_in_contact.fill(false);
  std::array<Vec3, kNumLegs> targets;
  targets.fill(Vec3(5, 5, 3));
  const auto res = step(s, test::zero_torques(), targets, all_swing(), model, 0.002);
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3 hip = res.state.position +
                     res.state.rotation() * model.hip_offsets[i];
    CHECK((res.state.foot_positions[i] - hip).norm() <= model.leg_reach + 1e-9);
  }
}

TEST_CASE("non-finite state is flagged") {
  RobotModel model;
  RigidBodyState s = test::standing_state(model);
  s.linear_velocity = Vec3(std::numeric_limits<double>::quiet_NaN(), 0, 0);
  s.foot_in_contact.fill(false);
  std::array<Vec3, kNumLegs> targets;
  targets.fill(Vec3(0, 0, 0.2));
  const auto res = step(s, test::zero_torques(), targets, all_swing(), model, 0.002);
  CHECK(res.non_finite);
}

#pragma once

#include "leap/config.hpp"
#include "leap/sim_core.hpp"
#include "leap/types.hpp"

namespace leap::test {

inline RigidBodyState standing_state(const RobotModel& model, double height = 0.27) {
  RigidBodyState s;
  s.position = Vec3(0, 0, height);
  for (int i = 0; i < kNumLegs; ++i) {
    const Vec3 hip = s.position + model.hip_offsets[i];
    s.foot_positions[i] =
        Vec3(hip.x(), hip.y() + leg_side_sign(i) * model.leg.abduction_offset, 0.0);
    s.foot_in_contact[i] = true;
  }
  return s;
}

inline std::array<Vec3, kNumLegs> stance_hold_targets(const RigidBodyState& s) {
  return s.foot_positions;
}

// brace-initializing an array of Eigen vectors leaves them uninitialized, so
// zero torques need an explicit fill
inline std::array<Vec3, kNumLegs> zero_torques() {
  std::array<Vec3, kNumLegs> t;
  for (auto& v : t) v.setZero();
  return t;
}

// Joint torques realizing the given world-frame foot forces at the current
// configuration (tau = J^T (-R^T f)).
inline std::array<Vec3, kNumLegs> torques_for_forces(
    const RigidBodyState& s, const RobotModel& model,
    const std::array<Vec3, kNumLegs>& forces) {
  std::array<Vec3, kNumLegs> tau{};
  const Mat3 R = s.rotation();
  for (int i = 0; i < kNumLegs; ++i) {
    const auto ls = sim::leg_state(s, model, i);
    const Mat3 J = kin::jacobian(ls.angles, model.leg, leg_side_sign(i));
    tau[i] = J.transpose() * (-R.transpose() * forces[i]);
  }
  return tau;
}

}  // namespace leap::test

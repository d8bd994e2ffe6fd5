#pragma once

#include "leap/leg_kinematics.hpp"
#include "leap/types.hpp"

// Swing-leg control: Raibert-heuristic landing targets and a smooth foot
// path between lift-off and touchdown.

namespace leap::swing {

struct SwingConfig {
  double raibert_gain = 0.03;  // s
  double apex_height = 0.05;   // m
  // feed the lift-off planar velocity (true) or zero (false) as the desired
  // velocity in the Raibert feedback term
  bool raibert_vdes_is_liftoff = true;
  // planar clamp on the landing offset from the hip ground projection; keeps
  // touchdown targets on the ground within leg reach at landing height
  double max_planar_offset = 0.22;  // m
  // effective braking horizon fed to the landing-target heuristic; the
  // touchdown crash absorption stops the body in roughly 0.2 s, so placing
  // the feet half that horizon ahead puts the support center where the body
  // actually comes to rest
  double placement_time = 0.2;  // s
};

// Landing target on the ground plane: neutral point under the hip plus
// stance-time and velocity-error terms.  Caller clips to the leg workspace.
inline Vec3 raibert_target(const Vec3& com_velocity, const Vec3& desired_velocity,
                           const Vec3& hip_world, double stance_duration,
                           double gain) {
  Vec3 target = hip_world;
  target.z() = 0.0;
  const Vec3 v = Vec3(com_velocity.x(), com_velocity.y(), 0.0);
  const Vec3 vd = Vec3(desired_velocity.x(), desired_velocity.y(), 0.0);
  target += 0.5 * stance_duration * v + gain * (v - vd);
  return target;
}

// Horizontal: cubic blend with zero end velocities.  Vertical: parabolic
// bump of height apex_height over the chord, peaking at phase 0.5.
// path(0) = start and path(1) = target exactly.
inline Vec3 swing_path(const Vec3& start, const Vec3& target, double phase,
                       double apex_height) {
  phase = std::clamp(phase, 0.0, 1.0);
  const double s = phase * phase * (3.0 - 2.0 * phase);
  Vec3 p = (1.0 - s) * start + s * target;
  p.z() += apex_height * 4.0 * phase * (1.0 - phase);
  return p;
}

}  // namespace leap::swing

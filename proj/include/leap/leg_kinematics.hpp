#pragma once

#include <optional>

#include "leap/types.hpp"

// Analytic kinematics for the 3-DoF (abduction, hip pitch, knee) leg.
// All positions are in the hip frame (axes parallel to the body frame,
// origin at the hip joint).  Convention: q = 0 puts the leg straight down,
// foot at (0, s*abduction_offset, -(thigh+calf)), s = +1 left / -1 right.
// Knee bends backward: knee angle in (-pi, 0].

namespace leap::kin {

struct JointAngles {
  Vec3 q = Vec3::Zero();  // abduction, hip pitch, knee
};

inline Vec3 forward(const JointAngles& ja, const LegGeometry& geo, double side) {
  const double q0 = ja.q[0], q1 = ja.q[1], q2 = ja.q[2];
  const double t = geo.thigh_length, c = geo.calf_length;
  const double xp = -t * std::sin(q1) - c * std::sin(q1 + q2);
  const double zp = -t * std::cos(q1) - c * std::cos(q1 + q2);
  const double yo = side * geo.abduction_offset;
  const double s0 = std::sin(q0), c0 = std::cos(q0);
  return Vec3(xp, yo * c0 - zp * s0, yo * s0 + zp * c0);
}

// Knee-backward branch only.  Returns nullopt when p is outside the
// reachable annulus (caller clips and retries).
inline std::optional<JointAngles> inverse(const Vec3& p, const LegGeometry& geo,
                                          double side) {
  const double t = geo.thigh_length, c = geo.calf_length;
  const double off = side * geo.abduction_offset;
  const double ryz2 = p.y() * p.y() + p.z() * p.z();
  if (ryz2 < off * off) return std::nullopt;
  const double zp = -std::sqrt(ryz2 - off * off);
  const double q0 = std::atan2(p.z(), p.y()) - std::atan2(zp, off);
  const double xp = p.x();
  const double r2 = xp * xp + zp * zp;
  const double D = (r2 - t * t - c * c) / (2.0 * t * c);
  if (D < -1.0 - 1e-12 || D > 1.0 + 1e-12) return std::nullopt;
  const double q2 = -std::acos(std::clamp(D, -1.0, 1.0));
  const double q1 = std::atan2(-xp, -zp) -
                    std::atan2(c * std::sin(q2), t + c * std::cos(q2));
  JointAngles ja;
  ja.q = Vec3(wrap_angle(q0), wrap_angle(q1), q2);
  return ja;
}

inline Mat3 jacobian(const JointAngles& ja, const LegGeometry& geo, double side) {
  const double q0 = ja.q[0], q1 = ja.q[1], q2 = ja.q[2];
  const double t = geo.thigh_length, c = geo.calf_length;
  const double s0 = std::sin(q0), c0 = std::cos(q0);
  const double s1 = std::sin(q1), c1 = std::cos(q1);
  const double s12 = std::sin(q1 + q2), c12 = std::cos(q1 + q2);
  const double yo = side * geo.abduction_offset;
  const double zp = -t * c1 - c * c12;
  const double dzp_dq1 = t * s1 + c * s12;
  const double dzp_dq2 = c * s12;
  Mat3 J;
  J(0, 0) = 0.0;
  J(0, 1) = -t * c1 - c * c12;
  J(0, 2) = -c * c12;
  J(1, 0) = -yo * s0 - zp * c0;
  J(1, 1) = -s0 * dzp_dq1;
  J(1, 2) = -s0 * dzp_dq2;
  J(2, 0) = yo * c0 - zp * s0;
  J(2, 1) = c0 * dzp_dq1;
  J(2, 2) = c0 * dzp_dq2;
  return J;
}

// Pulls p onto the reachable workspace: lateral offset cylinder and the
// two-link annulus, with a small margin off the straight-leg singularity.
inline Vec3 clip_to_workspace(const Vec3& p, const LegGeometry& geo, double side,
                              double singularity_margin = 1e-3) {
  const double t = geo.thigh_length, c = geo.calf_length;
  const double off = geo.abduction_offset;
  Vec3 out = p;
  double ryz = std::hypot(out.y(), out.z());
  if (ryz < off + 1e-6) {
    // push straight down in the leg plane
    out.y() = side * off;
    out.z() = std::min(out.z(), -1e-3);
    ryz = std::hypot(out.y(), out.z());
  }
  const double zp = std::sqrt(ryz * ryz - off * off);
  const double r = std::hypot(out.x(), zp);
  const double r_max = t + c - singularity_margin;
  const double r_min = std::abs(t - c) + singularity_margin;
  double scale = 1.0;
  if (r > r_max) scale = r_max / r;
  else if (r < r_min) scale = r_min / std::max(r, 1e-9);
  if (scale != 1.0) {
    // scale in-plane distance, keep abduction offset
    const double zp_new = zp * scale;
    out.x() *= scale;
    const double ryz_new = std::sqrt(zp_new * zp_new + off * off);
    out.y() *= ryz_new / ryz;
    out.z() *= ryz_new / ryz;
  }
  return out;
}

inline std::optional<JointAngles> inverse_clipped(const Vec3& p, const LegGeometry& geo,
                                                  double side, bool* clipped = nullptr) {
  if (auto ja = inverse(p, geo, side)) {
    if (clipped) *clipped = false;
    return ja;
  }
  if (clipped) *clipped = true;
  return inverse(clip_to_workspace(p, geo, side), geo, side);
}

// Damped least-squares joint velocity for a desired hip-frame foot velocity.
inline Vec3 joint_velocity(const JointAngles& ja, const Vec3& foot_vel,
                           const LegGeometry& geo, double side,
                           double dls_lambda = 1e-4) {
  const Mat3 J = jacobian(ja, geo, side);
  const Mat3 JJt = J * J.transpose() + dls_lambda * Mat3::Identity();
  return J.transpose() * JJt.ldlt().solve(foot_vel);
}

}  // namespace leap::kin

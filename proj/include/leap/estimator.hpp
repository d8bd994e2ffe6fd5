#pragma once

#include "leap/types.hpp"

// Kalman filter over base position and linear velocity.  Prediction uses the
// (gravity-compensated) accelerometer as a control input; updates come from
// stance-foot kinematic pseudo-measurements of the base position.
// Orientation and angular velocity are taken as directly measured.

namespace leap::est {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

struct EstimatorState {
  Vec6 mean = Vec6::Zero();  // position, velocity
  Mat6 covariance = Mat6::Identity() * 1e-4;

  Vec3 position() const { return mean.head<3>(); }
  Vec3 velocity() const { return mean.tail<3>(); }
};

struct EstimatorConfig {
  double sigma_accel = 0.1;  // m/s^2
  double sigma_foot = 0.01;  // m
  bool inject_noise = false;
};

// White-noise-acceleration process noise for step dt.
inline Mat6 process_noise(double sigma_accel, double dt) {
  Mat6 Q = Mat6::Zero();
  const double s2 = sigma_accel * sigma_accel;
  Q.topLeftCorner<3, 3>() = Mat3::Identity() * (0.25 * dt * dt * dt * dt * s2);
  Q.topRightCorner<3, 3>() = Mat3::Identity() * (0.5 * dt * dt * dt * s2);
  Q.bottomLeftCorner<3, 3>() = Q.topRightCorner<3, 3>();
  Q.bottomRightCorner<3, 3>() = Mat3::Identity() * (dt * dt * s2);
  return Q;
}

inline void symmetrize(Mat6& P) { P = 0.5 * (P + P.transpose()).eval(); }

// accel_world is the kinematic base acceleration in the world frame
// (gravity already folded in: free fall reads (0,0,-g)).
inline EstimatorState predict(const EstimatorState& est, const Vec3& accel_world,
                              double dt, const Mat6& Q) {
  EstimatorState out;
  out.mean.head<3>() = est.position() + dt * est.velocity() + 0.5 * dt * dt * accel_world;
  out.mean.tail<3>() = est.velocity() + dt * accel_world;
  Mat6 F = Mat6::Identity();
  F.topRightCorner<3, 3>() = Mat3::Identity() * dt;
  out.covariance = F * est.covariance * F.transpose() + Q;
  symmetrize(out.covariance);
  return out;
}

// Each contact foot contributes a base-position pseudo-measurement
// p_base = foot_world - R * foot_body (computed by the caller).  With no
// contacts the estimate passes through unchanged.
inline EstimatorState update(const EstimatorState& est,
                             const std::array<Vec3, kNumLegs>& base_pos_meas,
                             const std::array<bool, kNumLegs>& contacts,
                             double sigma_foot) {
  EstimatorState out = est;
  const double r = sigma_foot * sigma_foot;
  for (int i = 0; i < kNumLegs; ++i) {
    if (!contacts[i]) continue;
    // H = [I 0]; sequential scalar-block update
    const Mat3 S = out.covariance.topLeftCorner<3, 3>() + Mat3::Identity() * r;
    const Eigen::Matrix<double, 6, 3> K =
        out.covariance.leftCols<3>() * S.inverse();
    out.mean += K * (base_pos_meas[i] - out.position());
    out.covariance = (Mat6::Identity() - K * Eigen::Matrix<double, 3, 6>::Identity().eval()) *
                     out.covariance;
    symmetrize(out.covariance);
  }
  return out;
}

}  // namespace leap::est

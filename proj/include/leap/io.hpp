#pragma once

#include <fstream>
#include <iomanip>
#include <string>

#include <json.hpp>

#include "leap/config.hpp"
#include "leap/env.hpp"
#include "leap/policy.hpp"
#include "leap/trainer.hpp"

// File formats: trajectory CSV, episode summary JSON, learning-curve CSV,
// and the versioned JSON policy checkpoint.  Every CSV starts with a
// schema-version header line.

namespace leap::io {

inline constexpr const char* kTrajSchema = "# leapstack-trajectory v1";
inline constexpr const char* kCurveSchema = "# leapstack-learning-curve v1";
inline constexpr int kCheckpointVersion = 1;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void write_trajectory_csv(const std::string& path,
                                 const std::vector<env::TrajectoryRow>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << kTrajSchema << "\n";
  f << "time,px,py,pz,qw,qx,qy,qz,vx,vy,vz,wx,wy,wz,"
       "foot0x,foot0y,foot0z,foot1x,foot1y,foot1z,foot2x,foot2y,foot2z,"
       "foot3x,foot3y,foot3z,contact0,contact1,contact2,contact3,"
       "Fx,Fy,Fz,Tx,Ty,Tz,"
       "r_alive,r_position,r_orientation,r_contact,r_total,"
       "target_x,target_y,target_z,est_pos_err,est_vel_err,"
       "qp_iters,qp_residual,roll_cmd,pitch_cmd\n";
  f << std::setprecision(17);
  for (const auto& r : rows) {
    const auto& s = r.state;
    f << r.time << ',' << s.position.x() << ',' << s.position.y() << ','
      << s.position.z() << ',' << s.orientation.w() << ',' << s.orientation.x() << ','
      << s.orientation.y() << ',' << s.orientation.z() << ','
      << s.linear_velocity.x() << ',' << s.linear_velocity.y() << ','
      << s.linear_velocity.z() << ',' << s.angular_velocity.x() << ','
      << s.angular_velocity.y() << ',' << s.angular_velocity.z();
    for (int i = 0; i < kNumLegs; ++i)
      f << ',' << s.foot_positions[i].x() << ',' << s.foot_positions[i].y() << ','
        << s.foot_positions[i].z();
    for (int i = 0; i < kNumLegs; ++i) f << ',' << (s.foot_in_contact[i] ? 1 : 0);
    f << ',' << r.total_force.x() << ',' << r.total_force.y() << ','
      << r.total_force.z() << ',' << r.total_torque.x() << ',' << r.total_torque.y()
      << ',' << r.total_torque.z();
    f << ',' << r.reward.alive << ',' << r.reward.position << ','
      << r.reward.orientation << ',' << r.reward.contact << ',' << r.reward.total;
    f << ',' << r.task_target.x() << ',' << r.task_target.y() << ','
      << r.task_target.z() << ',' << r.estimator_pos_error << ','
      << r.estimator_vel_error << ',' << r.qp_iterations << ',' << r.qp_residual
      << ',' << r.stance_roll_cmd << ',' << r.stance_pitch_cmd << '\n';
  }
}

inline nlohmann::json summary_to_json(const env::EpisodeSummary& s) {
  nlohmann::json j;
  j["return"] = s.episode_return;
  j["ticks"] = s.ticks;
  j["jumps_completed"] = s.jumps_completed;
  j["flight_times"] = s.flight_times;
  j["landing_errors"] = s.landing_errors;
  j["yaw_progress"] = s.yaw_progress;
  j["peak_yaw_rate"] = s.peak_yaw_rate;
  j["termination"] = env::to_string(s.termination);
  j["success"] = s.success;
  return j;
}

inline void write_summary_json(const std::string& path, const env::EpisodeSummary& s) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << summary_to_json(s).dump(2) << "\n";
}

inline void write_curve_csv(const std::string& path,
                            const std::vector<train::CurvePoint>& curve) {
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << kCurveSchema << "\n";
  f << "iteration,episodes,mean_return,std_return,wall_clock_s\n";
  f << std::setprecision(17);
  for (const auto& p : curve)
    f << p.iteration << ',' << p.episodes << ',' << p.mean_return << ','
      << p.std_return << ',' << p.wall_clock_s << '\n';
}

inline std::vector<train::CurvePoint> read_curve_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path);
  std::string line;
  std::getline(f, line);
  if (line.rfind("# leapstack-learning-curve", 0) != 0)
    throw IoError(path + ": not a learning-curve file");
  std::getline(f, line);  // column header
  std::vector<train::CurvePoint> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    train::CurvePoint p;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    ss >> p.iteration >> p.episodes >> p.mean_return >> p.std_return >> p.wall_clock_s;
    out.push_back(p);
  }
  return out;
}

inline void save_checkpoint(const std::string& path, const policy::PolicyParams& p,
                            std::uint64_t cfg_hash) {
  nlohmann::json j;
  j["version"] = kCheckpointVersion;
  j["config_hash"] = cfg_hash;
  j["shapes"] = {{"W1", {policy::kHiddenDim, policy::kObsDim}},
                 {"b1", {policy::kHiddenDim}},
                 {"W2", {policy::kActionDim, policy::kHiddenDim}},
                 {"b2", {policy::kActionDim}}};
  auto mat_rows = [](const Eigen::MatrixXd& m) {
    std::vector<double> v;
    v.reserve(m.size());
    for (int r = 0; r < m.rows(); ++r)
      for (int c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
    return v;
  };
  j["W1"] = mat_rows(p.W1);
  j["b1"] = std::vector<double>(p.b1.data(), p.b1.data() + p.b1.size());
  j["W2"] = mat_rows(p.W2);
  j["b2"] = std::vector<double>(p.b2.data(), p.b2.data() + p.b2.size());
  j["obs_mean"] = std::vector<double>(p.obs_mean.data(), p.obs_mean.data() + policy::kObsDim);
  j["obs_std"] = std::vector<double>(p.obs_std.data(), p.obs_std.data() + policy::kObsDim);
  j["action_scale"] = {p.action_scale.linear_accel, p.action_scale.yaw_accel,
                       p.action_scale.roll_pitch};
  std::ofstream f(path);
  if (!f) throw IoError("cannot write " + path);
  f << j.dump() << "\n";
}

struct Checkpoint {
  policy::PolicyParams params;
  std::uint64_t config_hash = 0;
};

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read checkpoint: " + path);
  nlohmann::json j;
  f >> j;
  if (j.value("version", 0) != kCheckpointVersion)
    throw IoError(path + ": unsupported checkpoint version");
  Checkpoint c;
  c.config_hash = j.at("config_hash").get<std::uint64_t>();
  auto fill_mat = [&](const char* key, Eigen::MatrixXd& m) {
    const auto v = j.at(key).get<std::vector<double>>();
    if (static_cast<int>(v.size()) != m.size())
      throw IoError(path + ": bad shape for " + std::string(key));
    int idx = 0;
    for (int r = 0; r < m.rows(); ++r)
      for (int col = 0; col < m.cols(); ++col) m(r, col) = v[idx++];
  };
  fill_mat("W1", c.params.W1);
  fill_mat("W2", c.params.W2);
  auto fill_vec = [&](const char* key, auto&& setter) {
    const auto v = j.at(key).get<std::vector<double>>();
    setter(v);
  };
  fill_vec("b1", [&](const std::vector<double>& v) {
    c.params.b1 = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  });
  fill_vec("b2", [&](const std::vector<double>& v) {
    c.params.b2 = Eigen::Map<const Eigen::VectorXd>(v.data(), v.size());
  });
  fill_vec("obs_mean", [&](const std::vector<double>& v) {
    c.params.obs_mean = Eigen::Map<const policy::ObsVec>(v.data());
  });
  fill_vec("obs_std", [&](const std::vector<double>& v) {
    c.params.obs_std = Eigen::Map<const policy::ObsVec>(v.data());
  });
  const auto as = j.at("action_scale").get<std::vector<double>>();
  c.params.action_scale.linear_accel = as.at(0);
  c.params.action_scale.yaw_accel = as.at(1);
  c.params.action_scale.roll_pitch = as.at(2);
  return c;
}

}  // namespace leap::io

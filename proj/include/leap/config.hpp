#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "leap/estimator.hpp"
#include "leap/policy.hpp"
#include "leap/stance_accel.hpp"
#include "leap/swing.hpp"
#include "leap/types.hpp"
#include "leap/wbc.hpp"

// Flat, sectioned key-value configuration for the whole toolkit.  Sections:
// [robot] [gait] [swing] [stance_accel] [wbc] [estimator] [env] [ars].

namespace leap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GaitConfig {
  double stance_duration = 0.5;
  double swing_duration = 0.5;
};

struct EnvConfig {
  std::vector<Vec3> jump_sequence = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(-0.5, 0, 0),
                                     Vec3(0, 0.2, 0), Vec3(0, -0.2, 0)};
  double sim_dt = 0.002;      // 500 Hz
  double control_dt = 0.02;   // 50 Hz policy rate (zero-order hold)
  double w_position = 1.0;
  double w_orientation = 5.0;
  double w_contact = 0.4;
  double alive_bonus = 4.0;
  double distance_floor = 0.1;  // m, normalization floor for in-place jumps
  double min_height = 0.08;
  double min_up_cosine = 0.6;
  double roll_pitch_max = 0.5;  // composed command clip, rad
};

struct ArsConfig {
  int num_directions = 32;
  int top_directions = 16;
  double step_size = 0.015;
  double exploration_std = 0.02;
  int iterations = 300;
  int eval_interval = 10;
  int eval_episodes = 5;
  std::uint64_t seed = 1;
  int rollout_workers = 0;  // 0 = hardware concurrency / LEAPSTACK_THREADS
};

struct Config {
  RobotModel robot;
  GaitConfig gait;
  swing::SwingConfig swing;
  stance::StanceAccelConfig stance_accel;
  wbc::WbcConfig wbc;
  est::EstimatorConfig estimator;
  EnvConfig env;
  ArsConfig ars;
  policy::ActionScale action_scale;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_num(const std::string& section, const std::string& key,
                        const std::string& value, int line) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ConfigError("line " + std::to_string(line) + ": malformed numeric for " +
                      section + "." + key + ": '" + value + "'");
  }
}

inline std::vector<Vec3> parse_jump_sequence(const std::string& value, int line) {
  // format: x,y,yaw; x,y,yaw; ...
  std::vector<Vec3> seq;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::stringstream es(item);
    std::string tok;
    Vec3 v;
    int k = 0;
    while (std::getline(es, tok, ',') && k < 3)
      v[k++] = parse_num("env", "jump_sequence", trim(tok), line);
    if (k != 3)
      throw ConfigError("line " + std::to_string(line) +
                        ": env.jump_sequence entries need 3 values");
    seq.push_back(v);
  }
  if (seq.empty())
    throw ConfigError("line " + std::to_string(line) + ": env.jump_sequence empty");
  return seq;
}

}  // namespace detail

inline void apply_entry(Config& c, const std::string& sec, const std::string& key,
                        const std::string& val, int line) {
  auto num = [&] { return detail::parse_num(sec, key, val, line); };
  const std::string id = sec + "." + key;
  if (id == "robot.mass") c.robot.mass = num();
  else if (id == "robot.inertia_xx") c.robot.inertia(0, 0) = num();
  else if (id == "robot.inertia_yy") c.robot.inertia(1, 1) = num();
  else if (id == "robot.inertia_zz") c.robot.inertia(2, 2) = num();
  else if (id == "robot.hip_x") {
    const double v = num();
    for (int i = 0; i < kNumLegs; ++i)
      c.robot.hip_offsets[i].x() = (i < 2 ? v : -v);
  } else if (id == "robot.hip_y") {
    const double v = num();
    for (int i = 0; i < kNumLegs; ++i)
      c.robot.hip_offsets[i].y() = leg_side_sign(i) * v;
  }
  else if (id == "robot.abduction_offset") c.robot.leg.abduction_offset = num();
  else if (id == "robot.thigh_length") c.robot.leg.thigh_length = num();
  else if (id == "robot.calf_length") c.robot.leg.calf_length = num();
  else if (id == "robot.friction_coefficient") c.robot.friction_coefficient = num();
  else if (id == "robot.max_normal_force_per_foot") c.robot.max_normal_force_per_foot = num();
  else if (id == "robot.gravity") c.robot.gravity = num();
  else if (id == "robot.leg_reach") c.robot.leg_reach = num();
  else if (id == "robot.touchdown_tolerance") c.robot.touchdown_tolerance = num();
  else if (id == "robot.stand_height") c.robot.stand_height = num();
  else if (id == "gait.stance_duration") c.gait.stance_duration = num();
  else if (id == "gait.swing_duration") c.gait.swing_duration = num();
  else if (id == "swing.raibert_gain") c.swing.raibert_gain = num();
  else if (id == "swing.apex_height") c.swing.apex_height = num();
  else if (id == "swing.raibert_vdes_is_liftoff") c.swing.raibert_vdes_is_liftoff = num() != 0;
  else if (id == "swing.max_planar_offset") c.swing.max_planar_offset = num();
  else if (id == "swing.placement_time") c.swing.placement_time = num();
  else if (id == "stance_accel.box_half_xy") c.stance_accel.box_half_xy = num();
  else if (id == "stance_accel.box_z_min") c.stance_accel.box_z_min = num();
  else if (id == "stance_accel.box_z_max") c.stance_accel.box_z_max = num();
  else if (id == "stance_accel.t_floor") c.stance_accel.t_floor = num();
  else if (id == "stance_accel.prep_height") c.stance_accel.prep_height = num();
  else if (id == "stance_accel.prep_kp") c.stance_accel.prep_kp = num();
  else if (id == "stance_accel.prep_kd") c.stance_accel.prep_kd = num();
  else if (id == "stance_accel.accel_max") c.stance_accel.accel_max = num();
  else if (id == "stance_accel.yaw_accel_max") c.stance_accel.yaw_accel_max = num();
  else if (id == "wbc.kp") c.wbc.kp = num();
  else if (id == "wbc.kd") c.wbc.kd = num();
  else if (id == "wbc.tau_max") c.wbc.tau_max = num();
  else if (id == "wbc.qp_regularization") c.wbc.qp_regularization = num();
  else if (id == "wbc.qp_max_iterations") c.wbc.qp_max_iterations = static_cast<int>(num());
  else if (id == "wbc.qp_tolerance") c.wbc.qp_tolerance = num();
  else if (id == "wbc.angular_weight") c.wbc.angular_weight = num();
  else if (id == "wbc.attitude_kp") c.wbc.attitude_kp = num();
  else if (id == "wbc.attitude_kd") c.wbc.attitude_kd = num();
  else if (id == "wbc.dls_lambda") c.wbc.dls_lambda = num();
  else if (id == "estimator.sigma_accel") c.estimator.sigma_accel = num();
  else if (id == "estimator.sigma_foot") c.estimator.sigma_foot = num();
  else if (id == "estimator.inject_noise") c.estimator.inject_noise = num() != 0;
  else if (id == "env.jump_sequence") c.env.jump_sequence = detail::parse_jump_sequence(val, line);
  else if (id == "env.sim_dt") c.env.sim_dt = num();
  else if (id == "env.control_dt") c.env.control_dt = num();
  else if (id == "env.w_position") c.env.w_position = num();
  else if (id == "env.w_orientation") c.env.w_orientation = num();
  else if (id == "env.w_contact") c.env.w_contact = num();
  else if (id == "env.alive_bonus") c.env.alive_bonus = num();
  else if (id == "env.distance_floor") c.env.distance_floor = num();
  else if (id == "env.min_height") c.env.min_height = num();
  else if (id == "env.min_up_cosine") c.env.min_up_cosine = num();
  else if (id == "env.roll_pitch_max") c.env.roll_pitch_max = num();
  else if (id == "ars.num_directions") c.ars.num_directions = static_cast<int>(num());
  else if (id == "ars.top_directions") c.ars.top_directions = static_cast<int>(num());
  else if (id == "ars.step_size") c.ars.step_size = num();
  else if (id == "ars.exploration_std") c.ars.exploration_std = num();
  else if (id == "ars.iterations") c.ars.iterations = static_cast<int>(num());
  else if (id == "ars.eval_interval") c.ars.eval_interval = static_cast<int>(num());
  else if (id == "ars.eval_episodes") c.ars.eval_episodes = static_cast<int>(num());
  else if (id == "ars.seed") c.ars.seed = static_cast<std::uint64_t>(num());
  else if (id == "ars.rollout_workers") c.ars.rollout_workers = static_cast<int>(num());
  else if (id == "policy.linear_accel_scale") c.action_scale.linear_accel = num();
  else if (id == "policy.yaw_accel_scale") c.action_scale.yaw_accel = num();
  else if (id == "policy.roll_pitch_scale") c.action_scale.roll_pitch = num();
  else
    throw ConfigError("line " + std::to_string(line) + ": unknown key " + id);
}

inline Config parse_config(std::istream& in) {
  Config c;
  c.stance_accel.gravity = c.robot.gravity;
  std::string lineStr, section;
  int line = 0;
  while (std::getline(in, lineStr)) {
    ++line;
    std::string s = detail::trim(lineStr);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[' && s.back() == ']') {
      section = detail::trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected key = value");
    apply_entry(c, section, detail::trim(s.substr(0, eq)),
                detail::trim(s.substr(eq + 1)), line);
  }
  c.stance_accel.gravity = c.robot.gravity;
  return c;
}

inline Config load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file: " + path);
  return parse_config(f);
}

// Fully resolved snapshot; re-parsing it reproduces the same Config.
inline std::string serialize_config(const Config& c) {
  std::ostringstream o;
  o.precision(17);
  o << "[robot]\n"
    << "mass = " << c.robot.mass << "\n"
    << "inertia_xx = " << c.robot.inertia(0, 0) << "\n"
    << "inertia_yy = " << c.robot.inertia(1, 1) << "\n"
    << "inertia_zz = " << c.robot.inertia(2, 2) << "\n"
    << "hip_x = " << c.robot.hip_offsets[0].x() << "\n"
    << "hip_y = " << c.robot.hip_offsets[0].y() << "\n"
    << "abduction_offset = " << c.robot.leg.abduction_offset << "\n"
    << "thigh_length = " << c.robot.leg.thigh_length << "\n"
    << "calf_length = " << c.robot.leg.calf_length << "\n"
    << "friction_coefficient = " << c.robot.friction_coefficient << "\n"
    << "max_normal_force_per_foot = " << c.robot.max_normal_force_per_foot << "\n"
    << "gravity = " << c.robot.gravity << "\n"
    << "leg_reach = " << c.robot.leg_reach << "\n"
    << "touchdown_tolerance = " << c.robot.touchdown_tolerance << "\n"
    << "stand_height = " << c.robot.stand_height << "\n"
    << "[gait]\n"
    << "stance_duration = " << c.gait.stance_duration << "\n"
    << "swing_duration = " << c.gait.swing_duration << "\n"
    << "[swing]\n"
    << "raibert_gain = " << c.swing.raibert_gain << "\n"
    << "apex_height = " << c.swing.apex_height << "\n"
    << "raibert_vdes_is_liftoff = " << (c.swing.raibert_vdes_is_liftoff ? 1 : 0) << "\n"
    << "max_planar_offset = " << c.swing.max_planar_offset << "\n"
    << "placement_time = " << c.swing.placement_time << "\n"
    << "[stance_accel]\n"
    << "box_half_xy = " << c.stance_accel.box_half_xy << "\n"
    << "box_z_min = " << c.stance_accel.box_z_min << "\n"
    << "box_z_max = " << c.stance_accel.box_z_max << "\n"
    << "t_floor = " << c.stance_accel.t_floor << "\n"
    << "prep_height = " << c.stance_accel.prep_height << "\n"
    << "prep_kp = " << c.stance_accel.prep_kp << "\n"
    << "prep_kd = " << c.stance_accel.prep_kd << "\n"
    << "accel_max = " << c.stance_accel.accel_max << "\n"
    << "yaw_accel_max = " << c.stance_accel.yaw_accel_max << "\n"
    << "[wbc]\n"
    << "kp = " << c.wbc.kp << "\n"
    << "kd = " << c.wbc.kd << "\n"
    << "tau_max = " << c.wbc.tau_max << "\n"
    << "qp_regularization = " << c.wbc.qp_regularization << "\n"
    << "qp_max_iterations = " << c.wbc.qp_max_iterations << "\n"
    << "qp_tolerance = " << c.wbc.qp_tolerance << "\n"
    << "angular_weight = " << c.wbc.angular_weight << "\n"
    << "attitude_kp = " << c.wbc.attitude_kp << "\n"
    << "attitude_kd = " << c.wbc.attitude_kd << "\n"
    << "dls_lambda = " << c.wbc.dls_lambda << "\n"
    << "[estimator]\n"
    << "sigma_accel = " << c.estimator.sigma_accel << "\n"
    << "sigma_foot = " << c.estimator.sigma_foot << "\n"
    << "inject_noise = " << (c.estimator.inject_noise ? 1 : 0) << "\n"
    << "[env]\n"
    << "jump_sequence = ";
  for (size_t i = 0; i < c.env.jump_sequence.size(); ++i) {
    const Vec3& v = c.env.jump_sequence[i];
    o << v.x() << "," << v.y() << "," << v.z();
    if (i + 1 < c.env.jump_sequence.size()) o << "; ";
  }
  o << "\n"
    << "sim_dt = " << c.env.sim_dt << "\n"
    << "control_dt = " << c.env.control_dt << "\n"
    << "w_position = " << c.env.w_position << "\n"
    << "w_orientation = " << c.env.w_orientation << "\n"
    << "w_contact = " << c.env.w_contact << "\n"
    << "alive_bonus = " << c.env.alive_bonus << "\n"
    << "distance_floor = " << c.env.distance_floor << "\n"
    << "min_height = " << c.env.min_height << "\n"
    << "min_up_cosine = " << c.env.min_up_cosine << "\n"
    << "roll_pitch_max = " << c.env.roll_pitch_max << "\n"
    << "[ars]\n"
    << "num_directions = " << c.ars.num_directions << "\n"
    << "top_directions = " << c.ars.top_directions << "\n"
    << "step_size = " << c.ars.step_size << "\n"
    << "exploration_std = " << c.ars.exploration_std << "\n"
    << "iterations = " << c.ars.iterations << "\n"
    << "eval_interval = " << c.ars.eval_interval << "\n"
    << "eval_episodes = " << c.ars.eval_episodes << "\n"
    << "seed = " << c.ars.seed << "\n"
    << "rollout_workers = " << c.ars.rollout_workers << "\n"
    << "[policy]\n"
    << "linear_accel_scale = " << c.action_scale.linear_accel << "\n"
    << "yaw_accel_scale = " << c.action_scale.yaw_accel << "\n"
    << "roll_pitch_scale = " << c.action_scale.roll_pitch << "\n";
  return o.str();
}

inline std::uint64_t fnv1a_hash(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Worker count is execution metadata, not dynamics: results are bit-identical
// for any worker count, so a checkpoint must load regardless of it.
inline std::uint64_t config_hash(const Config& c) {
  Config canon = c;
  canon.ars.rollout_workers = 0;
  return fnv1a_hash(serialize_config(canon));
}

}  // namespace leap

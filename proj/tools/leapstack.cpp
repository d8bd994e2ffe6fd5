// leapstack: train, evaluate and export data for the quadruped jumping stack.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "leap/config.hpp"
#include "leap/env.hpp"
#include "leap/io.hpp"
#include "leap/trainer.hpp"

namespace fs = std::filesystem;
using namespace leap;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitOutputError = 3;
constexpr int kExitCheckpointMismatch = 4;
constexpr int kExitUnknownFigure = 5;

Config load_or_default(const std::string& path) {
  if (path.empty()) return Config{};
  return load_config(path);
}

// task override grammar:
//   "turn:<deg>x<n>"          n jump-turns of <deg> degrees each
//   "jump:<dx>,<dy>x<n>"      n planar jumps of (dx, dy) metres
//   "seq:x,y,yaw;x,y,yaw;..." explicit sequence (yaw in radians)
std::vector<Vec3> parse_task(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("task: expected kind:args");
  const std::string kind = spec.substr(0, colon);
  std::string args = spec.substr(colon + 1);
  if (kind == "seq") return detail::parse_jump_sequence(args, 0);
  int n = 1;
  const auto xpos = args.rfind('x');
  if (xpos != std::string::npos && kind != "seq") {
    n = std::stoi(args.substr(xpos + 1));
    args = args.substr(0, xpos);
  }
  std::vector<Vec3> seq;
  if (kind == "turn") {
    // strip an optional "deg" suffix
    const auto d = args.find("deg");
    if (d != std::string::npos) args = args.substr(0, d);
    const double yaw = std::stod(args) * M_PI / 180.0;
    seq.assign(n, Vec3(0, 0, yaw));
  } else if (kind == "jump") {
    const auto comma = args.find(',');
    if (comma == std::string::npos) throw ConfigError("task jump: expected dx,dy");
    const double dx = std::stod(args.substr(0, comma));
    const double dy = std::stod(args.substr(comma + 1));
    seq.assign(n, Vec3(dx, dy, 0));
  } else {
    throw ConfigError("task: unknown kind '" + kind + "'");
  }
  return seq;
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::uint64_t seed_override, bool seed_set, int workers) {
  Config cfg;
  try {
    cfg = load_or_default(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (seed_set) cfg.ars.seed = seed_override;
  if (workers > 0) cfg.ars.rollout_workers = workers;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  {
    std::ofstream probe(fs::path(out_dir) / ".write_probe");
    if (!probe) {
      std::cerr << "output directory not writable: " << out_dir << "\n";
      return kExitOutputError;
    }
  }
  fs::remove(fs::path(out_dir) / ".write_probe", ec);

  {
    std::ofstream snap(fs::path(out_dir) / "config_resolved.ini");
    snap << serialize_config(cfg);
  }
  const std::uint64_t hash = config_hash(cfg);

  train::ArsTrainer trainer(cfg.ars,
                            train::make_env_rollouter(cfg, env::Mode::ControllerPlusPolicy));
  policy::PolicyParams params;
  params.action_scale = cfg.action_scale;
  std::cout << "training: " << cfg.ars.iterations << " iterations, "
            << trainer.workers() << " workers\n";
  const auto curve = trainer.train(
      params, [&](int iter, const policy::PolicyParams& p, const train::CurvePoint& cp) {
        io::save_checkpoint(
            (fs::path(out_dir) / ("checkpoint_" + std::to_string(iter) + ".json")).string(),
            p, hash);
        std::cout << "iter " << iter << " episodes " << cp.episodes << " return "
                  << cp.mean_return << " +- " << cp.std_return << "\n";
      });
  io::save_checkpoint((fs::path(out_dir) / "checkpoint_final.json").string(), params, hash);
  io::write_curve_csv((fs::path(out_dir) / "learning_curve.csv").string(), curve);
  return 0;
}

int cmd_rollout(const std::string& source, const std::string& config_path,
                const std::string& task_spec, const std::string& out_dir,
                std::uint64_t seed) {
  Config cfg;
  try {
    cfg = load_or_default(config_path);
    if (!task_spec.empty()) cfg.env.jump_sequence = parse_task(task_spec);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  env::Mode mode = env::Mode::ControllerPlusPolicy;
  policy::PolicyParams params;
  params.action_scale = cfg.action_scale;
  if (source == "controller-only") {
    mode = env::Mode::ControllerOnly;
  } else if (source == "policy-only") {
    mode = env::Mode::PolicyOnly;
  } else {
    io::Checkpoint ck;
    try {
      ck = io::load_checkpoint(source);
    } catch (const std::exception& e) {
      std::cerr << "checkpoint error: " << e.what() << "\n";
      return kExitCheckpointMismatch;
    }
    Config base = cfg;
    if (!task_spec.empty()) base.env.jump_sequence = Config{}.env.jump_sequence;
    if (ck.config_hash != config_hash(base) && ck.config_hash != config_hash(cfg)) {
      std::cerr << "checkpoint/config hash mismatch\n";
      return kExitCheckpointMismatch;
    }
    params = ck.params;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  env::JumpEnv e(cfg, mode);
  e.set_record_trajectory(true);
  const auto summary = e.rollout(params, seed);
  try {
    io::write_trajectory_csv((fs::path(out_dir) / "trajectory.csv").string(),
                             e.trajectory());
    io::write_summary_json((fs::path(out_dir) / "summary.json").string(), summary);
  } catch (const io::IoError& e2) {
    std::cerr << e2.what() << "\n";
    return kExitOutputError;
  }
  std::cout << io::summary_to_json(summary).dump(2) << "\n";
  return 0;
}

struct TrajData {
  std::vector<std::vector<double>> cols;
  std::vector<std::string> names;
  int col(const std::string& name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    throw io::IoError("trajectory: missing column " + name);
  }
};

TrajData read_traj(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw io::IoError("cannot read " + path);
  std::string line;
  std::getline(f, line);
  if (line.rfind("# leapstack-trajectory", 0) != 0)
    throw io::IoError(path + ": not a trajectory file");
  std::getline(f, line);
  TrajData d;
  {
    std::istringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) d.names.push_back(name);
  }
  d.cols.resize(d.names.size());
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tok;
    size_t i = 0;
    while (std::getline(ss, tok, ',') && i < d.cols.size())
      d.cols[i++].push_back(std::stod(tok));
  }
  return d;
}

double pitch_from_quat(double qw, double qx, double qy, double qz) {
  return quat_to_rpy(Quat(qw, qx, qy, qz)).y();
}

int cmd_export(const std::string& which, const std::vector<std::string>& inputs,
               const std::string& out_path) {
  std::ofstream out(out_path);
  if (!out) {
    std::cerr << "cannot write " << out_path << "\n";
    return kExitOutputError;
  }
  out << std::setprecision(10);
  if (which == "contacts") {
    const TrajData d = read_traj(inputs.at(0));
    out << "# leapstack-figure contacts v1\ntime,contact0,contact1,contact2,contact3\n";
    const int t = d.col("time");
    const int c0 = d.col("contact0");
    for (size_t i = 0; i < d.cols[t].size(); ++i)
      out << d.cols[t][i] << ',' << d.cols[c0][i] << ',' << d.cols[c0 + 1][i] << ','
          << d.cols[c0 + 2][i] << ',' << d.cols[c0 + 3][i] << '\n';
  } else if (which == "pitch") {
    out << "# leapstack-figure pitch v1\nseries,time,pitch\n";
    for (size_t k = 0; k < inputs.size(); ++k) {
      const TrajData d = read_traj(inputs[k]);
      const int t = d.col("time"), qw = d.col("qw");
      for (size_t i = 0; i < d.cols[t].size(); ++i)
        out << k << ',' << d.cols[t][i] << ','
            << pitch_from_quat(d.cols[qw][i], d.cols[qw + 1][i], d.cols[qw + 2][i],
                               d.cols[qw + 3][i])
            << '\n';
    }
  } else if (which == "yawrate") {
    const TrajData d = read_traj(inputs.at(0));
    out << "# leapstack-figure yawrate v1\ntime,yaw_rate,contact\n";
    const int t = d.col("time"), qw = d.col("qw"), wx = d.col("wx");
    const int c0 = d.col("contact0");
    for (size_t i = 0; i < d.cols[t].size(); ++i) {
      const Quat q(d.cols[qw][i], d.cols[qw + 1][i], d.cols[qw + 2][i], d.cols[qw + 3][i]);
      const Vec3 w_world =
          q.toRotationMatrix() * Vec3(d.cols[wx][i], d.cols[wx + 1][i], d.cols[wx + 2][i]);
      int contact = 0;
      for (int j = 0; j < 4; ++j) contact += d.cols[c0 + j][i] > 0.5 ? 1 : 0;
      out << d.cols[t][i] << ',' << w_world.z() << ',' << (contact == 4 ? 1 : 0) << '\n';
    }
  } else if (which == "omni") {
    // long format: kind(0=trajectory,1=target cross), series, x, y
    out << "# leapstack-figure omni v1\nkind,series,x,y\n";
    for (size_t k = 0; k < inputs.size(); ++k) {
      const TrajData d = read_traj(inputs[k]);
      const int px = d.col("px"), tx = d.col("target_x");
      for (size_t i = 0; i < d.cols[px].size(); ++i)
        out << 0 << ',' << k << ',' << d.cols[px][i] << ',' << d.cols[px + 1][i] << '\n';
      if (!d.cols[tx].empty())
        out << 1 << ',' << k << ',' << d.cols[tx].back() << ','
            << d.cols[tx + 1].back() << '\n';
    }
  } else if (which == "curve") {
    out << "# leapstack-figure curve v1\nseries,iteration,episodes,mean_return,std_return\n";
    for (size_t k = 0; k < inputs.size(); ++k)
      for (const auto& p : io::read_curve_csv(inputs[k]))
        out << k << ',' << p.iteration << ',' << p.episodes << ',' << p.mean_return
            << ',' << p.std_return << '\n';
  } else {
    std::cerr << "unknown figure key: " << which << "\n";
    return kExitUnknownFigure;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quadruped jumping stack: simulator, controllers, residual-policy training"};
  app.require_subcommand(1);

  std::string config_path, out = "out", checkpoint, mode_source, task, which;
  std::vector<std::string> inputs;
  std::uint64_t seed = 1;
  int workers = 0;
  bool seed_set = false;

  auto* tr = app.add_subcommand("train", "run ARS training");
  tr->add_option("--config", config_path, "config file");
  tr->add_option("--out", out, "output directory");
  tr->add_option("--seed", seed, "training seed")->each([&](const std::string&) {
    seed_set = true;
  });
  tr->add_option("--workers", workers, "rollout worker threads");

  auto* ro = app.add_subcommand("rollout", "run one deterministic episode");
  ro->add_option("source", mode_source,
                 "checkpoint path, 'controller-only' or 'policy-only'");
  std::string checkpoint_flag, mode_flag;
  ro->add_option("--checkpoint", checkpoint_flag, "checkpoint path");
  ro->add_option("--mode", mode_flag,
                 "'controller-only' or 'policy-only' (alternative to source)");
  ro->add_option("--config", config_path, "config file");
  ro->add_option("--task", task, "task override, e.g. turn:90degx5 or jump:1,0x5");
  ro->add_option("--out", out, "output directory");
  ro->add_option("--seed", seed, "episode seed");

  auto* ex = app.add_subcommand("export-figures", "emit plot-ready columnar data");
  ex->add_option("--which", which, "omni|yawrate|pitch|contacts|curve")->required();
  ex->add_option("--input", inputs, "input trajectory/curve files")->required();
  ex->add_option("--out", out, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (tr->parsed()) return cmd_train(config_path, out, seed, seed_set, workers);
    if (ro->parsed()) {
      if (mode_source.empty()) mode_source = !checkpoint_flag.empty() ? checkpoint_flag : mode_flag;
      if (mode_source.empty()) {
        std::cerr << "rollout: give a source, --checkpoint or --mode\n";
        return 1;
      }
      return cmd_rollout(mode_source, config_path, task, out, seed);
    }
    if (ex->parsed()) return cmd_export(which, inputs, out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const io::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitOutputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <thread>
#include <vector>

#include "leap/config.hpp"
#include "leap/env.hpp"
#include "leap/policy.hpp"

// Augmented Random Search (V2-t): antithetic Gaussian directions in policy
// parameter space, top-b direction selection, reward-std-scaled updates, and
// running observation normalization.  Rollouts run on a worker pool; all
// sampling and reductions happen on the trainer thread in fixed direction
// order, so results are independent of the worker count.

namespace leap::train {

struct ObsAccum {
  long count = 0;
  policy::ObsVec sum = policy::ObsVec::Zero();
  policy::ObsVec sumsq = policy::ObsVec::Zero();

  void add(const policy::ObsVec& v) {
    ++count;
    sum += v;
    sumsq += v.cwiseProduct(v);
  }
  void merge(const ObsAccum& o) {
    count += o.count;
    sum += o.sum;
    sumsq += o.sumsq;
  }
};

struct RolloutResult {
  double episode_return = 0.0;
  ObsAccum obs;
  env::EpisodeSummary summary;
};

using RolloutFn =
    std::function<RolloutResult(const policy::PolicyParams&, std::uint64_t seed)>;

inline RolloutFn make_env_rollouter(const Config& cfg, env::Mode mode) {
  return [cfg, mode](const policy::PolicyParams& params, std::uint64_t seed) {
    env::JumpEnv e(cfg, mode);
    RolloutResult r;
    r.summary = e.rollout(params, seed);
    r.episode_return = r.summary.episode_return;
    for (const auto& o : e.observation_log()) r.obs.add(o);
    return r;
  };
}

inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env_var = std::getenv("LEAPSTACK_THREADS")) {
    const int n = std::atoi(env_var);
    if (n > 0) return n;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs jobs[0..n) on `workers` threads; results land in a pre-sized vector
// indexed by job, so the reduction order never depends on scheduling.
template <typename Job>
void run_parallel(int n, int workers, Job&& job) {
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) job(i);
    });
  for (auto& t : pool) t.join();
}

struct IterationStats {
  double mean_return = 0.0;   // over all 2N rollouts
  double max_return = 0.0;
  double sigma_rewards = 0.0;  // std of the 2b selected returns
  long episodes = 0;
};

struct EvalStats {
  double mean_return = 0.0;
  double std_return = 0.0;
  double success_rate = 0.0;
  std::vector<double> mean_landing_errors;  // per jump
  std::vector<double> mean_flight_times;    // per jump
};

struct CurvePoint {
  int iteration = 0;
  long episodes = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double wall_clock_s = 0.0;
};

class ArsTrainer {
 public:
  ArsTrainer(const ArsConfig& cfg, RolloutFn rollout)
      : cfg_(cfg), rollout_(std::move(rollout)), rng_(cfg.seed) {
    if (cfg_.top_directions < 1 || cfg_.top_directions > cfg_.num_directions)
      throw std::invalid_argument("ars: need 1 <= top_directions <= num_directions");
    workers_ = resolve_workers(cfg_.rollout_workers);
  }

  int workers() const { return workers_; }
  void set_workers(int w) { workers_ = std::max(1, w); }
  long episodes_consumed() const { return episodes_; }
  const ObsAccum& running_obs() const { return running_obs_; }

  IterationStats iterate(policy::PolicyParams& params) {
    const int N = cfg_.num_directions;
    const int dim = policy::PolicyParams::kWeightCount;
    const Eigen::VectorXd theta = params.flatten();

    std::vector<Eigen::VectorXd> deltas(N);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < N; ++k) {
      deltas[k].resize(dim);
      for (int j = 0; j < dim; ++j) deltas[k][j] = gauss(rng_);
    }
    std::vector<std::uint64_t> seeds(2 * N);
    std::uniform_int_distribution<std::uint64_t> useed;
    for (auto& s : seeds) s = useed(rng_);

    std::vector<RolloutResult> results(2 * N);
    run_parallel(2 * N, workers_, [&](int i) {
      const int k = i / 2;
      const double sign = (i % 2 == 0) ? 1.0 : -1.0;
      policy::PolicyParams p = params;
      p.unflatten(theta + sign * cfg_.exploration_std * deltas[k]);
      results[i] = rollout_(p, seeds[i]);
    });

    std::vector<int> order(N);
    std::iota(order.begin(), order.end(), 0);
    auto score = [&](int k) {
      return std::max(results[2 * k].episode_return, results[2 * k + 1].episode_return);
    };
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return score(a) > score(b); });

    const int b = cfg_.top_directions;
    double sum = 0.0, sumsq = 0.0;
    for (int j = 0; j < b; ++j) {
      const int k = order[j];
      for (double r : {results[2 * k].episode_return, results[2 * k + 1].episode_return}) {
        sum += r;
        sumsq += r * r;
      }
    }
    const double mean_sel = sum / (2 * b);
    const double var_sel = std::max(sumsq / (2 * b) - mean_sel * mean_sel, 0.0);
    const double sigma = std::max(std::sqrt(var_sel), 1e-6);

    Eigen::VectorXd update = Eigen::VectorXd::Zero(dim);
    for (int j = 0; j < b; ++j) {
      const int k = order[j];
      update += (results[2 * k].episode_return - results[2 * k + 1].episode_return) *
                deltas[k];
    }
    params.unflatten(theta + (cfg_.step_size / (b * sigma)) * update);

    for (int i = 0; i < 2 * N; ++i) running_obs_.merge(results[i].obs);
    apply_obs_stats(params);

    IterationStats st;
    st.sigma_rewards = sigma;
    st.episodes = 2 * N;
    episodes_ += 2 * N;
    double total = 0.0, best = -1e300;
    for (const auto& r : results) {
      total += r.episode_return;
      best = std::max(best, r.episode_return);
    }
    st.mean_return = total / (2 * N);
    st.max_return = best;
    return st;
  }

  EvalStats evaluate(const policy::PolicyParams& params, int n_episodes,
                     std::uint64_t seed) const {
    std::vector<RolloutResult> results(n_episodes);
    run_parallel(n_episodes, workers_, [&](int i) {
      results[i] = rollout_(params, seed + static_cast<std::uint64_t>(i));
    });
    EvalStats s;
    double sum = 0.0, sumsq = 0.0;
    int nsuccess = 0;
    for (const auto& r : results) {
      sum += r.episode_return;
      sumsq += r.episode_return * r.episode_return;
      if (r.summary.success) ++nsuccess;
      if (s.mean_landing_errors.size() < r.summary.landing_errors.size()) {
        s.mean_landing_errors.resize(r.summary.landing_errors.size(), 0.0);
        s.mean_flight_times.resize(r.summary.flight_times.size(), 0.0);
      }
      for (size_t j = 0; j < r.summary.landing_errors.size(); ++j)
        s.mean_landing_errors[j] += r.summary.landing_errors[j] / n_episodes;
      for (size_t j = 0; j < r.summary.flight_times.size(); ++j)
        s.mean_flight_times[j] += r.summary.flight_times[j] / n_episodes;
    }
    s.mean_return = sum / n_episodes;
    s.std_return = std::sqrt(std::max(sumsq / n_episodes - s.mean_return * s.mean_return, 0.0));
    s.success_rate = static_cast<double>(nsuccess) / n_episodes;
    return s;
  }

  // Full training loop.  on_eval (optional) fires after every evaluation
  // with the current params (checkpointing hook).
  std::vector<CurvePoint> train(
      policy::PolicyParams& params,
      const std::function<void(int, const policy::PolicyParams&, const CurvePoint&)>&
          on_eval = {}) {
    std::vector<CurvePoint> curve;
    const auto t0 = std::chrono::steady_clock::now();
    auto eval_point = [&](int iter) {
      const EvalStats es = evaluate(params, cfg_.eval_episodes,
                                    cfg_.seed * 7919 + static_cast<std::uint64_t>(iter));
      CurvePoint cp;
      cp.iteration = iter;
      cp.episodes = episodes_;
      cp.mean_return = es.mean_return;
      cp.std_return = es.std_return;
      cp.wall_clock_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      curve.push_back(cp);
      if (on_eval) on_eval(iter, params, cp);
    };
    eval_point(0);
    for (int it = 1; it <= cfg_.iterations; ++it) {
      iterate(params);
      if (it % cfg_.eval_interval == 0 || it == cfg_.iterations) eval_point(it);
    }
    return curve;
  }

 private:
  void apply_obs_stats(policy::PolicyParams& params) const {
    if (running_obs_.count < 2) return;
    const double n = static_cast<double>(running_obs_.count);
    params.obs_mean = running_obs_.sum / n;
    const policy::ObsVec var =
        (running_obs_.sumsq / n - params.obs_mean.cwiseProduct(params.obs_mean))
            .cwiseMax(0.0);
    params.obs_std = var.cwiseSqrt().cwiseMax(1e-6);
  }

  ArsConfig cfg_;
  RolloutFn rollout_;
  std::mt19937_64 rng_;
  int workers_ = 1;
  long episodes_ = 0;
  ObsAccum running_obs_;
};

}  // namespace leap::train

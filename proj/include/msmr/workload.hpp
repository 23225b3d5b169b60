#pragma once

// Heaviness-parameterized edge workloads: three stages (offload on an access
// point, compute on a server, download on an access point), all jobs released
// at time 0.
//
// Sampling, per attempt:
//  1. heavy labels: per stage, round_half_up(h_j * n) jobs drawn without
//     replacement are heavy (P/D in [beta, 2 beta]); the rest are light (< beta);
//  2. deadline: uniform over the integers that let every stage of the job meet
//     its label inside the stage's time range; jobs with no heavy stage may
//     stretch the upper end by `deadline_stretch`;
//  3. stage times: uniform within the heavy or light sub-interval;
//  4. mapping: per stage, jobs in decreasing heaviness go to the resource with
//     the least accumulated heaviness, ties broken at random.
// An attempt whose maximum resource heaviness exceeds gamma is discarded.

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "msmr/model.hpp"
#include "msmr/rational.hpp"

namespace msmr::workload {

struct TimeRange {
  Time lo = 1;
  Time hi = 1;
};

struct EdgeConfig {
  std::size_t num_aps = 25;
  std::size_t num_servers = 20;
  std::size_t num_jobs = 100;
  TimeRange offload{2, 200};
  TimeRange compute{50, 500};
  TimeRange download{2, 100};
  Rational beta{15, 100};
  std::vector<Rational> per_stage_heavy{Rational(5, 100), Rational(5, 100), Rational(1, 100)};
  Rational gamma{7, 10};
  Rational deadline_stretch{4};
  std::uint64_t seed = 1;
  std::size_t max_attempts = 1000;

  std::vector<TimeRange> ranges() const { return {offload, compute, download}; }
  void validate() const;
};

class GenerationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct HeavinessReport {
  std::vector<std::vector<Rational>> h;     // [job][stage]
  std::vector<std::vector<Rational>> chi;   // [stage][position in pool]
  Rational H = 0;
  std::vector<Rational> heavy_ratio;        // per stage, share of jobs with h >= beta

  /// Sum over stages of a job's heaviness.
  Rational job_heaviness(JobId i) const {
    Rational s = 0;
    for (const auto& v : h[i]) s += v;
    return s;
  }
};

inline void EdgeConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("edge config: " + what); };
  if (num_aps == 0 || num_servers == 0) fail("need at least one access point and one server");
  for (const TimeRange& r : ranges())
    if (r.lo == 0 || r.lo > r.hi) fail("time ranges must be non-empty and positive");
  if (beta <= 0) fail("beta must be positive");
  if (per_stage_heavy.size() != 3) fail("need three per-stage heavy ratios");
  for (const auto& hj : per_stage_heavy)
    if (hj < 0 || hj > 1) fail("heavy ratios must lie in [0, 1]");
  if (gamma <= 0) fail("gamma must be positive");
  if (deadline_stretch <= 0) fail("deadline stretch must be positive");
  if (max_attempts == 0) fail("need at least one attempt");
}

/// Exact heaviness figures of a job set.
inline HeavinessReport heaviness(const JobSet& js, const Rational& beta) {
  const std::size_t n_stages = js.num_stages();
  HeavinessReport rep;
  rep.h.assign(js.size(), std::vector<Rational>(n_stages));
  rep.chi.resize(n_stages);
  rep.heavy_ratio.assign(n_stages, 0);
  for (std::size_t j = 0; j < n_stages; ++j) rep.chi[j].assign(js.pipeline().pools[j].size(), 0);
  for (const Job& job : js.jobs())
    for (std::size_t j = 0; j < n_stages; ++j) {
      const Rational hij(job.proc[j], job.deadline);
      rep.h[job.id][j] = hij;
      const auto& pool = js.pipeline().pools[j];
      const auto pos = static_cast<std::size_t>(
          std::find(pool.begin(), pool.end(), job.mapping[j]) - pool.begin());
      rep.chi[j][pos] += hij;
      if (hij >= beta) rep.heavy_ratio[j] += 1;
    }
  for (std::size_t j = 0; j < n_stages; ++j) {
    if (!js.empty()) rep.heavy_ratio[j] /= js.size();
    for (const auto& c : rep.chi[j]) rep.H = std::max(rep.H, c);
  }
  return rep;
}

struct Generated {
  JobSet jobs;
  HeavinessReport report;
  std::size_t attempts = 0;
};

namespace detail {

template <typename Int>
Int uniform(std::mt19937_64& rng, Int lo, Int hi) {
  return std::uniform_int_distribution<Int>(lo, hi)(rng);
}

/// Integer deadline interval for a job with the given heavy labels.
inline std::pair<Time, Time> deadline_range(const EdgeConfig& cfg, const std::vector<bool>& heavy) {
  const auto ranges = cfg.ranges();
  BigInt lo = 1;
  BigInt hi = 0;
  bool any_heavy = false;
  BigInt loosest = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const Rational lo_j(ranges[j].lo);
    const Rational hi_j(ranges[j].hi);
    loosest = std::max(loosest, floor_of(hi_j / cfg.beta));
    if (heavy[j]) {
      // P in [beta D, 2 beta D] intersects [lo, hi].
      lo = std::max(lo, ceil_of(lo_j / (2 * cfg.beta)));
      const BigInt cap = floor_of(hi_j / cfg.beta);
      hi = any_heavy ? std::min(hi, cap) : cap;
      any_heavy = true;
    } else {
      // Some P >= lo stays strictly below beta D.
      lo = std::max(lo, BigInt(floor_of(lo_j / cfg.beta) + 1));
    }
  }
  if (!any_heavy) hi = floor_of(Rational(loosest) * cfg.deadline_stretch);
  if (hi < lo) throw GenerationError("stage time ranges admit no deadline for the heavy labels");
  return {to_time(lo), to_time(hi)};
}

}  // namespace detail

/// Samples one job set; throws GenerationError when no attempt within the
/// budget meets the heaviness bound.
inline Generated generate(const EdgeConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.num_jobs;
  const auto ranges = cfg.ranges();
  std::mt19937_64 rng(cfg.seed);

  std::vector<ResourceId> aps(cfg.num_aps), servers(cfg.num_servers);
  for (std::size_t y = 0; y < aps.size(); ++y) aps[y] = static_cast<ResourceId>(y);
  for (std::size_t y = 0; y < servers.size(); ++y) servers[y] = static_cast<ResourceId>(y);
  const Pipeline pipeline{{aps, servers, aps}};

  std::vector<std::size_t> heavy_count(3);
  for (std::size_t j = 0; j < 3; ++j)
    heavy_count[j] = static_cast<std::size_t>(
        std::min<BigInt>(round_half_up(cfg.per_stage_heavy[j] * n), BigInt(n)));

  Rational best_H = -1;
  for (std::size_t attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
    std::vector<std::vector<bool>> heavy(n, std::vector<bool>(3, false));
    for (std::size_t j = 0; j < 3; ++j) {
      std::vector<JobId> ids(n);
      for (JobId i = 0; i < n; ++i) ids[i] = i;
      std::shuffle(ids.begin(), ids.end(), rng);
      for (std::size_t c = 0; c < heavy_count[j]; ++c) heavy[ids[c]][j] = true;
    }

    std::vector<Job> jobs(n);
    for (JobId i = 0; i < n; ++i) {
      Job& job = jobs[i];
      job.id = i;
      const auto [dlo, dhi] = detail::deadline_range(cfg, heavy[i]);
      job.deadline = detail::uniform<Time>(rng, dlo, dhi);
      const Rational bd = cfg.beta * job.deadline;
      for (std::size_t j = 0; j < 3; ++j) {
        Time lo = ranges[j].lo;
        Time hi = ranges[j].hi;
        if (heavy[i][j]) {
          lo = std::max(lo, to_time(ceil_of(bd)));
          hi = std::min(hi, to_time(floor_of(2 * bd)));
        } else {
          hi = std::min(hi, to_time(ceil_of(bd) - 1));
        }
        job.proc.push_back(detail::uniform<Time>(rng, lo, hi));
      }
      job.mapping.assign(3, 0);
    }

    // Greedy least-loaded placement per stage.
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t pool = pipeline.pools[j].size();
      std::vector<Rational> load(pool, 0);
      std::vector<JobId> order(n);
      for (JobId i = 0; i < n; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(), [&](JobId a, JobId b) {
        return Rational(jobs[a].proc[j], jobs[a].deadline) > Rational(jobs[b].proc[j], jobs[b].deadline);
      });
      for (JobId i : order) {
        const Rational least = *std::min_element(load.begin(), load.end());
        std::vector<std::size_t> ties;
        for (std::size_t y = 0; y < pool; ++y)
          if (load[y] == least) ties.push_back(y);
        const std::size_t y = ties[detail::uniform<std::size_t>(rng, 0, ties.size() - 1)];
        jobs[i].mapping[j] = pipeline.pools[j][y];
        load[y] += Rational(jobs[i].proc[j], jobs[i].deadline);
      }
    }

    JobSet js(pipeline, std::move(jobs));
    HeavinessReport rep = heaviness(js, cfg.beta);
    if (rep.H <= cfg.gamma) return {std::move(js), std::move(rep), attempt};
    if (best_H < 0 || rep.H < best_H) best_H = rep.H;
  }
  throw GenerationError("heaviness bound gamma=" + to_decimal(cfg.gamma, 3) + " not met in " +
                        std::to_string(cfg.max_attempts) + " attempts (smallest H " +
                        to_decimal(best_H, 3) + ")");
}

}  // namespace msmr::workload

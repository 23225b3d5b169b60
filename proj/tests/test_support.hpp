#pragma once

// Fixtures, random instance generators and brute-force oracles shared by the
// unit and acceptance suites. The oracles deliberately avoid the library's
// evaluation paths: they recompute bounds from the raw job data.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "msmr/model.hpp"
#include "msmr/dca.hpp"

namespace msmr::fixture {

/// Three-stage single-resource pipeline with J1<5,7,15>, J2<7,9,17>,
/// J3<6,8,30>, J4<2,4,3> (ids 0..3).
inline JobSet example1(std::vector<Time> deadlines = {1000, 1000, 1000, 1000},
                       std::vector<Time> arrivals = {0, 0, 0, 0}) {
  const std::vector<std::vector<Time>> proc = {{5, 7, 15}, {7, 9, 17}, {6, 8, 30}, {2, 4, 3}};
  std::vector<Job> jobs;
  for (JobId i = 0; i < 4; ++i) jobs.push_back({i, arrivals[i], deadlines[i], proc[i], {0, 0, 0}});
  return JobSet(Pipeline{{{0}, {0}, {0}}}, std::move(jobs));
}

/// Same jobs, explicit per-stage mapping over two resources per stage.
inline JobSet example1_mapped(const std::vector<std::vector<ResourceId>>& mapping,
                              std::vector<Time> deadlines) {
  const std::vector<std::vector<Time>> proc = {{5, 7, 15}, {7, 9, 17}, {6, 8, 30}, {2, 4, 3}};
  std::vector<Job> jobs;
  for (JobId i = 0; i < 4; ++i) jobs.push_back({i, 0, deadlines[i], proc[i], mapping[i]});
  return JobSet(Pipeline{{{0, 1}, {0, 1}, {0, 1}}}, std::move(jobs));
}

/// J1<10,1,10> D=35 and J2<1,20,1> D=45 sharing stages 1 and 3 only.
inline JobSet dmr_pair() {
  std::vector<Job> jobs = {{0, 0, 35, {10, 1, 10}, {0, 0, 0}},
                           {1, 0, 45, {1, 20, 1}, {0, 1, 0}}};
  return JobSet(Pipeline{{{0}, {0, 1}, {0}}}, std::move(jobs));
}

struct RandomSpec {
  std::size_t min_jobs = 3, max_jobs = 6;
  std::size_t min_stages = 2, max_stages = 4;
  std::size_t max_resources = 2;  // per stage
  Time min_proc = 1, max_proc = 20;
  double zero_proc_chance = 0.0;
  Time arrival_spread = 0;        // arrivals uniform in [0, spread]
  double min_slack = 0.8, max_slack = 3.0;  // D = factor * (sum of own P + mean contention)
};

inline JobSet random_jobset(std::mt19937_64& rng, const RandomSpec& spec) {
  auto uni = [&](auto lo, auto hi) {
    return std::uniform_int_distribution<std::common_type_t<decltype(lo), decltype(hi)>>(lo, hi)(rng);
  };
  const std::size_t n = uni(spec.min_jobs, spec.max_jobs);
  const std::size_t n_stages = uni(spec.min_stages, spec.max_stages);
  Pipeline pipeline;
  for (std::size_t j = 0; j < n_stages; ++j) {
    const std::size_t r = uni(std::size_t{1}, spec.max_resources);
    std::vector<ResourceId> pool(r);
    std::iota(pool.begin(), pool.end(), ResourceId{0});
    pipeline.pools.push_back(pool);
  }
  std::bernoulli_distribution zero(spec.zero_proc_chance);
  std::uniform_real_distribution<double> slack(spec.min_slack, spec.max_slack);
  std::vector<Job> jobs;
  for (JobId i = 0; i < n; ++i) {
    Job job;
    job.id = i;
    job.arrival = spec.arrival_spread ? uni(Time{0}, spec.arrival_spread) : 0;
    Time total = 0;
    for (std::size_t j = 0; j < n_stages; ++j) {
      Time p = zero(rng) ? 0 : uni(spec.min_proc, spec.max_proc);
      job.proc.push_back(p);
      total += p;
      job.mapping.push_back(
          static_cast<ResourceId>(uni(std::size_t{0}, pipeline.pools[j].size() - 1)));
    }
    if (total == 0) job.proc[0] = total = spec.min_proc ? spec.min_proc : 1;
    const double contention = static_cast<double>(n - 1) * static_cast<double>(spec.max_proc) / 2.0;
    job.deadline = std::max<Time>(1, static_cast<Time>(slack(rng) * (static_cast<double>(total) + contention)));
    jobs.push_back(std::move(job));
  }
  return JobSet(std::move(pipeline), std::move(jobs));
}

inline JobSet random_single_resource(std::mt19937_64& rng, RandomSpec spec) {
  spec.max_resources = 1;
  return random_jobset(rng, spec);
}

/// Reference bound straight from the definitions. `higher`/`lower` are taken
/// as given (the caller filters windows); `everyone` is the other-jobs set
/// used by the OPA-compatible non-preemptive form.
inline Time reference_bound(const JobSet& js, JobId i, const std::vector<JobId>& higher,
                            const std::vector<JobId>& lower, BoundMode mode,
                            const std::vector<JobId>& everyone = {}) {
  const std::size_t N = js.num_stages();
  const Job& me = js[i];
  const bool single = mode == BoundMode::PreemptiveSingle || mode == BoundMode::NonpreemptiveSingle;

  // p~ of job k relative to i, and the segment statistics of the pair.
  auto shared = [&](JobId k) {
    std::vector<Time> p(N, 0);
    for (std::size_t j = 0; j < N; ++j) {
      const bool same = single || (me.mapping[j] == js[k].mapping[j] && me.proc[j] > 0 &&
                                   js[k].proc[j] > 0);
      if (same) p[j] = js[k].proc[j];
    }
    return p;
  };
  auto segments = [&](JobId k, std::size_t& u, std::size_t& v) {
    u = v = 0;
    std::vector<bool> s(N);
    for (std::size_t j = 0; j < N; ++j)
      s[j] = me.mapping[j] == js[k].mapping[j] && me.proc[j] > 0 && js[k].proc[j] > 0;
    for (std::size_t j = 0; j < N; ++j) {
      const bool starts = s[j] && (j == 0 || !s[j - 1]);
      if (!starts) continue;
      const bool longer = j + 1 < N && s[j + 1];
      (longer ? v : u) += 1;
    }
  };
  auto kth = [](std::vector<Time> p, std::size_t x) -> Time {
    std::sort(p.rbegin(), p.rend());
    return x <= p.size() ? p[x - 1] : 0;
  };

  std::vector<JobId> q = higher;
  q.push_back(i);
  Time total = kth(me.proc, 1);
  for (JobId k : higher) {
    const auto p = shared(k);
    std::size_t u, v;
    segments(k, u, v);
    switch (mode) {
      case BoundMode::PreemptiveSingle: {
        total += kth(p, 1);
        if (js[i].arrival < js[k].arrival) total += kth(p, 2);
        break;
      }
      case BoundMode::NonpreemptiveSingle: total += kth(p, 1); break;
      case BoundMode::PreemptiveMulti: total += 2 * (u + v) * kth(p, 1); break;
      case BoundMode::NonpreemptiveMulti:
      case BoundMode::NonpreemptiveOpa: total += (u + v) * kth(p, 1); break;
      case BoundMode::PreemptiveRefined:
      case BoundMode::EdgeMixed:
        for (std::size_t x = 1; x <= u + 2 * v; ++x) total += kth(p, x);
        break;
    }
  }
  for (std::size_t j = 0; j + 1 < N; ++j) {
    Time mx = me.proc[j];
    for (JobId k : higher) mx = std::max(mx, shared(k)[j]);
    total += mx;
  }
  auto block = [&](const std::vector<JobId>& set, std::size_t j) {
    Time mx = 0;
    for (JobId k : set) mx = std::max(mx, shared(k)[j]);
    return mx;
  };
  if (mode == BoundMode::NonpreemptiveSingle || mode == BoundMode::NonpreemptiveMulti)
    for (std::size_t j = 0; j < N; ++j) total += block(lower, j);
  if (mode == BoundMode::NonpreemptiveOpa)
    for (std::size_t j = 0; j < N; ++j) total += block(everyone, j);
  if (mode == BoundMode::EdgeMixed) total += block(lower, 2);
  return total;
}

/// Jobs of `ids` whose deadline window overlaps job i.
inline std::vector<JobId> overlapping(const JobSet& js, JobId i, const std::vector<JobId>& ids) {
  std::vector<JobId> out;
  for (JobId k : ids) {
    if (k == i) continue;
    const Job& a = js[i];
    const Job& b = js[k];
    if (b.arrival <= a.arrival + a.deadline && a.arrival <= b.arrival + b.deadline) out.push_back(k);
  }
  return out;
}

}  // namespace msmr::fixture

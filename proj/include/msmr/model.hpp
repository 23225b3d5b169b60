#pragma once

// Domain model of a multi-stage multi-resource (MSMR) pipeline: jobs, stage
// resource pools, and the pairwise structure derived from a job-to-resource
// mapping (shared stages, segments, competitor sets, interference windows).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace msmr {

/// Integer time units. Edge experiments interpret one unit as a microsecond.
using Time = std::uint64_t;
using JobId = std::size_t;
using ResourceId = std::uint32_t;
using JobList = std::vector<JobId>;

inline constexpr Time kTimeMax = std::numeric_limits<Time>::max();

class ModelError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct Job {
  JobId id = 0;
  Time arrival = 0;
  Time deadline = 0;  // end-to-end, relative to arrival
  std::vector<Time> proc;
  std::vector<ResourceId> mapping;

  std::size_t num_stages() const { return proc.size(); }
  Time absolute_deadline() const { return arrival + deadline; }

  /// True when the job actually occupies its stage-j resource.
  bool visits(std::size_t stage) const { return proc[stage] > 0; }

  friend bool operator==(const Job&, const Job&) = default;
};

struct Pipeline {
  std::vector<std::vector<ResourceId>> pools;

  std::size_t num_stages() const { return pools.size(); }

  bool has_resource(std::size_t stage, ResourceId r) const {
    const auto& pool = pools.at(stage);
    return std::find(pool.begin(), pool.end(), r) != pool.end();
  }

  /// Every stage has exactly one resource, so every job meets every other job
  /// at every stage it visits.
  bool single_resource() const {
    return std::all_of(pools.begin(), pools.end(),
                       [](const auto& p) { return p.size() == 1; });
  }

  void validate() const {
    if (pools.empty()) throw ModelError("pipeline must have at least one stage");
    for (std::size_t j = 0; j < pools.size(); ++j) {
      if (pools[j].empty())
        throw ModelError("stage " + std::to_string(j) + " has an empty resource pool");
      auto sorted = pools[j];
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ModelError("stage " + std::to_string(j) + " lists a resource twice");
    }
  }

  friend bool operator==(const Pipeline&, const Pipeline&) = default;
};

class JobSet {
public:
  JobSet() = default;

  JobSet(Pipeline pipeline, std::vector<Job> jobs)
      : pipeline_(std::move(pipeline)), jobs_(std::move(jobs)) {
    validate();
  }

  const Pipeline& pipeline() const { return pipeline_; }
  const std::vector<Job>& jobs() const { return jobs_; }
  const Job& job(JobId i) const { return jobs_.at(i); }
  const Job& operator[](JobId i) const { return jobs_[i]; }
  std::size_t size() const { return jobs_.size(); }
  bool empty() const { return jobs_.empty(); }
  std::size_t num_stages() const { return pipeline_.num_stages(); }

  void check_id(JobId i) const {
    if (i >= jobs_.size())
      throw std::out_of_range("job id " + std::to_string(i) + " out of range [0, " +
                              std::to_string(jobs_.size()) + ")");
  }

  /// Job i and job k both occupy the same resource at stage j.
  bool shares_stage(JobId i, JobId k, std::size_t j) const {
    const Job& a = jobs_[i];
    const Job& b = jobs_[k];
    return a.mapping[j] == b.mapping[j] && a.proc[j] > 0 && b.proc[j] > 0;
  }

  /// The closed windows [A, A + D] of the two jobs intersect.
  bool windows_overlap(JobId i, JobId k) const {
    const Job& a = jobs_[i];
    const Job& b = jobs_[k];
    return b.arrival <= a.absolute_deadline() && a.arrival <= b.absolute_deadline();
  }

  Time max_proc() const {
    Time p = 0;
    for (const auto& job : jobs_)
      for (Time t : job.proc) p = std::max(p, t);
    return p;
  }

  JobList all_ids() const {
    JobList ids(jobs_.size());
    for (JobId i = 0; i < ids.size(); ++i) ids[i] = i;
    return ids;
  }

  friend bool operator==(const JobSet&, const JobSet&) = default;

private:
  void validate() const {
    pipeline_.validate();
    const std::size_t n_stages = pipeline_.num_stages();
    for (std::size_t i = 0; i < jobs_.size(); ++i) {
      const Job& job = jobs_[i];
      const std::string who = "job " + std::to_string(i);
      if (job.id != i) throw ModelError(who + ": ids must be 0..n-1 in order");
      if (job.proc.size() != n_stages || job.mapping.size() != n_stages)
        throw ModelError(who + ": expected " + std::to_string(n_stages) + " stages");
      if (job.deadline == 0) throw ModelError(who + ": deadline must be positive");
      for (std::size_t j = 0; j < n_stages; ++j)
        if (!pipeline_.has_resource(j, job.mapping[j]))
          throw ModelError(who + ": resource " + std::to_string(job.mapping[j]) +
                           " is not in the pool of stage " + std::to_string(j));
    }
  }

  Pipeline pipeline_;
  std::vector<Job> jobs_;
};

/// Shared-stage structure of job k as seen from job i.
struct SegmentProfile {
  std::vector<Time> shared_proc;  // P_{k,j} on stages shared with i, else 0
  std::size_t u = 0;              // segments of exactly one stage
  std::size_t v = 0;              // segments of two or more stages
  std::size_t m = 0;              // u + v
  std::size_t w = 0;              // u + 2v: job-additive terms k may contribute

  bool shares_any() const { return m > 0; }
};

/// Run-length scan over the stages the two jobs share.
inline SegmentProfile segment_profile(const JobSet& js, JobId i, JobId k) {
  js.check_id(i);
  js.check_id(k);
  if (i == k) throw std::invalid_argument("segment_profile needs two distinct jobs");

  const std::size_t n_stages = js.num_stages();
  SegmentProfile sp;
  sp.shared_proc.assign(n_stages, 0);
  std::size_t run = 0;
  auto close_run = [&] {
    if (run == 1) ++sp.u;
    else if (run >= 2) ++sp.v;
    run = 0;
  };
  for (std::size_t j = 0; j < n_stages; ++j) {
    if (js.shares_stage(i, k, j)) {
      sp.shared_proc[j] = js[k].proc[j];
      ++run;
    } else {
      close_run();
    }
  }
  close_run();
  sp.m = sp.u + sp.v;
  sp.w = sp.u + 2 * sp.v;
  return sp;
}

/// Per job, the jobs it meets at each stage and in the whole pipeline.
struct CompetitorSets {
  std::vector<std::vector<JobList>> per_stage;  // [i][j] -> M_{i,j}
  std::vector<JobList> any_stage;               // [i] -> M_i

  bool competes(JobId i, JobId k) const {
    return std::binary_search(any_stage[i].begin(), any_stage[i].end(), k);
  }
};

inline CompetitorSets competitor_sets(const JobSet& js) {
  const std::size_t n = js.size();
  const std::size_t n_stages = js.num_stages();
  CompetitorSets cs;
  cs.per_stage.assign(n, std::vector<JobList>(n_stages));
  cs.any_stage.assign(n, {});
  for (JobId i = 0; i < n; ++i) {
    for (JobId k = i + 1; k < n; ++k) {
      bool any = false;
      for (std::size_t j = 0; j < n_stages; ++j) {
        if (js.shares_stage(i, k, j)) {
          cs.per_stage[i][j].push_back(k);
          cs.per_stage[k][j].push_back(i);
          any = true;
        }
      }
      if (any) {
        cs.any_stage[i].push_back(k);
        cs.any_stage[k].push_back(i);
      }
    }
  }
  // Pushes for k happen in increasing i, so every list is already sorted.
  return cs;
}

/// Higher/lower-priority context of one job after removing jobs whose
/// deadline windows cannot overlap with it.
struct InterferenceSets {
  JobId job = 0;
  JobList higher;        // H_i
  JobList lower;         // L_i
  JobList higher_after;  // jobs of H_i arriving strictly after job i
  JobList others;        // every other live job whose window overlaps job i

  JobList q() const {
    JobList out = higher;
    out.insert(std::lower_bound(out.begin(), out.end(), job), job);
    return out;
  }
};

namespace detail {

inline JobList overlap_filtered(const JobSet& js, JobId i, std::span<const JobId> ids) {
  JobList out;
  out.reserve(ids.size());
  for (JobId k : ids) {
    js.check_id(k);
    if (k != i && js.windows_overlap(i, k)) out.push_back(k);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace detail

/// Builds the interference context of job i. `universe` lists the jobs that are
/// still part of the system (all jobs when empty); it only feeds `others`.
inline InterferenceSets interference_sets(const JobSet& js, JobId i,
                                          std::span<const JobId> higher,
                                          std::span<const JobId> lower,
                                          std::span<const JobId> universe = {}) {
  js.check_id(i);
  for (JobId h : higher) {
    if (h == i) throw std::invalid_argument("job appears in its own higher set");
    if (std::find(lower.begin(), lower.end(), h) != lower.end())
      throw std::invalid_argument("job " + std::to_string(h) +
                                  " is in both higher and lower sets");
  }
  for (JobId l : lower)
    if (l == i) throw std::invalid_argument("job appears in its own lower set");

  InterferenceSets s;
  s.job = i;
  s.higher = detail::overlap_filtered(js, i, higher);
  s.lower = detail::overlap_filtered(js, i, lower);
  for (JobId k : s.higher)
    if (js[i].arrival < js[k].arrival) s.higher_after.push_back(k);
  if (universe.empty()) {
    const JobList all = js.all_ids();
    s.others = detail::overlap_filtered(js, i, all);
  } else {
    s.others = detail::overlap_filtered(js, i, universe);
  }
  return s;
}

}  // namespace msmr

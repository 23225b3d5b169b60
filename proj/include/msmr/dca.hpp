#pragma once

// End-to-end delay upper bounds from the delay composition rule. Every bound is
// the sum of job-additive terms (stage times of jobs that may delay job i while
// entering or leaving its path) and stage-additive terms (one maximum per stage
// except the last over the job and its higher-priority competitors), plus
// per-stage blocking terms where lower-priority jobs cannot be preempted.

#include <algorithm>
#include <array>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msmr/model.hpp"

namespace msmr {

class ModeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class BoundMode {
  PreemptiveSingle,     // single resource per stage, preemptive
  NonpreemptiveSingle,  // single resource per stage, non-preemptive
  PreemptiveMulti,      // 2m leading terms per competing job
  NonpreemptiveMulti,   // m leading terms plus blocking over lower-priority jobs
  NonpreemptiveOpa,     // blocking taken over every other job
  PreemptiveRefined,    // u + 2v leading terms per competing job
  EdgeMixed,            // 3 stages: NP offload, P compute, NP download
};

inline constexpr std::array kAllModes = {
    BoundMode::PreemptiveSingle, BoundMode::NonpreemptiveSingle,
    BoundMode::PreemptiveMulti,  BoundMode::NonpreemptiveMulti,
    BoundMode::NonpreemptiveOpa, BoundMode::PreemptiveRefined,
    BoundMode::EdgeMixed,
};

inline std::string_view mode_name(BoundMode mode) {
  switch (mode) {
    case BoundMode::PreemptiveSingle: return "p-single";
    case BoundMode::NonpreemptiveSingle: return "np-single";
    case BoundMode::PreemptiveMulti: return "p-multi";
    case BoundMode::NonpreemptiveMulti: return "np-multi";
    case BoundMode::NonpreemptiveOpa: return "np-opa";
    case BoundMode::PreemptiveRefined: return "p-refined";
    case BoundMode::EdgeMixed: return "edge";
  }
  return "?";
}

inline std::optional<BoundMode> parse_mode(std::string_view name) {
  for (BoundMode m : kAllModes)
    if (mode_name(m) == name) return m;
  return std::nullopt;
}

/// Bounds that depend only on the membership of the higher/lower sets and are
/// monotone under adjacent priority swaps, so Audsley-style assignment is
/// optimal with them.
inline bool is_opa_compatible(BoundMode mode) {
  return mode != BoundMode::NonpreemptiveSingle && mode != BoundMode::NonpreemptiveMulti;
}

inline bool is_single_resource_mode(BoundMode mode) {
  return mode == BoundMode::PreemptiveSingle || mode == BoundMode::NonpreemptiveSingle;
}

/// Modes accepted by the pairwise machinery (bound evaluation from a pair
/// orientation, the exact solver and the repair heuristic).
inline bool is_pairwise_mode(BoundMode mode) {
  return mode == BoundMode::PreemptiveRefined || mode == BoundMode::NonpreemptiveMulti ||
         mode == BoundMode::EdgeMixed;
}

/// Preemption of each stage as assumed by a bound mode.
inline std::vector<bool> preemptive_stages(BoundMode mode, std::size_t n_stages) {
  switch (mode) {
    case BoundMode::PreemptiveSingle:
    case BoundMode::PreemptiveMulti:
    case BoundMode::PreemptiveRefined:
      return std::vector<bool>(n_stages, true);
    case BoundMode::EdgeMixed: {
      std::vector<bool> flags(n_stages, false);
      if (n_stages > 1) flags[1] = true;
      return flags;
    }
    default:
      return std::vector<bool>(n_stages, false);
  }
}

struct JobTerm {
  JobId job = 0;
  Time amount = 0;
  friend bool operator==(const JobTerm&, const JobTerm&) = default;
};

struct DelayBound {
  JobId job = 0;
  Time total = 0;
  std::vector<JobTerm> job_additive;  // one entry per job of Q_i (self included)
  std::vector<Time> stage_additive;   // stages 0..N-2
  std::vector<Time> lower_blocking;   // per stage, non-preemptive modes only
  bool saturated = false;             // the true bound exceeds the Time range

  bool meets(Time deadline) const { return !saturated && total <= deadline; }
};

/// Preemption pattern of the three edge stages.
struct EdgeFlags {
  bool offload_nonpreemptive = true;
  bool compute_preemptive = true;
  bool download_nonpreemptive = true;
};

namespace detail {

inline Time sat_add(Time a, Time b, bool& saturated) {
  if (a > kTimeMax - b) {
    saturated = true;
    return kTimeMax;
  }
  return a + b;
}

inline Time sat_mul(Time a, Time b, bool& saturated) {
  if (a != 0 && b > kTimeMax / a) {
    saturated = true;
    return kTimeMax;
  }
  return a * b;
}

/// Sum of the `count` largest entries; missing entries count as zero.
inline Time sum_top(std::vector<Time> values, std::size_t count, bool& saturated) {
  count = std::min(count, values.size());
  std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(count),
                    values.end(), std::greater<>());
  Time s = 0;
  for (std::size_t x = 0; x < count; ++x) s = sat_add(s, values[x], saturated);
  return s;
}

inline Time max_of(const std::vector<Time>& values) {
  return values.empty() ? 0 : *std::max_element(values.begin(), values.end());
}

/// Stage times of job k that can delay job i, with the segment counts.
struct Contribution {
  std::vector<Time> proc;
  std::size_t m = 0;
  std::size_t w = 0;
};

inline Contribution contribution(const JobSet& js, JobId i, JobId k, bool single) {
  if (k == i) return {js[i].proc, 1, 1};
  if (single) {
    // One resource per stage: every stage is shared, one segment spanning
    // the whole pipeline.
    const std::size_t n_stages = js.num_stages();
    return {js[k].proc, 1, n_stages >= 2 ? 2u : 1u};
  }
  SegmentProfile sp = segment_profile(js, i, k);
  return {std::move(sp.shared_proc), sp.m, sp.w};
}

inline void finish(DelayBound& b) {
  Time t = 0;
  for (const auto& term : b.job_additive) t = sat_add(t, term.amount, b.saturated);
  for (Time s : b.stage_additive) t = sat_add(t, s, b.saturated);
  for (Time s : b.lower_blocking) t = sat_add(t, s, b.saturated);
  b.total = t;
}

inline std::vector<Time> stage_maxima(const JobSet& js, JobId i, const JobList& q,
                                      bool single, std::size_t stages) {
  std::vector<Time> out(stages, 0);
  for (JobId k : q) {
    const Contribution c = contribution(js, i, k, single);
    for (std::size_t j = 0; j < stages; ++j) out[j] = std::max(out[j], c.proc[j]);
  }
  return out;
}

inline std::vector<Time> blocking(const JobSet& js, JobId i, const JobList& set, bool single,
                                  const std::vector<bool>& stage_mask) {
  std::vector<Time> out(js.num_stages(), 0);
  for (JobId k : set) {
    const Contribution c = contribution(js, i, k, single);
    for (std::size_t j = 0; j < out.size(); ++j)
      if (stage_mask[j]) out[j] = std::max(out[j], c.proc[j]);
  }
  return out;
}

}  // namespace detail

/// Delay bound of job `i` given its interference context.
inline DelayBound bound_edge(const JobSet& js, JobId i, const InterferenceSets& sets,
                             EdgeFlags flags = {});

inline DelayBound bound(const JobSet& js, JobId i, const InterferenceSets& sets,
                        BoundMode mode) {
  js.check_id(i);
  if (sets.job != i) throw std::invalid_argument("interference sets belong to another job");
  if (mode == BoundMode::EdgeMixed) return bound_edge(js, i, sets);
  const bool single = is_single_resource_mode(mode);
  if (single && !js.pipeline().single_resource())
    throw ModeError(std::string(mode_name(mode)) +
                    " requires exactly one resource per stage");

  const std::size_t n_stages = js.num_stages();
  const JobList q = sets.q();
  DelayBound b;
  b.job = i;

  for (JobId k : q) {
    const detail::Contribution c = detail::contribution(js, i, k, single);
    if (k == i) {
      // The job delays itself by its longest stage in every mode.
      b.job_additive.push_back({k, detail::max_of(c.proc)});
      continue;
    }
    Time amount = 0;
    switch (mode) {
      case BoundMode::PreemptiveSingle: {
        const bool after =
            std::binary_search(sets.higher_after.begin(), sets.higher_after.end(), k);
        amount = detail::sum_top(c.proc, after ? 2 : 1, b.saturated);
        break;
      }
      case BoundMode::NonpreemptiveSingle:
        amount = detail::sum_top(c.proc, 1, b.saturated);
        break;
      case BoundMode::PreemptiveMulti:
        amount = detail::sat_mul(2 * c.m, detail::max_of(c.proc), b.saturated);
        break;
      case BoundMode::NonpreemptiveMulti:
      case BoundMode::NonpreemptiveOpa:
        amount = detail::sat_mul(c.m, detail::max_of(c.proc), b.saturated);
        break;
      case BoundMode::PreemptiveRefined:
        amount = detail::sum_top(c.proc, c.w, b.saturated);
        break;
      case BoundMode::EdgeMixed:
        break;
    }
    b.job_additive.push_back({k, amount});
  }

  b.stage_additive = detail::stage_maxima(js, i, q, single, n_stages - 1);

  const std::vector<bool> all_stages(n_stages, true);
  if (mode == BoundMode::NonpreemptiveSingle || mode == BoundMode::NonpreemptiveMulti)
    b.lower_blocking = detail::blocking(js, i, sets.lower, single, all_stages);
  else if (mode == BoundMode::NonpreemptiveOpa)
    b.lower_blocking = detail::blocking(js, i, sets.others, single, all_stages);

  detail::finish(b);
  return b;
}

/// Three-stage edge pipeline: refined job-additive terms, stage maxima on the
/// first two stages, and one blocking term over lower-priority jobs for every
/// non-preemptive stage after the first. Jobs are released in batches, so no
/// higher-priority job joins after job i and the first stage sees no blocking.
inline DelayBound bound_edge(const JobSet& js, JobId i, const InterferenceSets& sets,
                             EdgeFlags flags) {
  js.check_id(i);
  if (js.num_stages() != 3)
    throw ModeError("edge bound requires a 3-stage pipeline, got " +
                    std::to_string(js.num_stages()));
  if (sets.job != i) throw std::invalid_argument("interference sets belong to another job");

  const JobList q = sets.q();
  DelayBound b;
  b.job = i;
  for (JobId k : q) {
    const detail::Contribution c = detail::contribution(js, i, k, false);
    const std::size_t terms = k == i ? 1 : c.w;
    b.job_additive.push_back({k, detail::sum_top(c.proc, terms, b.saturated)});
  }
  b.stage_additive = detail::stage_maxima(js, i, q, false, 2);
  const std::vector<bool> mask = {false, !flags.compute_preemptive,
                                  flags.download_nonpreemptive};
  b.lower_blocking = detail::blocking(js, i, sets.lower, false, mask);
  detail::finish(b);
  return b;
}

/// Convenience: bound of `i` with explicit higher/lower sets.
inline DelayBound bound(const JobSet& js, JobId i, std::span<const JobId> higher,
                        std::span<const JobId> lower, BoundMode mode,
                        std::span<const JobId> universe = {}) {
  return bound(js, i, interference_sets(js, i, higher, lower, universe), mode);
}

}  // namespace msmr

#pragma once

// Priority assignment on top of the delay bounds:
//  - sdca: the feasibility predicate "bound <= deadline" for one job;
//  - opdca: Audsley's lowest-priority-first assignment with sdca;
//  - dm_pairwise / dmr: deadline-monotonic pair orientation and its repair;
//  - *_admission: variants that discard the worst job instead of giving up.

#include <algorithm>
#include <numeric>

#include "msmr/assignment.hpp"
#include "msmr/dca.hpp"
#include "msmr/model.hpp"
#include "msmr/pairwise_bound.hpp"

namespace msmr::assign {

inline bool sdca(const JobSet& js, JobId i, std::span<const JobId> higher,
                 std::span<const JobId> lower, BoundMode mode,
                 std::span<const JobId> universe = {}) {
  return bound(js, i, higher, lower, mode, universe).meets(js[i].deadline);
}

namespace detail {

/// Signed amount by which a bound misses the deadline; saturated bounds rank
/// above everything.
inline __int128 excess(const DelayBound& b, Time deadline) {
  if (b.saturated) return static_cast<__int128>(kTimeMax) * 2;
  return static_cast<__int128>(b.total) - static_cast<__int128>(deadline);
}

/// Lowest id among the jobs with the largest excess.
inline JobId worst_job(std::span<const JobId> candidates,
                       const std::vector<std::optional<DelayBound>>& bounds,
                       const JobSet& js) {
  JobId worst = candidates.front();
  __int128 worst_excess = excess(*bounds[worst], js[worst].deadline);
  for (JobId k : candidates) {
    const __int128 e = excess(*bounds[k], js[k].deadline);
    if (e > worst_excess) {
      worst = k;
      worst_excess = e;
    }
  }
  return worst;
}

inline void erase_id(JobList& list, JobId id) {
  list.erase(std::remove(list.begin(), list.end(), id), list.end());
}

inline AssignmentOutcome opdca_impl(const JobSet& js, BoundMode mode, bool admission) {
  if (!is_opa_compatible(mode))
    throw ModeError(std::string(mode_name(mode)) +
                    " is not OPA-compatible: its bound can drop when a job gains a "
                    "higher-priority competitor");
  AssignmentOutcome out;
  out.bounds.assign(js.size(), std::nullopt);

  JobList unassigned = js.all_ids();
  JobList universe = unassigned;
  JobList lowest_first;  // the lower set of the next job to be placed

  while (!unassigned.empty()) {
    bool placed = false;
    for (JobId i : unassigned) {
      JobList higher = unassigned;
      erase_id(higher, i);
      DelayBound b = bound(js, i, higher, lowest_first, mode, universe);
      const bool ok = b.meets(js[i].deadline);
      out.bounds[i] = std::move(b);
      if (ok) {
        lowest_first.push_back(i);
        erase_id(unassigned, i);
        placed = true;
        break;
      }
    }
    if (placed) continue;
    if (!admission) {
      out.status = Verdict::Infeasible;
      return out;
    }
    // Every unassigned job got a bound in the scan above.
    const JobId worst = worst_job(unassigned, out.bounds, js);
    erase_id(unassigned, worst);
    erase_id(universe, worst);
    out.bounds[worst].reset();
    out.rejected.push_back(worst);
  }

  JobList order(lowest_first.rbegin(), lowest_first.rend());
  PriorityOrdering ordering(order);
  // Final bounds from scratch over the surviving jobs.
  out.bounds.assign(js.size(), std::nullopt);
  bool all_ok = true;
  for (JobId i : order) {
    DelayBound b = bound(js, i, ordering.higher_than(i), ordering.lower_than(i), mode, universe);
    all_ok = all_ok && b.meets(js[i].deadline);
    out.bounds[i] = std::move(b);
  }
  out.accepted = universe;
  out.result = std::move(ordering);
  out.status = all_ok ? Verdict::Feasible : Verdict::Infeasible;
  return out;
}

}  // namespace detail

/// Audsley-style assignment from the lowest priority upwards. At each level the
/// first unassigned job (ascending id) that is feasible with every other
/// unassigned job above it takes the level.
inline AssignmentOutcome opdca(const JobSet& js, BoundMode mode) {
  return detail::opdca_impl(js, mode, false);
}

/// Like opdca, but when no job fits a level the unassigned job with the largest
/// bound-minus-deadline is discarded and the level is retried.
inline AssignmentOutcome opdca_admission(const JobSet& js, BoundMode mode) {
  return detail::opdca_impl(js, mode, true);
}

/// Deadline-monotonic orientation of every competing pair; equal deadlines go
/// to the lower id.
inline PairwiseAssignment dm_pairwise(const JobSet& js, const CompetitorSets& cs) {
  PairwiseAssignment x(js.size());
  for (JobId i = 0; i < js.size(); ++i)
    for (JobId k : cs.any_stage[i]) {
      if (k <= i) continue;
      if (js[i].deadline <= js[k].deadline) x.set_higher(i, k);
      else x.set_higher(k, i);
    }
  return x;
}

inline PairwiseAssignment dm_pairwise(const JobSet& js) {
  return dm_pairwise(js, competitor_sets(js));
}

/// Bounds of the given jobs under a pairwise assignment, all from scratch.
inline std::vector<std::optional<DelayBound>> pairwise_bounds(
    const JobSet& js, const CompetitorSets& cs, const PairwiseAssignment& x, BoundMode mode,
    std::span<const JobId> universe) {
  std::vector<std::optional<DelayBound>> out(js.size());
  for (JobId i : universe)
    out[i] = opt::pairwise_bound(js, cs, x, i, mode, opt::Polarity::Pessimistic, universe);
  return out;
}

inline bool all_meet(const JobSet& js, const std::vector<std::optional<DelayBound>>& bounds,
                     std::span<const JobId> jobs) {
  return std::all_of(jobs.begin(), jobs.end(),
                     [&](JobId i) { return bounds[i] && bounds[i]->meets(js[i].deadline); });
}

/// Deadline-monotonic pair orientation evaluated as is (no repair).
inline AssignmentOutcome dm(const JobSet& js, BoundMode mode) {
  opt::require_pairwise_mode(mode);
  const CompetitorSets cs = competitor_sets(js);
  const JobList all = js.all_ids();
  AssignmentOutcome out;
  PairwiseAssignment x = dm_pairwise(js, cs);
  out.bounds = pairwise_bounds(js, cs, x, mode, all);
  out.status = all_meet(js, out.bounds, all) ? Verdict::Feasible : Verdict::Infeasible;
  out.accepted = all;
  out.result = std::move(x);
  return out;
}

/// dm that discards the job with the largest bound-minus-deadline until the
/// survivors all meet their deadlines.
inline AssignmentOutcome dm_admission(const JobSet& js, BoundMode mode) {
  opt::require_pairwise_mode(mode);
  const CompetitorSets cs = competitor_sets(js);
  PairwiseAssignment x = dm_pairwise(js, cs);
  JobList active = js.all_ids();
  AssignmentOutcome out;
  for (;;) {
    out.bounds = pairwise_bounds(js, cs, x, mode, active);
    if (all_meet(js, out.bounds, active)) break;
    const JobId worst = detail::worst_job(active, out.bounds, js);
    detail::erase_id(active, worst);
    out.rejected.push_back(worst);
  }
  for (JobId r : out.rejected)
    for (JobId k : cs.any_stage[r]) x.clear(r, k);
  out.status = Verdict::Feasible;
  out.accepted = active;
  out.result = std::move(x);
  return out;
}

namespace detail {

inline AssignmentOutcome dmr_impl(const JobSet& js, BoundMode mode, bool admission) {
  opt::require_pairwise_mode(mode);
  const CompetitorSets cs = competitor_sets(js);
  PairwiseAssignment x = dm_pairwise(js, cs);
  JobList active = js.all_ids();
  AssignmentOutcome out;

  auto eval = [&](JobId i) {
    return opt::pairwise_bound(js, cs, x, i, mode, opt::Polarity::Pessimistic, active);
  };

  bool repaired = false;
  while (!repaired) {
    out.bounds = pairwise_bounds(js, cs, x, mode, active);
    std::optional<JobId> stuck;
    for (JobId i : active) {
      if (out.bounds[i]->meets(js[i].deadline)) continue;

      // Competitors above i with strictly positive slack, most slack first.
      std::vector<std::pair<Time, JobId>> candidates;
      for (JobId k : cs.any_stage[i]) {
        if (!std::binary_search(active.begin(), active.end(), k) || !x.higher(k, i)) continue;
        const DelayBound& bk = *out.bounds[k];
        if (!bk.saturated && bk.total < js[k].deadline)
          candidates.emplace_back(js[k].deadline - bk.total, k);
      }
      std::stable_sort(candidates.begin(), candidates.end(),
                       [](const auto& a, const auto& b) { return a.first > b.first; });

      for (const auto& [slack, k] : candidates) {
        x.set_higher(i, k);
        DelayBound bk = eval(k);
        if (bk.meets(js[k].deadline)) {
          out.bounds[k] = std::move(bk);
          out.flips.push_back({i, k});
          out.bounds[i] = eval(i);
          if (out.bounds[i]->meets(js[i].deadline)) break;
        } else {
          x.set_higher(k, i);
        }
      }
      if (!out.bounds[i]->meets(js[i].deadline)) {
        stuck = i;
        break;
      }
    }

    if (!stuck) {
      repaired = true;
    } else if (!admission) {
      out.status = Verdict::Infeasible;
      out.accepted = active;
      out.result = std::move(x);
      return out;
    } else {
      const JobId worst = worst_job(active, out.bounds, js);
      erase_id(active, worst);
      out.rejected.push_back(worst);
    }
  }

  // Restrict the assignment to the surviving jobs and validate from scratch.
  for (JobId r : out.rejected)
    for (JobId k : cs.any_stage[r]) x.clear(r, k);
  out.bounds = pairwise_bounds(js, cs, x, mode, active);
  out.status = all_meet(js, out.bounds, active) ? Verdict::Feasible : Verdict::Infeasible;
  out.accepted = active;
  out.result = std::move(x);
  return out;
}

}  // namespace detail

/// Deadline-monotonic pair orientation followed by a repair pass: a violating
/// job takes priority over competitors with slack, most slack first, as long as
/// each reversal keeps the competitor feasible.
inline AssignmentOutcome dmr(const JobSet& js, BoundMode mode) {
  return detail::dmr_impl(js, mode, false);
}

/// dmr that discards the job with the largest bound-minus-deadline whenever a
/// violation cannot be repaired, then restarts the repair pass.
inline AssignmentOutcome dmr_admission(const JobSet& js, BoundMode mode) {
  return detail::dmr_impl(js, mode, true);
}

}  // namespace msmr::assign

#pragma once

// Delay bound of a job under a (possibly partial) pairwise priority assignment.
// The higher set of job i is every competitor k with k over i; the lower set is
// every competitor i is over. Undecided pairs are resolved by a polarity.

#include "msmr/assignment.hpp"
#include "msmr/dca.hpp"
#include "msmr/model.hpp"

namespace msmr::opt {

enum class Polarity {
  /// Undecided competitors are left out of both sets: a lower bound on every
  /// completion of the assignment.
  Optimistic,
  /// Undecided competitors are counted in both sets: an upper bound on every
  /// completion.
  Pessimistic,
};

inline void require_pairwise_mode(BoundMode mode) {
  if (!is_pairwise_mode(mode))
    throw ModeError(std::string(mode_name(mode)) +
                    " is not supported for pairwise assignment (use p-refined, np-multi "
                    "or edge)");
}

inline InterferenceSets pairwise_sets(const JobSet& js, const CompetitorSets& cs,
                                      const PairwiseAssignment& x, JobId i,
                                      Polarity polarity, std::span<const JobId> universe = {}) {
  JobList higher;
  JobList lower;
  for (JobId k : cs.any_stage[i]) {
    if (!universe.empty() && !std::binary_search(universe.begin(), universe.end(), k))
      continue;
    switch (x.relation(k, i)) {
      case Relation::Higher: higher.push_back(k); break;
      case Relation::Lower: lower.push_back(k); break;
      case Relation::Undecided:
        if (polarity == Polarity::Pessimistic) {
          higher.push_back(k);
          lower.push_back(k);
        }
        break;
    }
  }
  InterferenceSets s;
  s.job = i;
  s.higher = detail::overlap_filtered(js, i, higher);
  s.lower = detail::overlap_filtered(js, i, lower);
  for (JobId k : s.higher)
    if (js[i].arrival < js[k].arrival) s.higher_after.push_back(k);
  return s;
}

inline DelayBound pairwise_bound(const JobSet& js, const CompetitorSets& cs,
                                 const PairwiseAssignment& x, JobId i, BoundMode mode,
                                 Polarity polarity = Polarity::Pessimistic,
                                 std::span<const JobId> universe = {}) {
  require_pairwise_mode(mode);
  js.check_id(i);
  return bound(js, i, pairwise_sets(js, cs, x, i, polarity, universe), mode);
}

inline DelayBound pairwise_bound(const JobSet& js, const PairwiseAssignment& x, JobId i,
                                 BoundMode mode, Polarity polarity = Polarity::Pessimistic) {
  return pairwise_bound(js, competitor_sets(js), x, i, mode, polarity);
}

}  // namespace msmr::opt

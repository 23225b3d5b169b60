#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "msmr/dca.hpp"
#include "msmr/model.hpp"

namespace msmr {

/// Total order over (a subset of) the jobs, highest priority first.
class PriorityOrdering {
public:
  PriorityOrdering() = default;
  explicit PriorityOrdering(JobList order) : order_(std::move(order)) {
    auto sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("priority ordering lists a job twice");
  }

  /// Builds an ordering from ranks: rho[i] in [1, n], 1 = highest.
  static PriorityOrdering from_ranks(const std::vector<std::size_t>& rho) {
    JobList order(rho.size(), rho.size());
    for (JobId i = 0; i < rho.size(); ++i) {
      if (rho[i] < 1 || rho[i] > rho.size() || order[rho[i] - 1] != rho.size())
        throw std::invalid_argument("ranks are not a permutation of 1..n");
      order[rho[i] - 1] = i;
    }
    return PriorityOrdering(std::move(order));
  }

  const JobList& order() const { return order_; }
  std::size_t size() const { return order_.size(); }

  /// 1-based rank of job i, or nullopt when the job is not ordered.
  std::optional<std::size_t> rank(JobId i) const {
    auto it = std::find(order_.begin(), order_.end(), i);
    if (it == order_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - order_.begin()) + 1;
  }

  JobList higher_than(JobId i) const {
    auto it = std::find(order_.begin(), order_.end(), i);
    if (it == order_.end()) throw std::invalid_argument("job is not ordered");
    return JobList(order_.begin(), it);
  }

  JobList lower_than(JobId i) const {
    auto it = std::find(order_.begin(), order_.end(), i);
    if (it == order_.end()) throw std::invalid_argument("job is not ordered");
    return JobList(it + 1, order_.end());
  }

  friend bool operator==(const PriorityOrdering&, const PriorityOrdering&) = default;

private:
  JobList order_;
};

enum class Relation : std::int8_t { Undecided = 0, Higher = 1, Lower = -1 };

/// Orientation of job pairs: for a pair {i, k}, either i has priority over k
/// or k over i. Stored densely; one direction implies the other.
class PairwiseAssignment {
public:
  PairwiseAssignment() = default;
  explicit PairwiseAssignment(std::size_t n) : n_(n), rel_(n * n, 0) {}

  std::size_t num_jobs() const { return n_; }

  /// Relation of i towards k: Higher means i has priority over k.
  Relation relation(JobId i, JobId k) const {
    return static_cast<Relation>(rel_[i * n_ + k]);
  }
  bool decided(JobId i, JobId k) const { return rel_[i * n_ + k] != 0; }
  bool higher(JobId i, JobId k) const { return relation(i, k) == Relation::Higher; }

  void set_higher(JobId winner, JobId loser) {
    if (winner == loser || winner >= n_ || loser >= n_)
      throw std::invalid_argument("invalid pair in pairwise assignment");
    rel_[winner * n_ + loser] = 1;
    rel_[loser * n_ + winner] = -1;
  }

  void clear(JobId i, JobId k) {
    rel_[i * n_ + k] = 0;
    rel_[k * n_ + i] = 0;
  }

  struct Pair {
    JobId winner;
    JobId loser;
    friend bool operator==(const Pair&, const Pair&) = default;
  };

  /// Decided pairs, scanned with i < k.
  std::vector<Pair> pairs() const {
    std::vector<Pair> out;
    for (JobId i = 0; i < n_; ++i)
      for (JobId k = i + 1; k < n_; ++k) {
        if (!decided(i, k)) continue;
        out.push_back(higher(i, k) ? Pair{i, k} : Pair{k, i});
      }
    return out;
  }

  /// Orientation induced by a total ordering on the given competing pairs.
  static PairwiseAssignment from_ordering(const JobSet& js, const CompetitorSets& cs,
                                          const PriorityOrdering& ordering) {
    PairwiseAssignment x(js.size());
    for (JobId i = 0; i < js.size(); ++i) {
      const auto ri = ordering.rank(i);
      for (JobId k : cs.any_stage[i]) {
        if (k <= i) continue;
        const auto rk = ordering.rank(k);
        if (!ri || !rk) continue;
        if (*ri < *rk) x.set_higher(i, k);
        else x.set_higher(k, i);
      }
    }
    return x;
  }

  friend bool operator==(const PairwiseAssignment&, const PairwiseAssignment&) = default;

private:
  std::size_t n_ = 0;
  std::vector<std::int8_t> rel_;
};

enum class Verdict { Feasible, Infeasible, Unknown };

inline std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Feasible: return "feasible";
    case Verdict::Infeasible: return "infeasible";
    case Verdict::Unknown: return "unknown";
  }
  return "?";
}

/// One priority reversal made by the repair heuristic: `loser` used to have
/// priority over `winner`.
struct Flip {
  JobId winner = 0;
  JobId loser = 0;
  friend bool operator==(const Flip&, const Flip&) = default;
};

struct AssignmentOutcome {
  Verdict status = Verdict::Infeasible;
  std::variant<std::monostate, PriorityOrdering, PairwiseAssignment> result;
  std::vector<std::optional<DelayBound>> bounds;  // indexed by job id
  JobList accepted;                // sorted ascending
  JobList rejected;                // in rejection order
  std::vector<Flip> flips;
  std::vector<Time> observed;      // simulated end-to-end delays, when simulated
  std::size_t nodes = 0;           // search nodes, exact solver only

  bool feasible() const { return status == Verdict::Feasible; }
  const PriorityOrdering* ordering() const { return std::get_if<PriorityOrdering>(&result); }
  const PairwiseAssignment* pairwise() const {
    return std::get_if<PairwiseAssignment>(&result);
  }
};

}  // namespace msmr

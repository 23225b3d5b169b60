#pragma once

// Exact pairwise priority assignment. Each competing pair {i, k} is a binary
// orientation variable; a job's delay bound depends on which of its
// competitors are above it (job-additive and stage maxima) and, for
// non-preemptive stages, which are below it (blocking). The search is a
// depth-first branch-and-bound with forced-orientation propagation.
//
// The same feasibility program can be exported as a mixed-integer linear
// program in CPLEX LP text format.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msmr/assign.hpp"
#include "msmr/assignment.hpp"
#include "msmr/dca.hpp"
#include "msmr/model.hpp"
#include "msmr/pairwise_bound.hpp"

namespace msmr::opt {

inline constexpr std::size_t kDefaultNodeBudget = 1'000'000;

struct SolveOptions {
  std::size_t node_budget = kDefaultNodeBudget;
  /// Complete assignments tried before searching, e.g. the orientation induced
  /// by an OPDCA ordering or a DMR result.
  std::vector<PairwiseAssignment> hints;
};

namespace detail {

/// Precomputed interference terms of one job, per competitor.
struct Competitor {
  JobId job;
  Time additive;           // job-additive amount when above the job
  std::vector<Time> proc;  // shared stage times
};

struct JobTerms {
  Time self = 0;
  std::vector<Time> own_proc;
  std::vector<Competitor> comps;
};

enum class Extra { None, Higher, Lower };

/// Fast evaluation of the pairwise bound with one tentative orientation.
class Evaluator {
public:
  Evaluator(const JobSet& js, const CompetitorSets& cs, BoundMode mode) : js_(js) {
    require_pairwise_mode(mode);
    const std::size_t n_stages = js.num_stages();
    if (mode == BoundMode::EdgeMixed && n_stages != 3)
      throw ModeError("edge bound requires a 3-stage pipeline");
    stage_terms_ = n_stages - 1;
    block_mask_.assign(n_stages, false);
    if (mode == BoundMode::NonpreemptiveMulti) block_mask_.assign(n_stages, true);
    if (mode == BoundMode::EdgeMixed) block_mask_[2] = true;

    terms_.resize(js.size());
    bool sat = false;
    for (JobId i = 0; i < js.size(); ++i) {
      JobTerms& t = terms_[i];
      t.own_proc = js[i].proc;
      t.self = msmr::detail::max_of(t.own_proc);
      for (JobId k : cs.any_stage[i]) {
        if (!js.windows_overlap(i, k)) continue;
        SegmentProfile sp = segment_profile(js, i, k);
        Time add = mode == BoundMode::NonpreemptiveMulti
                       ? msmr::detail::sat_mul(sp.m, msmr::detail::max_of(sp.shared_proc), sat)
                       : msmr::detail::sum_top(sp.shared_proc, sp.w, sat);
        t.comps.push_back({k, add, std::move(sp.shared_proc)});
      }
    }
    if (sat) throw std::overflow_error("job-additive term exceeds the time range");
  }

  const JobTerms& terms(JobId i) const { return terms_[i]; }

  /// Bound of job i; `extra` places job `other` on one side regardless of x.
  /// Saturates at kTimeMax.
  Time eval(const PairwiseAssignment& x, JobId i, Polarity pol, JobId other = 0,
            Extra extra = Extra::None) const {
    const JobTerms& t = terms_[i];
    bool sat = false;
    Time total = t.self;
    stage_.assign(t.own_proc.begin(), t.own_proc.begin() + static_cast<std::ptrdiff_t>(stage_terms_));
    block_.assign(t.own_proc.size(), 0);
    for (const Competitor& c : t.comps) {
      bool above = false;
      bool below = false;
      if (extra != Extra::None && c.job == other) {
        above = extra == Extra::Higher;
        below = extra == Extra::Lower;
      } else {
        switch (x.relation(c.job, i)) {
          case Relation::Higher: above = true; break;
          case Relation::Lower: below = true; break;
          case Relation::Undecided:
            above = below = pol == Polarity::Pessimistic;
            break;
        }
      }
      if (above) {
        total = msmr::detail::sat_add(total, c.additive, sat);
        for (std::size_t j = 0; j < stage_terms_; ++j) stage_[j] = std::max(stage_[j], c.proc[j]);
      }
      if (below)
        for (std::size_t j = 0; j < block_.size(); ++j)
          if (block_mask_[j]) block_[j] = std::max(block_[j], c.proc[j]);
    }
    for (Time s : stage_) total = msmr::detail::sat_add(total, s, sat);
    for (Time s : block_) total = msmr::detail::sat_add(total, s, sat);
    return sat ? kTimeMax : total;
  }

  bool meets(Time value, JobId i) const {
    return value != kTimeMax && value <= js_[i].deadline;
  }

private:
  const JobSet& js_;
  std::size_t stage_terms_ = 0;
  std::vector<bool> block_mask_;
  std::vector<JobTerms> terms_;
  mutable std::vector<Time> stage_;
  mutable std::vector<Time> block_;
};

struct PairVar {
  JobId i;  // i < k
  JobId k;
};

class Search {
public:
  Search(const JobSet& js, const CompetitorSets& cs, BoundMode mode, std::size_t budget)
      : js_(js), eval_(js, cs, mode), budget_(budget), x_(js.size()) {
    for (JobId i = 0; i < js.size(); ++i)
      for (JobId k : cs.any_stage[i])
        if (k > i && js.windows_overlap(i, k)) vars_.push_back({i, k});
  }

  const Evaluator& evaluator() const { return eval_; }

  /// Every job meets its deadline under the complete assignment `x`.
  bool validates(const PairwiseAssignment& x) const {
    for (JobId i = 0; i < js_.size(); ++i)
      if (!eval_.meets(eval_.eval(x, i, Polarity::Pessimistic), i)) return false;
    return true;
  }

  Verdict run() {
    bool out_of_budget = false;
    const bool found = dfs(out_of_budget);
    if (found) return Verdict::Feasible;
    return out_of_budget ? Verdict::Unknown : Verdict::Infeasible;
  }

  const PairwiseAssignment& witness() const { return x_; }
  std::size_t nodes() const { return nodes_; }

private:
  enum class Side { Neither, IOverK, KOverI, Both };

  /// Which orientations of an undecided pair keep both jobs optimistically feasible.
  Side admissible(const PairVar& v) const {
    const bool k_over_i =
        eval_.meets(eval_.eval(x_, v.i, Polarity::Optimistic, v.k, Extra::Higher), v.i) &&
        eval_.meets(eval_.eval(x_, v.k, Polarity::Optimistic, v.i, Extra::Lower), v.k);
    const bool i_over_k =
        eval_.meets(eval_.eval(x_, v.k, Polarity::Optimistic, v.i, Extra::Higher), v.k) &&
        eval_.meets(eval_.eval(x_, v.i, Polarity::Optimistic, v.k, Extra::Lower), v.i);
    if (k_over_i && i_over_k) return Side::Both;
    if (k_over_i) return Side::KOverI;
    if (i_over_k) return Side::IOverK;
    return Side::Neither;
  }

  /// Fixes forced orientations until nothing changes; false on a dead end.
  bool propagate(std::vector<PairVar>& trail) {
    for (JobId i = 0; i < js_.size(); ++i)
      if (!eval_.meets(eval_.eval(x_, i, Polarity::Optimistic), i)) return false;
    bool changed = true;
    while (changed) {
      changed = false;
      for (const PairVar& v : vars_) {
        if (x_.decided(v.i, v.k)) continue;
        switch (admissible(v)) {
          case Side::Neither: return false;
          case Side::IOverK:
            x_.set_higher(v.i, v.k);
            trail.push_back(v);
            changed = true;
            break;
          case Side::KOverI:
            x_.set_higher(v.k, v.i);
            trail.push_back(v);
            changed = true;
            break;
          case Side::Both: break;
        }
      }
    }
    return true;
  }

  void undo(std::vector<PairVar>& trail) {
    for (const PairVar& v : trail) x_.clear(v.i, v.k);
    trail.clear();
  }

  bool dfs(bool& out_of_budget) {
    if (nodes_ >= budget_) {
      out_of_budget = true;
      return false;
    }
    ++nodes_;
    std::vector<PairVar> trail;
    if (!propagate(trail)) {
      undo(trail);
      return false;
    }

    std::vector<bool> unsafe(js_.size(), false);
    bool all_safe = true;
    for (JobId i = 0; i < js_.size(); ++i) {
      unsafe[i] = !eval_.meets(eval_.eval(x_, i, Polarity::Pessimistic), i);
      all_safe = all_safe && !unsafe[i];
    }
    if (all_safe) {
      // Any completion works; orient the rest towards the lower id.
      for (const PairVar& v : vars_)
        if (!x_.decided(v.i, v.k)) x_.set_higher(v.i, v.k);
      return true;
    }

    // Branch on the pair whose orientation moves some optimistic bound the most.
    std::optional<PairVar> pick;
    Time best_swing = 0;
    bool k_first = false;
    for (const PairVar& v : vars_) {
      if (x_.decided(v.i, v.k) || (!unsafe[v.i] && !unsafe[v.k])) continue;
      const Time base_i = eval_.eval(x_, v.i, Polarity::Optimistic);
      const Time base_k = eval_.eval(x_, v.k, Polarity::Optimistic);
      const Time up_i = eval_.eval(x_, v.i, Polarity::Optimistic, v.k, Extra::Higher);
      const Time up_k = eval_.eval(x_, v.k, Polarity::Optimistic, v.i, Extra::Higher);
      const Time swing = std::max(up_i - base_i, up_k - base_k);
      if (!pick || swing > best_swing) {
        pick = v;
        best_swing = swing;
        // Try first the orientation that leaves the losing job more slack.
        const auto slack = [&](Time value, JobId j) {
          return static_cast<__int128>(js_[j].deadline) - static_cast<__int128>(value);
        };
        k_first = slack(up_i, v.i) > slack(up_k, v.k);
      }
    }
    if (!pick) {
      // Unsafe jobs but nothing left to decide: cannot happen once every pair
      // is decided, since then optimistic and pessimistic bounds coincide.
      undo(trail);
      return false;
    }

    for (int branch = 0; branch < 2; ++branch) {
      const bool k_wins = (branch == 0) == k_first;
      if (k_wins) x_.set_higher(pick->k, pick->i);
      else x_.set_higher(pick->i, pick->k);
      if (dfs(out_of_budget)) return true;
      x_.clear(pick->i, pick->k);
      if (out_of_budget) break;
    }
    undo(trail);
    return false;
  }

  const JobSet& js_;
  Evaluator eval_;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  PairwiseAssignment x_;
  std::vector<PairVar> vars_;
};

}  // namespace detail

/// Orients the competing pairs whose deadline windows do not overlap (they
/// never affect a bound) towards the lower id.
inline void complete_inert_pairs(const JobSet& js, const CompetitorSets& cs,
                                 PairwiseAssignment& x) {
  for (JobId i = 0; i < js.size(); ++i)
    for (JobId k : cs.any_stage[i])
      if (k > i && !x.decided(i, k)) x.set_higher(i, k);
}

/// Decides whether some orientation of all competing pairs meets every
/// deadline. Returns Unknown when the node budget runs out first.
inline AssignmentOutcome solve_exact(const JobSet& js, BoundMode mode,
                                     const SolveOptions& options = {}) {
  require_pairwise_mode(mode);
  const CompetitorSets cs = competitor_sets(js);
  detail::Search search(js, cs, mode, options.node_budget);
  const JobList all = js.all_ids();

  auto finish = [&](PairwiseAssignment x, std::size_t nodes) {
    complete_inert_pairs(js, cs, x);
    AssignmentOutcome out;
    out.bounds = assign::pairwise_bounds(js, cs, x, mode, all);
    out.status = assign::all_meet(js, out.bounds, all) ? Verdict::Feasible : Verdict::Infeasible;
    out.accepted = all;
    out.nodes = nodes;
    out.result = std::move(x);
    return out;
  };

  for (const PairwiseAssignment& hint : options.hints)
    if (hint.num_jobs() == js.size() && search.validates(hint)) return finish(hint, 0);

  const Verdict v = search.run();
  if (v == Verdict::Feasible) return finish(search.witness(), search.nodes());
  AssignmentOutcome out;
  out.status = v;
  out.nodes = search.nodes();
  return out;
}

/// Variable and row counts of an exported program.
struct LpCensus {
  std::size_t order_vars = 0;     // X_i_k, both directions of every pair
  std::size_t antisymmetry_rows = 0;
  std::size_t stage_max_vars = 0;  // theta_i_j
  std::size_t selector_vars = 0;   // b_i_j_y
  std::size_t blocking_vars = 0;   // lambda_i_j
  std::size_t deadline_rows = 0;
};

struct LpProgram {
  std::string text;
  LpCensus census;
};

namespace detail {

inline std::string xvar(JobId a, JobId b) {
  return "X_" + std::to_string(a) + "_" + std::to_string(b);
}

inline std::string stage_var(const char* prefix, JobId i, std::size_t j) {
  return std::string(prefix) + "_" + std::to_string(i) + "_" + std::to_string(j);
}

}  // namespace detail

/// Feasibility program over the pair orientations: X_i_k = 1 when job i is
/// above job k, theta_i_j is the stage maximum over job i and its
/// higher-priority competitors (linearised with one-hot selectors b and a
/// big-M equal to the largest stage time), lambda_i_j the blocking by
/// lower-priority competitors on non-preemptive stages, and one deadline row
/// per job. The objective is constant.
inline LpProgram export_lp(const JobSet& js, BoundMode mode) {
  require_pairwise_mode(mode);
  if (mode == BoundMode::EdgeMixed && js.num_stages() != 3)
    throw ModeError("edge bound requires a 3-stage pipeline");
  const CompetitorSets cs = competitor_sets(js);
  const std::size_t n_stages = js.num_stages();
  const Time big_m = js.max_proc();
  std::vector<bool> block_mask(n_stages, false);
  if (mode == BoundMode::NonpreemptiveMulti) block_mask.assign(n_stages, true);
  if (mode == BoundMode::EdgeMixed) block_mask[2] = true;

  LpProgram lp;
  std::ostringstream rows;
  std::vector<std::string> binaries;
  std::vector<std::string> fixed_zero;

  for (JobId i = 0; i < js.size(); ++i)
    for (JobId k : cs.any_stage[i]) {
      binaries.push_back(detail::xvar(i, k));
      ++lp.census.order_vars;
      if (k > i) {
        rows << " anti_" << i << "_" << k << ": " << detail::xvar(i, k) << " + "
             << detail::xvar(k, i) << " = 1\n";
        ++lp.census.antisymmetry_rows;
      }
    }

  for (JobId i = 0; i < js.size(); ++i) {
    const Job& job = js[i];
    std::ostringstream lhs;
    bool any_term = false;
    auto add_term = [&](Time coef, const std::string& var) {
      if (coef == 0) return;
      lhs << (any_term ? " + " : " ") << coef << " " << var;
      any_term = true;
    };

    for (JobId k : cs.any_stage[i]) {
      if (!js.windows_overlap(i, k)) continue;
      const SegmentProfile sp = segment_profile(js, i, k);
      bool sat = false;
      const Time coef = mode == BoundMode::NonpreemptiveMulti
                            ? msmr::detail::sat_mul(sp.m, msmr::detail::max_of(sp.shared_proc), sat)
                            : msmr::detail::sum_top(sp.shared_proc, sp.w, sat);
      add_term(coef, detail::xvar(k, i));
    }

    for (std::size_t j = 0; j + 1 < n_stages; ++j) {
      const std::string theta = detail::stage_var("theta", i, j);
      ++lp.census.stage_max_vars;
      // Z_{i,j}: the job itself first, then its overlapping stage-j competitors.
      JobList zset = {i};
      for (JobId k : cs.per_stage[i][j])
        if (js.windows_overlap(i, k)) zset.push_back(k);
      std::ostringstream sel;
      for (std::size_t y = 0; y < zset.size(); ++y) {
        const JobId k = zset[y];
        const std::string b = "b_" + std::to_string(i) + "_" + std::to_string(j) + "_" +
                              std::to_string(y + 1);
        binaries.push_back(b);
        ++lp.census.selector_vars;
        sel << (y ? " + " : " ") << b;
        const std::string tag = std::to_string(i) + "_" + std::to_string(j) + "_" +
                                std::to_string(y + 1);
        if (k == i) {
          rows << " lo_" << tag << ": " << theta << " >= " << job.proc[j] << "\n";
          rows << " hi_" << tag << ": " << theta << " + " << big_m << " " << b
               << " <= " << big_m + job.proc[j] << "\n";
        } else {
          const Time p = js[k].proc[j];
          rows << " lo_" << tag << ": " << theta << " - " << p << " " << detail::xvar(k, i)
               << " >= 0\n";
          rows << " hi_" << tag << ": " << theta << " - " << p << " " << detail::xvar(k, i)
               << " + " << big_m << " " << b << " <= " << big_m << "\n";
        }
      }
      rows << " sel_" << i << "_" << j << ":" << sel.str() << " = 1\n";
      lhs << (any_term ? " + " : " ") << theta;
      any_term = true;
    }

    for (std::size_t j = 0; j < n_stages; ++j) {
      if (!block_mask[j]) continue;
      JobList below;
      for (JobId k : cs.per_stage[i][j])
        if (js.windows_overlap(i, k)) below.push_back(k);
      if (below.empty()) continue;
      const std::string lambda = detail::stage_var("lambda", i, j);
      ++lp.census.blocking_vars;
      for (JobId k : below)
        rows << " blk_" << i << "_" << j << "_" << k << ": " << lambda << " - "
             << js[k].proc[j] << " " << detail::xvar(i, k) << " >= 0\n";
      add_term(1, lambda);
    }

    const auto rhs = static_cast<__int128>(job.deadline) -
                     static_cast<__int128>(msmr::detail::max_of(job.proc));
    ++lp.census.deadline_rows;
    if (!any_term) {
      // Nothing can delay the job: the row is a constant. Express a violated
      // constant through a variable fixed at zero.
      if (rhs < 0) {
        const std::string slack = "infeasible_" + std::to_string(i);
        rows << " dl_" << i << ": " << slack << " >= 1\n";
        fixed_zero.push_back(slack);
      } else {
        rows << "\\ dl_" << i << ": constant row, always satisfied\n";
      }
      continue;
    }
    rows << " dl_" << i << ":" << lhs.str() << " <= " << static_cast<long long>(rhs) << "\n";
  }

  std::ostringstream out;
  out << "\\ pairwise priority feasibility program\n"
      << "\\ mode: " << mode_name(mode) << ", jobs: " << js.size() << ", stages: " << n_stages
      << ", big-M: " << big_m << "\n"
      << "Minimize\n obj:\nSubject To\n"
      << rows.str();
  if (!fixed_zero.empty()) {
    out << "Bounds\n";
    for (const auto& v : fixed_zero) out << " " << v << " = 0\n";
  }
  if (!binaries.empty()) {
    out << "Binaries\n";
    for (const auto& v : binaries) out << " " << v << "\n";
  }
  out << "End\n";
  lp.text = out.str();
  return lp;
}

}  // namespace msmr::opt

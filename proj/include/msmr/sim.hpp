#pragma once

// Discrete-event simulation of fixed-priority execution in an MSMR pipeline.
// Each resource runs one job at a time and never idles while a job waits for
// it. Jobs advance stage by stage and skip stages with zero processing time.
// At equal timestamps stage completions are handled before releases, and
// releases before dispatching; resources are visited by stage, then id.

#include <algorithm>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "msmr/assignment.hpp"
#include "msmr/model.hpp"
#include "msmr/rational.hpp"

namespace msmr::sim {

enum class EventKind { Start, Preempt, Resume, FinishStage, Exit };

inline std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::Start: return "start";
    case EventKind::Preempt: return "preempt";
    case EventKind::Resume: return "resume";
    case EventKind::FinishStage: return "finish";
    case EventKind::Exit: return "exit";
  }
  return "?";
}

struct Event {
  Time time = 0;
  std::size_t stage = 0;
  ResourceId resource = 0;
  JobId job = 0;
  EventKind kind = EventKind::Start;
  friend bool operator==(const Event&, const Event&) = default;
};

struct SimTrace {
  std::vector<Event> events;
  std::vector<Time> completion;  // absolute pipeline-exit time per job

  Time delay(const JobSet& js, JobId i) const { return completion[i] - js[i].arrival; }
  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

/// Per-job, per-stage dispatch keys: smaller key wins, ties go to the lower id.
struct StageKeys {
  std::vector<std::vector<Time>> key;
};

using Dispatch = std::variant<PriorityOrdering, PairwiseAssignment, StageKeys>;

struct SimConfig {
  std::vector<bool> preemptive;  // per stage
  Dispatch dispatch;
};

namespace detail {

class Arbiter {
public:
  Arbiter(const JobSet& js, const Dispatch& d) : dispatch_(d) {
    if (const auto* ord = std::get_if<PriorityOrdering>(&d)) {
      rank_.assign(js.size(), 0);
      std::vector<bool> seen(js.size(), false);
      for (std::size_t r = 0; r < ord->order().size(); ++r) {
        const JobId i = ord->order()[r];
        js.check_id(i);
        rank_[i] = r;
        seen[i] = true;
      }
      if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw std::invalid_argument("priority ordering does not cover every job");
    } else if (const auto* x = std::get_if<PairwiseAssignment>(&d)) {
      if (x->num_jobs() != js.size())
        throw std::invalid_argument("pairwise assignment sized for another job set");
      const CompetitorSets cs = competitor_sets(js);
      for (JobId i = 0; i < js.size(); ++i)
        for (JobId k : cs.any_stage[i])
          if (!x->decided(i, k))
            throw std::invalid_argument("pairwise assignment leaves pair (" +
                                        std::to_string(i) + ", " + std::to_string(k) +
                                        ") undecided");
    } else {
      const auto& keys = std::get<StageKeys>(d).key;
      if (keys.size() != js.size())
        throw std::invalid_argument("stage keys do not cover every job");
      for (const auto& row : keys)
        if (row.size() != js.num_stages())
          throw std::invalid_argument("stage keys need one entry per stage");
    }
  }

  JobId pick(const std::vector<JobId>& candidates, std::size_t stage) const {
    if (const auto* x = std::get_if<PairwiseAssignment>(&dispatch_)) return tournament(*x, candidates);
    auto better = [&](JobId a, JobId b) {
      if (std::holds_alternative<PriorityOrdering>(dispatch_)) return rank_[a] < rank_[b];
      const auto& key = std::get<StageKeys>(dispatch_).key;
      return key[a][stage] != key[b][stage] ? key[a][stage] < key[b][stage] : a < b;
    };
    return *std::min_element(candidates.begin(), candidates.end(), better);
  }

private:
  /// The job beating every other candidate; with a cycle, the one with the
  /// most wins among the candidates (ties: lower id).
  static JobId tournament(const PairwiseAssignment& x, const std::vector<JobId>& candidates) {
    JobId best = candidates.front();
    std::size_t best_wins = 0;
    bool first = true;
    for (JobId a : candidates) {
      std::size_t wins = 0;
      for (JobId b : candidates)
        if (a != b && x.higher(a, b)) ++wins;
      if (first || wins > best_wins || (wins == best_wins && a < best)) {
        best = a;
        best_wins = wins;
        first = false;
      }
    }
    return best;
  }

  const Dispatch& dispatch_;
  std::vector<std::size_t> rank_;
};

struct ResourceState {
  std::size_t stage = 0;
  ResourceId id = 0;
  std::vector<JobId> queue;
  bool busy = false;
  JobId running = 0;
  Time segment_start = 0;
};

}  // namespace detail

inline SimTrace simulate(const JobSet& js, const SimConfig& config) {
  const std::size_t n = js.size();
  const std::size_t n_stages = js.num_stages();
  if (config.preemptive.size() != n_stages)
    throw std::invalid_argument("preemption flags need one entry per stage");
  const detail::Arbiter arbiter(js, config.dispatch);

  std::vector<detail::ResourceState> resources;
  std::map<std::pair<std::size_t, ResourceId>, std::size_t> index;
  for (std::size_t j = 0; j < n_stages; ++j) {
    auto pool = js.pipeline().pools[j];
    std::sort(pool.begin(), pool.end());
    for (ResourceId r : pool) {
      index[{j, r}] = resources.size();
      resources.push_back({j, r, {}, false, 0, 0});
    }
  }

  SimTrace trace;
  trace.completion.assign(n, 0);
  std::vector<std::size_t> stage_of(n, 0);
  std::vector<Time> remaining(n, 0);
  std::vector<bool> started(n, false);
  std::size_t exited = 0;

  auto next_stage = [&](JobId i, std::size_t from) {
    std::size_t j = from;
    while (j < n_stages && js[i].proc[j] == 0) ++j;
    return j;
  };
  // Places job i at its next visited stage at or after `from`, or exits it.
  auto enter = [&](JobId i, std::size_t from, Time t) {
    const std::size_t j = next_stage(i, from);
    if (j == n_stages) {
      trace.completion[i] = t;
      trace.events.push_back({t, n_stages == 0 ? 0 : n_stages - 1,
                              js[i].mapping[n_stages - 1], i, EventKind::Exit});
      ++exited;
      return;
    }
    stage_of[i] = j;
    remaining[i] = js[i].proc[j];
    started[i] = false;
    resources[index.at({j, js[i].mapping[j]})].queue.push_back(i);
  };

  JobList releases = js.all_ids();
  std::stable_sort(releases.begin(), releases.end(),
                   [&](JobId a, JobId b) { return js[a].arrival < js[b].arrival; });
  std::size_t next_release = 0;
  Time t = n ? js[releases.front()].arrival : 0;

  while (exited < n) {
    // Stage completions.
    for (auto& res : resources) {
      if (!res.busy || res.segment_start + remaining[res.running] != t) continue;
      const JobId i = res.running;
      res.busy = false;
      remaining[i] = 0;
      trace.events.push_back({t, res.stage, res.id, i, EventKind::FinishStage});
      enter(i, res.stage + 1, t);
    }
    // Releases.
    while (next_release < n && js[releases[next_release]].arrival == t)
      enter(releases[next_release++], 0, t);
    // Dispatch.
    for (auto& res : resources) {
      const bool preemptive = config.preemptive[res.stage];
      if (res.busy && !preemptive) continue;
      if (res.queue.empty()) continue;
      std::vector<JobId> candidates = res.queue;
      if (res.busy) candidates.push_back(res.running);
      std::sort(candidates.begin(), candidates.end());
      const JobId winner = arbiter.pick(candidates, res.stage);
      if (res.busy) {
        if (winner == res.running) continue;
        const JobId loser = res.running;
        remaining[loser] -= t - res.segment_start;
        res.queue.push_back(loser);
        trace.events.push_back({t, res.stage, res.id, loser, EventKind::Preempt});
      }
      res.queue.erase(std::find(res.queue.begin(), res.queue.end(), winner));
      res.busy = true;
      res.running = winner;
      res.segment_start = t;
      trace.events.push_back({t, res.stage, res.id, winner,
                              started[winner] ? EventKind::Resume : EventKind::Start});
      started[winner] = true;
    }

    if (exited == n) break;
    Time next = kTimeMax;
    if (next_release < n) next = js[releases[next_release]].arrival;
    for (const auto& res : resources)
      if (res.busy) next = std::min(next, res.segment_start + remaining[res.running]);
    if (next == kTimeMax) throw std::logic_error("simulation stalled with unfinished jobs");
    t = next;
  }
  return trace;
}

/// Splits a deadline proportionally to per-stage weights: floor per stage,
/// with the remainder credited to the last stage.
inline std::vector<Time> split_deadline(Time deadline, const std::vector<Rational>& weights) {
  Rational total = 0;
  for (const auto& w : weights) total += w;
  if (total <= 0) throw std::invalid_argument("deadline split needs a positive total weight");
  std::vector<Time> out(weights.size(), 0);
  Time used = 0;
  for (std::size_t j = 0; j + 1 < weights.size(); ++j) {
    out[j] = to_time(floor_of(Rational(deadline) * weights[j] / total));
    used += out[j];
  }
  if (!out.empty()) out.back() = deadline - used;
  return out;
}

/// Per job, the weights used to split its deadline: at every stage, the summed
/// heaviness P/D of the jobs mapped to the job's resource there.
inline std::vector<std::vector<Rational>> resource_heaviness(const JobSet& js) {
  const std::size_t n_stages = js.num_stages();
  std::map<std::pair<std::size_t, ResourceId>, Rational> chi;
  for (const Job& job : js.jobs())
    for (std::size_t j = 0; j < n_stages; ++j)
      chi[{j, job.mapping[j]}] += Rational(job.proc[j], job.deadline);
  std::vector<std::vector<Rational>> out(js.size(), std::vector<Rational>(n_stages));
  for (const Job& job : js.jobs())
    for (std::size_t j = 0; j < n_stages; ++j) out[job.id][j] = chi[{j, job.mapping[j]}];
  return out;
}

inline std::vector<std::vector<Time>> virtual_deadlines(const JobSet& js) {
  const auto weights = resource_heaviness(js);
  std::vector<std::vector<Time>> out;
  out.reserve(js.size());
  for (const Job& job : js.jobs()) {
    try {
      out.push_back(split_deadline(job.deadline, weights[job.id]));
    } catch (const std::invalid_argument&) {
      throw std::invalid_argument("job " + std::to_string(job.id) +
                                  " has zero total resource heaviness");
    }
  }
  return out;
}

/// Deadline-decomposition baseline: each stage dispatches by the earliest
/// cumulative virtual deadline; a job set is accepted when every simulated
/// exit meets its end-to-end deadline.
inline AssignmentOutcome dcmp(const JobSet& js, const std::vector<bool>& preemptive) {
  const auto vd = virtual_deadlines(js);
  StageKeys keys;
  keys.key.resize(js.size());
  for (const Job& job : js.jobs()) {
    Time acc = job.arrival;
    for (Time d : vd[job.id]) {
      acc += d;
      keys.key[job.id].push_back(acc);
    }
  }
  const SimTrace trace = simulate(js, {preemptive, keys});
  AssignmentOutcome out;
  out.accepted = js.all_ids();
  out.bounds.assign(js.size(), std::nullopt);
  bool ok = true;
  for (const Job& job : js.jobs()) {
    out.observed.push_back(trace.delay(js, job.id));
    ok = ok && trace.completion[job.id] <= job.absolute_deadline();
  }
  out.status = ok ? Verdict::Feasible : Verdict::Infeasible;
  return out;
}

inline void write_trace(std::ostream& os, const SimTrace& trace) {
  os << "# time stage resource job event\n";
  for (const Event& e : trace.events)
    os << e.time << ' ' << e.stage << ' ' << e.resource << ' ' << e.job << ' '
       << event_name(e.kind) << '\n';
}

inline void write_completion_table(std::ostream& os, const JobSet& js, const SimTrace& trace) {
  os << "job,arrival,deadline,exit,delay,met\n";
  for (const Job& job : js.jobs())
    os << job.id << ',' << job.arrival << ',' << job.deadline << ','
       << trace.completion[job.id] << ',' << trace.delay(js, job.id) << ','
       << (trace.completion[job.id] <= job.absolute_deadline() ? "yes" : "no") << '\n';
}

}  // namespace msmr::sim

#pragma once

// Acceptance-ratio and admission-control sweeps over generated edge workloads.
//
// Every case of a sweep point gets its own seed, derived from (base seed,
// point index, case index) with splitmix64, so the instances do not depend on
// which methods run or in which order the workers finish. Cases run on a
// worker pool; rows are assembled in point/method order.

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "msmr/assign.hpp"
#include "msmr/dca.hpp"
#include "msmr/model.hpp"
#include "msmr/opt.hpp"
#include "msmr/rational.hpp"
#include "msmr/sim.hpp"
#include "msmr/workload.hpp"

namespace msmr::experiment {

enum class Method { DM, DMR, OPDCA, OPT, DCMP };
enum class Axis { Beta, Heavy, Gamma };

inline constexpr std::array kAllMethods = {Method::DM, Method::DMR, Method::OPDCA, Method::OPT,
                                           Method::DCMP};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::DM: return "DM";
    case Method::DMR: return "DMR";
    case Method::OPDCA: return "OPDCA";
    case Method::OPT: return "OPT";
    case Method::DCMP: return "DCMP";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view name) {
  std::string up(name);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Method m : kAllMethods)
    if (method_name(m) == up) return m;
  return std::nullopt;
}

inline std::string_view axis_name(Axis a) {
  switch (a) {
    case Axis::Beta: return "beta";
    case Axis::Heavy: return "heavy";
    case Axis::Gamma: return "gamma";
  }
  return "?";
}

inline std::optional<Axis> parse_axis(std::string_view name) {
  for (Axis a : {Axis::Beta, Axis::Heavy, Axis::Gamma})
    if (axis_name(a) == name) return a;
  return std::nullopt;
}

/// One point of the sweep axis: a single rational for beta and gamma, three
/// per-stage ratios for heavy. `label` is the text written to the CSV.
struct AxisPoint {
  std::string label;
  std::vector<Rational> values;
};

/// Parses "0.05" or, for the heavy axis, "0.05:0.05:0.01".
inline AxisPoint parse_point(Axis axis, std::string_view text) {
  AxisPoint p{std::string(text), {}};
  std::string_view rest = text;
  for (;;) {
    const auto slash = rest.find(':');
    p.values.push_back(parse_rational(rest.substr(0, slash)));
    if (slash == std::string_view::npos) break;
    rest.remove_prefix(slash + 1);
  }
  const std::size_t want = axis == Axis::Heavy ? 3 : 1;
  if (p.values.size() != want)
    throw std::invalid_argument("axis value '" + p.label + "' needs " + std::to_string(want) +
                                " component(s)");
  return p;
}

struct ExperimentSpec {
  Axis axis = Axis::Beta;
  std::vector<AxisPoint> points;
  std::size_t cases = 100;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  BoundMode mode = BoundMode::EdgeMixed;
  workload::EdgeConfig base;
  std::uint64_t seed = 1;
  std::size_t opt_budget = 20'000;
  bool timing = false;
  std::size_t workers = 0;  // 0: MSMR_WORKERS, else hardware concurrency

  void validate(bool admission) const {
    if (points.empty()) throw std::invalid_argument("experiment: no axis values");
    if (cases == 0) throw std::invalid_argument("experiment: cases per point must be at least 1");
    if (methods.empty()) throw std::invalid_argument("experiment: no methods selected");
    if (!is_pairwise_mode(mode) || !is_opa_compatible(mode))
      throw std::invalid_argument("experiment: mode must be p-refined or edge");
    if (admission && std::find(methods.begin(), methods.end(), Method::OPT) != methods.end())
      throw std::invalid_argument("experiment: OPT has no admission variant");
    for (const AxisPoint& p : points) config_at(p).validate();
  }

  workload::EdgeConfig config_at(const AxisPoint& p) const {
    workload::EdgeConfig cfg = base;
    switch (axis) {
      case Axis::Beta: cfg.beta = p.values.at(0); break;
      case Axis::Gamma: cfg.gamma = p.values.at(0); break;
      case Axis::Heavy: cfg.per_stage_heavy = p.values; break;
    }
    return cfg;
  }
};

struct ExperimentRow {
  std::string axis;
  std::string value;
  Method method = Method::DM;
  std::size_t cases = 0;
  std::size_t accepted = 0;
  std::size_t unknown = 0;          // OPT budget exhausted, counted as rejected
  std::size_t gen_failures = 0;     // no instance generated, counted as rejected
  std::size_t invalid = 0;          // witness failed re-validation, counted as rejected
  std::size_t opt_misses = 0;       // OPDCA accepted but OPT did not
  Rational rejected_heaviness = 0;  // admission only: mean over generated cases
  double mean_ms = 0;

  Rational acceptance_ratio() const {
    return cases == 0 ? Rational(0) : Rational(accepted * 100) / cases;
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of case `c` at axis point `p`.
inline std::uint64_t case_seed(std::uint64_t base, std::size_t p, std::size_t c) {
  return splitmix64(splitmix64(splitmix64(base) + p) + c);
}

/// Worker count: explicit value, else MSMR_WORKERS, else hardware concurrency.
inline std::size_t worker_count(std::size_t requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MSMR_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(0..count-1) on a pool of workers.
inline void parallel_for(std::size_t count, std::size_t workers,
                         const std::function<void(std::size_t)>& body) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k; (k = next.fetch_add(1)) < count;) {
        try {
          body(k);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Job set restricted to `ids`, renumbered 0..|ids|-1 in the given order.
inline JobSet subset(const JobSet& js, const JobList& ids) {
  std::vector<Job> jobs;
  jobs.reserve(ids.size());
  for (JobId i : ids) {
    Job job = js[i];
    job.id = jobs.size();
    jobs.push_back(std::move(job));
  }
  return JobSet(js.pipeline(), std::move(jobs));
}

/// DCMP as an admission controller: drop the job that misses its deadline by
/// the most (lowest id on ties) and simulate again.
inline AssignmentOutcome dcmp_admission(const JobSet& js, const std::vector<bool>& preemptive) {
  JobList active = js.all_ids();
  AssignmentOutcome out;
  for (;;) {
    const JobSet sub = subset(js, active);
    const AssignmentOutcome run = sim::dcmp(sub, preemptive);
    if (run.feasible()) break;
    std::size_t worst = 0;
    __int128 worst_late = 0;
    for (std::size_t s = 0; s < sub.size(); ++s) {
      const __int128 late = static_cast<__int128>(run.observed[s]) - sub[s].deadline;
      if (late > worst_late) {
        worst = s;
        worst_late = late;
      }
    }
    out.rejected.push_back(active[worst]);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(worst));
  }
  out.status = Verdict::Feasible;
  out.accepted = active;
  out.bounds.assign(js.size(), std::nullopt);
  return out;
}

/// Share of the total job heaviness carried by the rejected jobs, in percent.
inline Rational rejected_heaviness(const workload::HeavinessReport& report,
                                   const JobList& rejected) {
  Rational total = 0;
  for (JobId i = 0; i < report.h.size(); ++i) total += report.job_heaviness(i);
  if (total == 0) return 0;
  Rational rej = 0;
  for (JobId i : rejected) rej += report.job_heaviness(i);
  return rej * 100 / total;
}

namespace detail {

/// Re-checks a claimed witness from scratch over the jobs in `universe`.
inline bool revalidate(const JobSet& js, const AssignmentOutcome& out, BoundMode mode,
                       const JobList& universe) {
  if (const PriorityOrdering* ord = out.ordering()) {
    for (JobId i : universe) {
      const JobList hi = ord->higher_than(i);
      const JobList lo = ord->lower_than(i);
      if (!bound(js, i, hi, lo, mode, universe).meets(js[i].deadline)) return false;
    }
    return true;
  }
  if (const PairwiseAssignment* x = out.pairwise()) {
    const CompetitorSets cs = competitor_sets(js);
    return assign::all_meet(js, assign::pairwise_bounds(js, cs, *x, mode, universe), universe);
  }
  return true;  // DCMP: judged by simulation
}

struct MethodResult {
  bool generated = false;
  bool accepted = false;
  bool unknown = false;
  bool invalid = false;
  bool opt_miss = false;
  Rational rejected_heaviness = 0;
  double ms = 0;
};

using Clock = std::chrono::steady_clock;

inline double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

inline std::vector<MethodResult> run_case(const ExperimentSpec& spec,
                                          const workload::EdgeConfig& cfg, bool admission) {
  std::vector<MethodResult> res(spec.methods.size());
  std::optional<workload::Generated> gen;
  try {
    gen = workload::generate(cfg);
  } catch (const workload::GenerationError&) {
    return res;
  }
  const JobSet& js = gen->jobs;
  const std::vector<bool> preemptive = preemptive_stages(spec.mode, js.num_stages());

  // OPDCA and DMR results double as hints for OPT.
  std::optional<AssignmentOutcome> opdca_out, dmr_out;
  auto opdca = [&]() -> const AssignmentOutcome& {
    if (!opdca_out)
      opdca_out = admission ? assign::opdca_admission(js, spec.mode) : assign::opdca(js, spec.mode);
    return *opdca_out;
  };
  auto dmr = [&]() -> const AssignmentOutcome& {
    if (!dmr_out)
      dmr_out = admission ? assign::dmr_admission(js, spec.mode) : assign::dmr(js, spec.mode);
    return *dmr_out;
  };

  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    MethodResult& r = res[m];
    r.generated = true;
    const auto start = Clock::now();
    AssignmentOutcome out;
    switch (spec.methods[m]) {
      case Method::DM:
        out = admission ? assign::dm_admission(js, spec.mode) : assign::dm(js, spec.mode);
        break;
      case Method::DMR: out = dmr(); break;
      case Method::OPDCA: out = opdca(); break;
      case Method::DCMP:
        out = admission ? dcmp_admission(js, preemptive) : sim::dcmp(js, preemptive);
        break;
      case Method::OPT: {
        opt::SolveOptions options;
        options.node_budget = spec.opt_budget;
        const CompetitorSets cs = competitor_sets(js);
        if (opdca().feasible())
          options.hints.push_back(
              PairwiseAssignment::from_ordering(js, cs, *opdca().ordering()));
        if (dmr().feasible()) options.hints.push_back(*dmr().pairwise());
        out = opt::solve_exact(js, spec.mode, options);
        r.unknown = out.status == Verdict::Unknown;
        r.opt_miss = opdca().feasible() && !out.feasible();
        break;
      }
    }
    r.ms = elapsed_ms(start);
    if (out.feasible()) {
      if (revalidate(js, out, spec.mode, out.accepted))
        r.accepted = admission ? out.rejected.empty() : true;
      else
        r.invalid = true;
    }
    if (admission)
      r.rejected_heaviness =
          r.invalid ? Rational(100) : rejected_heaviness(gen->report, out.rejected);
  }
  return res;
}

inline std::vector<ExperimentRow> run(const ExperimentSpec& spec, bool admission,
                                      std::ostream* log) {
  spec.validate(admission);
  const std::size_t workers = worker_count(spec.workers);
  std::vector<ExperimentRow> rows;
  for (std::size_t p = 0; p < spec.points.size(); ++p) {
    const AxisPoint& point = spec.points[p];
    const workload::EdgeConfig cfg_point = spec.config_at(point);
    std::vector<std::vector<MethodResult>> results(spec.cases);
    parallel_for(spec.cases, workers, [&](std::size_t c) {
      workload::EdgeConfig cfg = cfg_point;
      cfg.seed = case_seed(spec.seed, p, c);
      results[c] = run_case(spec, cfg, admission);
    });

    for (std::size_t m = 0; m < spec.methods.size(); ++m) {
      ExperimentRow row;
      row.axis = std::string(axis_name(spec.axis));
      row.value = point.label;
      row.method = spec.methods[m];
      row.cases = spec.cases;
      std::size_t generated = 0;
      double ms = 0;
      for (const auto& rc : results) {
        const MethodResult& r = rc[m];
        if (!r.generated) {
          ++row.gen_failures;
          continue;
        }
        ++generated;
        row.accepted += r.accepted;
        row.unknown += r.unknown;
        row.invalid += r.invalid;
        row.opt_misses += r.opt_miss;
        row.rejected_heaviness += r.rejected_heaviness;
        ms += r.ms;
      }
      if (generated > 0) {
        row.rejected_heaviness /= generated;
        row.mean_ms = ms / static_cast<double>(generated);
      }
      if (log && row.opt_misses > 0)
        *log << "warning: " << row.axis << '=' << row.value << ": OPT missed " << row.opt_misses
             << " instance(s) that OPDCA accepted\n";
      if (log && row.invalid > 0)
        *log << "warning: " << row.axis << '=' << row.value << ": " << method_name(row.method)
             << " produced " << row.invalid << " witness(es) that failed re-validation\n";
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace detail

/// Acceptance ratio of each method at each axis point.
inline std::vector<ExperimentRow> run_experiment(const ExperimentSpec& spec,
                                                 std::ostream* log = nullptr) {
  return detail::run(spec, false, log);
}

/// Admission-control sweep: a case counts as accepted when no job is rejected;
/// rejected_heaviness is the mean share of heaviness discarded.
inline std::vector<ExperimentRow> run_admission(const ExperimentSpec& spec,
                                                std::ostream* log = nullptr) {
  return detail::run(spec, true, log);
}

inline void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows, bool admission,
                      bool timing) {
  os << "axis,value,method,cases,accepted,acceptance_ratio,unknown,gen_failures,invalid";
  if (admission) os << ",rejected_heaviness";
  if (timing) os << ",mean_ms";
  os << '\n';
  for (const ExperimentRow& r : rows) {
    os << r.axis << ",\"" << r.value << "\"," << method_name(r.method) << ',' << r.cases << ','
       << r.accepted << ',' << to_decimal(r.acceptance_ratio(), 2) << ',' << r.unknown << ','
       << r.gen_failures << ',' << r.invalid;
    if (admission) os << ',' << to_decimal(r.rejected_heaviness, 2);
    if (timing) {
      std::ostringstream ms;
      ms << std::fixed << std::setprecision(3) << r.mean_ms;
      os << ',' << ms.str();
    }
    os << '\n';
  }
}

}  // namespace msmr::experiment

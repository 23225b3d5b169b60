// msmr: delay bounds, priority assignment, simulation and sweeps for
// multi-stage multi-resource pipelines.
//
// Exit status: 0 ran, 1 infeasible verdict under --check, 2 usage or input error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msmr/msmr.hpp"

using namespace msmr;
using nlohmann::json;

namespace {

constexpr int kRan = 0;
constexpr int kInfeasible = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

JobSet load_jobset(const std::string& path) {
  try {
    return io::parse_any(read_file(path));
  } catch (const io::ParseError& e) {
    throw UsageError(path + ": " + e.what());
  }
}

/// Writes to `path`, or stdout when the path is empty or "-".
template <typename Fn>
void emit(const std::string& path, Fn&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write '" + path + "'");
  write(out);
}

BoundMode mode_of(const std::string& name) {
  const auto mode = parse_mode(name);
  if (!mode) throw UsageError("unknown mode '" + name + "'");
  return *mode;
}

PriorityOrdering ordering_of(const std::string& text, const JobSet& js) {
  JobList order;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      const unsigned long id = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      order.push_back(id);
    } catch (const std::exception&) {
      throw UsageError("bad job id '" + item + "' in --order");
    }
  }
  for (JobId i : order)
    if (i >= js.size()) throw UsageError("--order names job " + std::to_string(i) + " of " +
                                         std::to_string(js.size()));
  if (order.size() != js.size()) throw UsageError("--order must list every job exactly once");
  try {
    return PriorityOrdering(std::move(order));
  } catch (const std::invalid_argument& e) {
    throw UsageError(std::string("--order: ") + e.what());
  }
}

std::string pair_text(JobId winner, JobId loser) {
  return std::to_string(winner) + ">" + std::to_string(loser);
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string file;
  std::string method = "opdca";
  std::string mode = "p-refined";
  std::string order;
  std::size_t budget = opt::kDefaultNodeBudget;
  bool admission = false;
  bool check = false;
  bool as_json = false;
};

AssignmentOutcome run_method(const AnalyzeArgs& a, const JobSet& js, BoundMode mode) {
  const std::string& m = a.method;
  if (m == "bound") {
    if (a.order.empty()) throw UsageError("method bound needs --order");
    PriorityOrdering ord = ordering_of(a.order, js);
    AssignmentOutcome out;
    out.bounds.assign(js.size(), std::nullopt);
    bool ok = true;
    for (JobId i : ord.order()) {
      DelayBound b = bound(js, i, ord.higher_than(i), ord.lower_than(i), mode);
      ok = ok && b.meets(js[i].deadline);
      out.bounds[i] = std::move(b);
    }
    out.accepted = js.all_ids();
    out.status = ok ? Verdict::Feasible : Verdict::Infeasible;
    out.result = std::move(ord);
    return out;
  }
  if (m == "opdca") return a.admission ? assign::opdca_admission(js, mode) : assign::opdca(js, mode);
  if (m == "dm") return a.admission ? assign::dm_admission(js, mode) : assign::dm(js, mode);
  if (m == "dmr") return a.admission ? assign::dmr_admission(js, mode) : assign::dmr(js, mode);
  if (m == "opt") {
    if (a.admission) throw UsageError("method opt has no admission variant");
    opt::SolveOptions options;
    options.node_budget = a.budget;
    return opt::solve_exact(js, mode, options);
  }
  if (m == "dcmp") {
    const auto flags = preemptive_stages(mode, js.num_stages());
    return a.admission ? experiment::dcmp_admission(js, flags) : sim::dcmp(js, flags);
  }
  throw UsageError("unknown method '" + m + "'");
}

json bound_json(const DelayBound& b, const Job& job) {
  json terms = json::array();
  for (const JobTerm& t : b.job_additive) terms.push_back({{"job", t.job}, {"amount", t.amount}});
  return {{"job", job.id},         {"bound", b.total},
          {"deadline", job.deadline}, {"met", b.meets(job.deadline)},
          {"saturated", b.saturated}, {"job_terms", terms},
          {"stage_terms", b.stage_additive}, {"blocking", b.lower_blocking}};
}

void print_bound(std::ostream& os, const DelayBound& b, const Job& job) {
  os << "job " << job.id << ": bound " << b.total << (b.saturated ? "+" : "") << " deadline "
     << job.deadline << ' ' << (b.meets(job.deadline) ? "met" : "missed") << " |";
  for (const JobTerm& t : b.job_additive)
    if (t.job == job.id) os << " self " << t.amount;
  os << " | jobs";
  for (const JobTerm& t : b.job_additive)
    if (t.job != job.id) os << ' ' << t.job << ':' << t.amount;
  os << " | stages";
  for (Time s : b.stage_additive) os << ' ' << s;
  if (!b.lower_blocking.empty()) {
    os << " | blocking";
    for (Time s : b.lower_blocking) os << ' ' << s;
  }
  os << '\n';
}

int cmd_analyze(const AnalyzeArgs& a) {
  const JobSet js = load_jobset(a.file);
  const BoundMode mode = mode_of(a.mode);
  AssignmentOutcome out;
  try {
    out = run_method(a, js, mode);
  } catch (const ModeError& e) {
    throw UsageError(e.what());
  }

  if (a.as_json) {
    json doc = {{"method", a.method}, {"mode", mode_name(mode)},
                {"verdict", verdict_name(out.status)}};
    json bounds = json::array();
    for (const Job& job : js.jobs())
      if (out.bounds.size() > job.id && out.bounds[job.id])
        bounds.push_back(bound_json(*out.bounds[job.id], job));
    doc["bounds"] = bounds;
    if (!out.observed.empty()) doc["observed"] = out.observed;
    if (const PriorityOrdering* ord = out.ordering()) doc["ordering"] = ord->order();
    if (const PairwiseAssignment* x = out.pairwise()) {
      json pairs = json::array();
      for (const auto& p : x->pairs()) pairs.push_back({p.winner, p.loser});
      doc["assignment"] = pairs;
    }
    json flips = json::array();
    for (const Flip& f : out.flips) flips.push_back({{"winner", f.winner}, {"loser", f.loser}});
    doc["flips"] = flips;
    doc["accepted"] = out.accepted;
    doc["rejected"] = out.rejected;
    if (a.method == "opt") doc["nodes"] = out.nodes;
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << "method: " << a.method << (a.admission ? " (admission)" : "") << '\n'
              << "mode: " << mode_name(mode) << '\n';
    for (const Job& job : js.jobs())
      if (out.bounds.size() > job.id && out.bounds[job.id])
        print_bound(std::cout, *out.bounds[job.id], job);
    for (std::size_t i = 0; i < out.observed.size(); ++i)
      std::cout << "job " << i << ": simulated delay " << out.observed[i] << " deadline "
                << js[i].deadline << '\n';
    for (const Flip& f : out.flips)
      std::cout << "flip: " << pair_text(f.loser, f.winner) << " -> " << pair_text(f.winner, f.loser)
                << '\n';
    if (const PriorityOrdering* ord = out.ordering()) {
      std::cout << "ordering:";
      for (JobId i : ord->order()) std::cout << ' ' << i;
      std::cout << '\n';
    }
    if (const PairwiseAssignment* x = out.pairwise()) {
      std::cout << "assignment:";
      for (const auto& p : x->pairs()) std::cout << ' ' << pair_text(p.winner, p.loser);
      std::cout << '\n';
    }
    if (a.admission) {
      std::cout << "rejected:";
      for (JobId i : out.rejected) std::cout << ' ' << i;
      std::cout << '\n';
    }
    if (a.method == "opt") std::cout << "nodes: " << out.nodes << '\n';
    std::cout << "verdict: " << verdict_name(out.status) << '\n';
  }
  return a.check && !out.feasible() ? kInfeasible : kRan;
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string config;
  std::string output;
  std::string format = "text";
  std::optional<std::size_t> jobs, aps, servers;
  std::optional<std::uint64_t> seed;
  std::string beta, gamma, heavy, stretch;
};

int cmd_generate(const GenerateArgs& a) {
  workload::EdgeConfig cfg;
  if (!a.config.empty()) {
    json doc;
    try {
      doc = json::parse(read_file(a.config));
    } catch (const json::parse_error& e) {
      throw UsageError(a.config + ": " + e.what());
    }
    config::apply_workload(doc, cfg);
  }
  if (a.jobs) cfg.num_jobs = *a.jobs;
  if (a.aps) cfg.num_aps = *a.aps;
  if (a.servers) cfg.num_servers = *a.servers;
  if (a.seed) cfg.seed = *a.seed;
  if (!a.beta.empty()) cfg.beta = parse_rational(a.beta);
  if (!a.gamma.empty()) cfg.gamma = parse_rational(a.gamma);
  if (!a.stretch.empty()) cfg.deadline_stretch = parse_rational(a.stretch);
  if (!a.heavy.empty()) cfg.per_stage_heavy = experiment::parse_point(experiment::Axis::Heavy, a.heavy).values;
  if (a.format != "text" && a.format != "json") throw UsageError("--format must be text or json");

  const workload::Generated g = workload::generate(cfg);
  emit(a.output, [&](std::ostream& os) {
    os << (a.format == "json" ? io::to_json_text(g.jobs) : io::to_text(g.jobs));
  });
  std::cerr << "H " << to_decimal(g.report.H, 4) << ", heavy ratio";
  for (const auto& r : g.report.heavy_ratio) std::cerr << ' ' << to_decimal(r, 4);
  std::cerr << ", attempts " << g.attempts << '\n';
  return kRan;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string file;
  std::string mode = "p-refined";
  std::string order;
  std::string method;
  std::string trace;
  bool check = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const JobSet js = load_jobset(a.file);
  const BoundMode mode = mode_of(a.mode);
  sim::SimConfig config;
  config.preemptive = preemptive_stages(mode, js.num_stages());
  if (!a.order.empty() && !a.method.empty()) throw UsageError("give either --order or --method");
  if (!a.order.empty()) {
    config.dispatch = ordering_of(a.order, js);
  } else {
    const std::string m = a.method.empty() ? "dm" : a.method;
    try {
      if (m == "opdca" || m == "dm" || m == "dmr" || m == "opt") {
        AnalyzeArgs aa;
        aa.method = m;
        const AssignmentOutcome out = run_method(aa, js, mode);
        if (const PriorityOrdering* ord = out.ordering()) {
          if (out.ordering()->size() != js.size())
            throw UsageError(m + " found no complete ordering to simulate");
          config.dispatch = *ord;
        } else if (const PairwiseAssignment* x = out.pairwise()) {
          config.dispatch = *x;
        } else {
          throw UsageError(m + " found no assignment to simulate");
        }
      } else if (m == "dcmp") {
        sim::StageKeys keys;
        const auto vd = sim::virtual_deadlines(js);
        keys.key.resize(js.size());
        for (const Job& job : js.jobs()) {
          Time acc = job.arrival;
          for (Time d : vd[job.id]) keys.key[job.id].push_back(acc += d);
        }
        config.dispatch = keys;
      } else {
        throw UsageError("unknown method '" + m + "'");
      }
    } catch (const ModeError& e) {
      throw UsageError(e.what());
    }
  }
  sim::SimTrace trace;
  try {
    trace = sim::simulate(js, config);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (!a.trace.empty()) emit(a.trace, [&](std::ostream& os) { sim::write_trace(os, trace); });
  sim::write_completion_table(std::cout, js, trace);
  bool all_met = true;
  for (const Job& job : js.jobs()) all_met = all_met && trace.completion[job.id] <= job.absolute_deadline();
  return a.check && !all_met ? kInfeasible : kRan;
}

// ---------------------------------------------------------------------------
// sweep / admit

struct SweepArgs {
  std::string config;
  std::string output;
  std::optional<std::size_t> cases;
  bool timing = false;
};

int cmd_sweep(const SweepArgs& a, bool admission) {
  experiment::ExperimentSpec spec;
  try {
    spec = config::parse_experiment_text(read_file(a.config));
    if (a.cases) spec.cases = *a.cases;
    spec.timing = a.timing;
    spec.validate(admission);
  } catch (const std::invalid_argument& e) {
    throw UsageError(a.config + ": " + e.what());
  }
  const auto rows = admission ? experiment::run_admission(spec, &std::cerr)
                              : experiment::run_experiment(spec, &std::cerr);
  emit(a.output, [&](std::ostream& os) { experiment::write_csv(os, rows, admission, spec.timing); });
  return kRan;
}

// ---------------------------------------------------------------------------
// export-lp

struct ExportArgs {
  std::string file;
  std::string mode = "p-refined";
  std::string output;
};

int cmd_export_lp(const ExportArgs& a) {
  const JobSet js = load_jobset(a.file);
  const BoundMode mode = mode_of(a.mode);
  opt::LpProgram lp;
  try {
    lp = opt::export_lp(js, mode);
  } catch (const ModeError& e) {
    throw UsageError(e.what());
  }
  emit(a.output, [&](std::ostream& os) { os << lp.text; });
  const auto& c = lp.census;
  std::cerr << "order vars " << c.order_vars << ", antisymmetry rows " << c.antisymmetry_rows
            << ", stage maxima " << c.stage_max_vars << ", selectors " << c.selector_vars
            << ", blocking vars " << c.blocking_vars << ", deadline rows " << c.deadline_rows
            << '\n';
  return kRan;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Delay bounds, priority assignment and simulation for multi-stage pipelines"};
  app.require_subcommand(1);

  std::string modes;
  for (BoundMode m : kAllModes) modes += (modes.empty() ? "" : ", ") + std::string(mode_name(m));

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Bounds and priority assignment for one instance");
  analyze->add_option("file", an.file, "Job set (text or JSON)")->required();
  analyze->add_option("--method", an.method, "bound, opdca, dm, dmr, opt or dcmp")
      ->check(CLI::IsMember({"bound", "opdca", "dm", "dmr", "opt", "dcmp"}))
      ->capture_default_str();
  analyze->add_option("--mode", an.mode, "Bound mode: " + modes)->capture_default_str();
  analyze->add_option("--order", an.order, "Priority ordering for --method bound, e.g. 0,1,2,3");
  analyze->add_option("--budget", an.budget, "Node budget of the exact solver")->capture_default_str();
  analyze->add_flag("--admission", an.admission, "Discard jobs instead of failing");
  analyze->add_flag("--check", an.check, "Exit 1 unless the verdict is feasible");
  analyze->add_flag("--json", an.as_json, "Machine-readable report");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample an edge workload");
  generate->add_option("--config", gen.config, "JSON workload object");
  generate->add_option("-o,--output", gen.output, "Output file (default stdout)");
  generate->add_option("--format", gen.format, "text or json")->capture_default_str();
  generate->add_option("--jobs", gen.jobs, "Number of jobs");
  generate->add_option("--aps", gen.aps, "Number of access points");
  generate->add_option("--servers", gen.servers, "Number of servers");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--beta", gen.beta, "Heaviness threshold");
  generate->add_option("--gamma", gen.gamma, "Heaviness bound");
  generate->add_option("--heavy", gen.heavy, "Per-stage heavy ratios, e.g. 0.05:0.05:0.01");
  generate->add_option("--stretch", gen.stretch, "Deadline stretch for jobs with no heavy stage");

  SimulateArgs sm;
  auto* simulate = app.add_subcommand("simulate", "Simulate an instance and print exit times");
  simulate->add_option("file", sm.file, "Job set (text or JSON)")->required();
  simulate->add_option("--mode", sm.mode, "Bound mode fixing the stage preemption: " + modes)
      ->capture_default_str();
  simulate->add_option("--order", sm.order, "Dispatch by this priority ordering");
  simulate->add_option("--method", sm.method, "Dispatch by opdca, dm, dmr, opt or dcmp (default dm)");
  simulate->add_option("--trace", sm.trace, "Write the event trace to this file");
  simulate->add_flag("--check", sm.check, "Exit 1 if some job misses its deadline");

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Acceptance-ratio sweep to CSV");
  sweep->add_option("config", sw.config, "JSON sweep config")->required();
  sweep->add_option("-o,--output", sw.output, "CSV file (default stdout)");
  sweep->add_option("--cases", sw.cases, "Override cases per point");
  sweep->add_flag("--timing", sw.timing, "Add a mean_ms column (not deterministic)");

  SweepArgs ad;
  auto* admit = app.add_subcommand("admit", "Admission-control sweep to CSV");
  admit->add_option("config", ad.config, "JSON sweep config")->required();
  admit->add_option("-o,--output", ad.output, "CSV file (default stdout)");
  admit->add_option("--cases", ad.cases, "Override cases per point");
  admit->add_flag("--timing", ad.timing, "Add a mean_ms column (not deterministic)");

  ExportArgs ex;
  auto* export_lp = app.add_subcommand("export-lp", "Write the pairwise feasibility program (LP format)");
  export_lp->add_option("file", ex.file, "Job set (text or JSON)")->required();
  export_lp->add_option("--mode", ex.mode, "p-refined, np-multi or edge")->capture_default_str();
  export_lp->add_option("-o,--output", ex.output, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*analyze) return cmd_analyze(an);
    if (*generate) return cmd_generate(gen);
    if (*simulate) return cmd_simulate(sm);
    if (*sweep) return cmd_sweep(sw, false);
    if (*admit) return cmd_sweep(ad, true);
    if (*export_lp) return cmd_export_lp(ex);
  } catch (const UsageError& e) {
    std::cerr << "msmr: " << e.what() << '\n';
    return kUsage;
  } catch (const workload::GenerationError& e) {
    std::cerr << "msmr: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "msmr: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

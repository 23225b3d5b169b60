#include <gtest/gtest.h>

#include <map>
#include <random>
#include <sstream>

#include "msmr/opt.hpp"
#include "test_support.hpp"

using namespace msmr;

namespace {

const std::vector<BoundMode> kPairModes = {BoundMode::PreemptiveRefined,
                                           BoundMode::NonpreemptiveMulti, BoundMode::EdgeMixed};

struct PairList {
  std::vector<std::pair<JobId, JobId>> pairs;
};

PairList overlapping_pairs(const JobSet& js) {
  const CompetitorSets cs = competitor_sets(js);
  PairList out;
  for (JobId i = 0; i < js.size(); ++i)
    for (JobId k : cs.any_stage[i])
      if (k > i && js.windows_overlap(i, k)) out.pairs.emplace_back(i, k);
  return out;
}

PairwiseAssignment orient(const JobSet& js, const PairList& pl, std::uint64_t mask) {
  PairwiseAssignment x(js.size());
  for (std::size_t t = 0; t < pl.pairs.size(); ++t) {
    const auto [i, k] = pl.pairs[t];
    (mask >> t) & 1 ? x.set_higher(k, i) : x.set_higher(i, k);
  }
  return x;
}

bool reference_feasible(const JobSet& js, const PairwiseAssignment& x, BoundMode mode) {
  for (JobId i = 0; i < js.size(); ++i) {
    JobList higher, lower;
    for (JobId k : fixture::overlapping(js, i, js.all_ids())) {
      if (x.higher(k, i)) higher.push_back(k);
      else if (x.higher(i, k)) lower.push_back(k);
    }
    if (fixture::reference_bound(js, i, higher, lower, mode) > js[i].deadline) return false;
  }
  return true;
}

// Minimal CPLEX LP reader: enough for the rows the exporter writes.
struct LinearRow {
  std::string name;
  std::map<std::string, long long> coef;
  std::string op;
  long long rhs = 0;
};

struct LinearProgram {
  std::vector<LinearRow> rows;
  std::map<std::string, long long> fixed;
  std::vector<std::string> binaries;
  bool has_end = false;
};

LinearProgram parse_lp(const std::string& text) {
  LinearProgram lp;
  std::istringstream is(text);
  std::string line, section;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '\\') continue;
    if (line[0] != ' ') {
      section = line;
      if (line == "End") lp.has_end = true;
      continue;
    }
    std::istringstream ls(line);
    if (section == "Binaries") {
      std::string v;
      ls >> v;
      lp.binaries.push_back(v);
      continue;
    }
    if (section == "Bounds") {
      std::string v, eq;
      long long value;
      ls >> v >> eq >> value;
      lp.fixed[v] = value;
      continue;
    }
    if (section != "Subject To") continue;
    LinearRow row;
    ls >> row.name;
    row.name.pop_back();  // ':'
    std::string tok;
    long long sign = 1;
    long long pending = 1;
    bool have_coef = false;
    while (ls >> tok) {
      if (tok == "+" || tok == "-") {
        sign = tok == "-" ? -1 : 1;
      } else if (tok == "<=" || tok == ">=" || tok == "=") {
        row.op = tok;
        ls >> row.rhs;
      } else if (std::isdigit(static_cast<unsigned char>(tok[0])) || tok[0] == '-') {
        pending = std::stoll(tok);
        have_coef = true;
      } else {
        row.coef[tok] += sign * (have_coef ? pending : 1);
        sign = 1;
        have_coef = false;
      }
    }
    lp.rows.push_back(row);
  }
  return lp;
}

bool row_holds(const LinearRow& row, const std::map<std::string, long long>& values) {
  long long lhs = 0;
  for (const auto& [v, c] : row.coef) {
    auto it = values.find(v);
    lhs += c * (it == values.end() ? 0 : it->second);
  }
  if (row.op == "<=") return lhs <= row.rhs;
  if (row.op == ">=") return lhs >= row.rhs;
  return lhs == row.rhs;
}

// Assigns every auxiliary variable its smallest consistent value for a fixed
// orientation, then checks all rows. The program is feasible for that
// orientation exactly when this assignment is.
bool lp_accepts(const JobSet& js, const LinearProgram& lp, const PairwiseAssignment& x,
                BoundMode mode) {
  const CompetitorSets cs = competitor_sets(js);
  std::map<std::string, long long> val;
  for (JobId i = 0; i < js.size(); ++i)
    for (JobId k : cs.any_stage[i])
      val["X_" + std::to_string(i) + "_" + std::to_string(k)] = x.higher(i, k) ? 1 : 0;
  const std::size_t N = js.num_stages();
  std::vector<bool> mask(N, mode == BoundMode::NonpreemptiveMulti);
  if (mode == BoundMode::EdgeMixed) mask[2] = true;
  for (JobId i = 0; i < js.size(); ++i) {
    for (std::size_t j = 0; j + 1 < N; ++j) {
      JobList z = {i};
      for (JobId k : cs.per_stage[i][j])
        if (js.windows_overlap(i, k)) z.push_back(k);
      long long best = -1;
      std::size_t arg = 0;
      for (std::size_t y = 0; y < z.size(); ++y) {
        const JobId k = z[y];
        const long long v = k == i || x.higher(k, i) ? static_cast<long long>(js[k].proc[j]) : 0;
        if (v > best) {
          best = v;
          arg = y;
        }
      }
      const std::string tag = std::to_string(i) + "_" + std::to_string(j);
      val["theta_" + tag] = best;
      for (std::size_t y = 0; y < z.size(); ++y)
        val["b_" + tag + "_" + std::to_string(y + 1)] = y == arg ? 1 : 0;
    }
    for (std::size_t j = 0; j < N; ++j) {
      if (!mask[j]) continue;
      long long best = 0;
      for (JobId k : cs.per_stage[i][j])
        if (js.windows_overlap(i, k) && x.higher(i, k))
          best = std::max(best, static_cast<long long>(js[k].proc[j]));
      val["lambda_" + std::to_string(i) + "_" + std::to_string(j)] = best;
    }
  }
  for (const auto& [v, value] : lp.fixed) val[v] = value;
  for (const LinearRow& row : lp.rows)
    if (!row_holds(row, val)) return false;
  return true;
}

}  // namespace

TEST(SolveExact, AgreesWithBruteForce) {
  std::mt19937_64 rng(777);
  fixture::RandomSpec spec;
  spec.min_jobs = 2;
  spec.max_jobs = 6;
  spec.min_stages = spec.max_stages = 3;
  spec.arrival_spread = 30;
  spec.min_slack = 0.6;
  spec.max_slack = 1.8;
  int feasible = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const JobSet js = fixture::random_jobset(rng, spec);
    const PairList pl = overlapping_pairs(js);
    if (pl.pairs.size() > 14) continue;
    for (BoundMode m : kPairModes) {
      bool expected = false;
      for (std::uint64_t mask = 0; mask < (1ull << pl.pairs.size()) && !expected; ++mask)
        expected = reference_feasible(js, orient(js, pl, mask), m);
      const AssignmentOutcome out = opt::solve_exact(js, m);
      ASSERT_NE(out.status, Verdict::Unknown);
      EXPECT_EQ(out.feasible(), expected) << mode_name(m) << " trial " << trial;
      if (out.feasible()) {
        ++feasible;
        EXPECT_TRUE(reference_feasible(js, *out.pairwise(), m));
        const CompetitorSets cs = competitor_sets(js);
        for (JobId i = 0; i < js.size(); ++i)
          for (JobId k : cs.any_stage[i]) EXPECT_TRUE(out.pairwise()->decided(i, k));
      } else {
        ++infeasible;
      }
    }
  }
  EXPECT_GT(feasible, 50);
  EXPECT_GT(infeasible, 50);
}

TEST(SolveExact, DominatesHeuristics) {
  std::mt19937_64 rng(31337);
  fixture::RandomSpec spec;
  spec.min_jobs = 4;
  spec.max_jobs = 10;
  spec.min_stages = spec.max_stages = 3;
  spec.min_slack = 0.5;
  spec.max_slack = 1.2;
  for (int trial = 0; trial < 150; ++trial) {
    const JobSet js = fixture::random_jobset(rng, spec);
    for (BoundMode m : {BoundMode::PreemptiveRefined, BoundMode::EdgeMixed}) {
      const bool by_opdca = assign::opdca(js, m).feasible();
      const bool by_dmr = assign::dmr(js, m).feasible();
      const AssignmentOutcome out = opt::solve_exact(js, m);
      if (by_opdca || by_dmr) {
        EXPECT_TRUE(out.feasible());
      }
    }
  }
}

TEST(SolveExact, HintsShortCircuitTheSearch) {
  const JobSet js = fixture::dmr_pair();
  const AssignmentOutcome repaired = assign::dmr(js, BoundMode::PreemptiveRefined);
  ASSERT_TRUE(repaired.feasible());
  opt::SolveOptions options;
  options.node_budget = 0;
  EXPECT_EQ(opt::solve_exact(js, BoundMode::PreemptiveRefined, options).status, Verdict::Unknown);
  options.hints.push_back(*repaired.pairwise());
  const AssignmentOutcome out = opt::solve_exact(js, BoundMode::PreemptiveRefined, options);
  EXPECT_TRUE(out.feasible());
  EXPECT_EQ(out.nodes, 0u);
}

TEST(SolveExact, WitnessPair) {
  const AssignmentOutcome out = opt::solve_exact(fixture::dmr_pair(), BoundMode::PreemptiveRefined);
  ASSERT_TRUE(out.feasible());
  EXPECT_TRUE(out.pairwise()->higher(1, 0));
}

TEST(SolveExact, OrderingOnlyModesRejected) {
  EXPECT_THROW(opt::solve_exact(fixture::example1(), BoundMode::PreemptiveSingle), ModeError);
  EXPECT_THROW(opt::export_lp(fixture::example1(), BoundMode::NonpreemptiveOpa), ModeError);
}

TEST(ExportLp, AcceptsExactlyTheFeasibleOrientations) {
  std::mt19937_64 rng(4711);
  fixture::RandomSpec spec;
  spec.min_jobs = 2;
  spec.max_jobs = 5;
  spec.min_stages = spec.max_stages = 3;
  spec.arrival_spread = 25;
  spec.min_slack = 0.5;
  spec.max_slack = 1.4;
  int agree = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const JobSet js = fixture::random_jobset(rng, spec);
    const PairList pl = overlapping_pairs(js);
    if (pl.pairs.size() > 8) continue;
    for (BoundMode m : kPairModes) {
      const opt::LpProgram program = opt::export_lp(js, m);
      const LinearProgram lp = parse_lp(program.text);
      ASSERT_TRUE(lp.has_end);
      EXPECT_EQ(lp.binaries.size(), program.census.order_vars + program.census.selector_vars);
      for (std::uint64_t mask = 0; mask < (1ull << pl.pairs.size()); ++mask) {
        PairwiseAssignment x = orient(js, pl, mask);
        const CompetitorSets cs = competitor_sets(js);
        opt::complete_inert_pairs(js, cs, x);
        EXPECT_EQ(lp_accepts(js, lp, x, m), reference_feasible(js, x, m))
            << mode_name(m) << " trial " << trial << "\n" << program.text;
        ++agree;
      }
    }
  }
  EXPECT_GT(agree, 500);
}

TEST(ExportLp, CensusOfWitnessPair) {
  const opt::LpProgram lp = opt::export_lp(fixture::dmr_pair(), BoundMode::PreemptiveRefined);
  EXPECT_EQ(lp.census.order_vars, 2u);
  EXPECT_EQ(lp.census.antisymmetry_rows, 1u);
  EXPECT_EQ(lp.census.stage_max_vars, 4u);
  // Stage 0 is shared by both jobs, stage 1 by neither.
  EXPECT_EQ(lp.census.selector_vars, 2u + 1 + 2 + 1);
  EXPECT_EQ(lp.census.blocking_vars, 0u);
  EXPECT_EQ(lp.census.deadline_rows, 2u);
  EXPECT_NE(lp.text.find(" anti_0_1: X_0_1 + X_1_0 = 1\n"), std::string::npos);
  EXPECT_NE(lp.text.find(" dl_0: 2 X_1_0 + theta_0_0 + theta_0_1 <= 25\n"), std::string::npos);
  EXPECT_NE(lp.text.find(" dl_1: 20 X_0_1 + theta_1_0 + theta_1_1 <= 25\n"), std::string::npos);
}

TEST(ExportLp, ConstantRows) {
  std::vector<Job> jobs = {{0, 0, 3, {5, 1}, {0, 0}}, {1, 0, 100, {1, 1}, {1, 1}}};
  const JobSet js(Pipeline{{{0, 1}, {0, 1}}}, std::move(jobs));
  const opt::LpProgram lp = opt::export_lp(js, BoundMode::PreemptiveRefined);
  const LinearProgram parsed = parse_lp(lp.text);
  EXPECT_EQ(parsed.fixed.count("infeasible_0"), 0u);
  // Each job keeps its stage-0 maximum variable, so no row is constant here.
  EXPECT_EQ(lp.census.stage_max_vars, 2u);
  std::vector<Job> one = {{0, 0, 3, {5}, {0}}};
  const opt::LpProgram single = opt::export_lp(JobSet(Pipeline{{{0}}}, std::move(one)),
                                               BoundMode::PreemptiveRefined);
  EXPECT_NE(single.text.find(" dl_0: infeasible_0 >= 1\n"), std::string::npos);
  EXPECT_NE(single.text.find("Bounds\n infeasible_0 = 0\n"), std::string::npos);
}

#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "msmr/config.hpp"
#include "msmr/experiment.hpp"
#include "test_support.hpp"

using namespace msmr;
using namespace msmr::experiment;

namespace {

ExperimentSpec scaled_spec(std::vector<std::string> betas, std::size_t cases) {
  ExperimentSpec spec;
  spec.base.num_aps = 8;
  spec.base.num_servers = 6;
  spec.base.num_jobs = 30;
  spec.cases = cases;
  for (const auto& b : betas) spec.points.push_back(parse_point(Axis::Beta, b));
  return spec;
}

const ExperimentRow& row_of(const std::vector<ExperimentRow>& rows, const std::string& value,
                            Method m) {
  for (const auto& r : rows)
    if (r.value == value && r.method == m) return r;
  throw std::logic_error("row not found");
}

std::string csv(const std::vector<ExperimentRow>& rows, bool admission) {
  std::ostringstream os;
  write_csv(os, rows, admission, false);
  return os.str();
}

}  // namespace

TEST(Seeds, SplitmixReferenceValue) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_NE(case_seed(1, 0, 1), case_seed(1, 1, 0));
  EXPECT_NE(case_seed(1, 0, 0), case_seed(2, 0, 0));
  EXPECT_EQ(case_seed(7, 3, 4), case_seed(7, 3, 4));
}

TEST(Experiment, TrivialCaseAcceptedByAll) {
  ExperimentSpec spec = scaled_spec({"0.05"}, 1);
  spec.base.num_jobs = 1;
  const auto rows = run_experiment(spec);
  ASSERT_EQ(rows.size(), kAllMethods.size());
  for (const auto& r : rows) {
    EXPECT_EQ(r.acceptance_ratio(), 100) << method_name(r.method);
    EXPECT_EQ(r.invalid, 0u);
  }
}

TEST(Experiment, AcceptanceRatioArithmetic) {
  ExperimentRow r;
  r.cases = 100;
  r.accepted = 94;
  EXPECT_EQ(r.acceptance_ratio(), 94);
  r.cases = 3;
  r.accepted = 1;
  EXPECT_EQ(to_decimal(r.acceptance_ratio(), 2), "33.33");
}

TEST(Experiment, MethodOrderingAtLoadedPoints) {
  ExperimentSpec spec = scaled_spec({"0.15", "0.20", "0.25"}, 40);
  std::ostringstream log;
  const auto rows = run_experiment(spec, &log);
  for (const char* v : {"0.15", "0.20", "0.25"}) {
    EXPECT_GE(row_of(rows, v, Method::OPT).accepted, row_of(rows, v, Method::OPDCA).accepted) << v;
    EXPECT_GE(row_of(rows, v, Method::DMR).accepted, row_of(rows, v, Method::DM).accepted) << v;
    EXPECT_GE(row_of(rows, v, Method::OPT).accepted, row_of(rows, v, Method::DMR).accepted) << v;
  }
  for (const auto& r : rows) {
    EXPECT_EQ(r.invalid, 0u);
    EXPECT_EQ(r.opt_misses, 0u);
  }
  EXPECT_EQ(log.str(), "");
}

TEST(Experiment, DeterministicAcrossWorkerCounts) {
  ExperimentSpec spec = scaled_spec({"0.20", "0.25"}, 12);
  spec.workers = 1;
  const std::string one = csv(run_experiment(spec), false);
  spec.workers = 3;
  EXPECT_EQ(csv(run_experiment(spec), false), one);
  EXPECT_EQ(csv(run_experiment(spec), false), one);
}

TEST(Experiment, MethodSubsetKeepsInstances) {
  ExperimentSpec spec = scaled_spec({"0.20"}, 15);
  const auto all = run_experiment(spec);
  spec.methods = {Method::DCMP, Method::DM};
  const auto some = run_experiment(spec);
  EXPECT_EQ(row_of(some, "0.20", Method::DM).accepted, row_of(all, "0.20", Method::DM).accepted);
  EXPECT_EQ(row_of(some, "0.20", Method::DCMP).accepted, row_of(all, "0.20", Method::DCMP).accepted);
}

TEST(Experiment, GenerationFailuresCountAsRejections) {
  ExperimentSpec spec = scaled_spec({"0.15"}, 3);
  spec.base.gamma = Rational(1, 100);
  spec.base.max_attempts = 2;
  const auto rows = run_experiment(spec);
  for (const auto& r : rows) {
    EXPECT_EQ(r.gen_failures, 3u);
    EXPECT_EQ(r.accepted, 0u);
  }
}

TEST(Experiment, SpecValidation) {
  ExperimentSpec spec = scaled_spec({"0.15"}, 1);
  spec.cases = 0;
  EXPECT_THROW(run_experiment(spec), std::invalid_argument);
  spec = scaled_spec({}, 1);
  EXPECT_THROW(run_experiment(spec), std::invalid_argument);
  spec = scaled_spec({"0.15"}, 1);
  spec.methods.clear();
  EXPECT_THROW(run_experiment(spec), std::invalid_argument);
  spec = scaled_spec({"0.15"}, 1);
  spec.mode = BoundMode::NonpreemptiveMulti;
  EXPECT_THROW(run_experiment(spec), std::invalid_argument);
  spec = scaled_spec({"0.15"}, 1);
  EXPECT_THROW(run_admission(spec), std::invalid_argument);  // OPT is selected
  EXPECT_THROW(parse_point(Axis::Heavy, "0.1:0.1"), std::invalid_argument);
  EXPECT_THROW(parse_point(Axis::Beta, "0.1:0.1"), std::invalid_argument);
  EXPECT_EQ(parse_point(Axis::Heavy, "0.1:1/4:0").values,
            (std::vector<Rational>{Rational(1, 10), Rational(1, 4), 0}));
}

TEST(Admission, RejectedHeavinessExtremes) {
  const JobSet js = fixture::example1({60, 55, 55, 50});
  const auto rep = workload::heaviness(js, Rational(15, 100));
  EXPECT_EQ(rejected_heaviness(rep, {}), 0);
  EXPECT_EQ(rejected_heaviness(rep, {0, 1, 2, 3}), 100);
  const Rational h3 = rep.job_heaviness(3);
  Rational total = 0;
  for (JobId i = 0; i < 4; ++i) total += rep.job_heaviness(i);
  EXPECT_EQ(rejected_heaviness(rep, {3}), h3 * 100 / total);
}

TEST(Admission, SweepColumnsAndOrdering) {
  ExperimentSpec spec = scaled_spec({"0.05", "0.15", "0.25"}, 30);
  spec.methods = {Method::DM, Method::DMR, Method::OPDCA, Method::DCMP};
  const auto rows = run_admission(spec);
  for (const auto& r : rows) {
    EXPECT_GE(r.rejected_heaviness, 0);
    EXPECT_LE(r.rejected_heaviness, 100);
    EXPECT_EQ(r.invalid, 0u);
  }
  for (Method m : spec.methods) EXPECT_EQ(row_of(rows, "0.05", m).rejected_heaviness, 0);
  for (const char* v : {"0.15", "0.25"})
    EXPECT_LE(row_of(rows, v, Method::OPDCA).rejected_heaviness,
              row_of(rows, v, Method::DM).rejected_heaviness)
        << v;
  const std::string text = csv(rows, true);
  EXPECT_EQ(text.substr(0, text.find('\n')),
            "axis,value,method,cases,accepted,acceptance_ratio,unknown,gen_failures,invalid,"
            "rejected_heaviness");
}

TEST(Admission, DcmpDropsLateJobs) {
  const JobSet js = fixture::example1({60, 55, 55, 50});
  const std::vector<bool> flags(3, true);
  EXPECT_FALSE(sim::dcmp(js, flags).feasible());
  const AssignmentOutcome out = dcmp_admission(js, flags);
  EXPECT_FALSE(out.rejected.empty());
  EXPECT_TRUE(sim::dcmp(subset(js, out.accepted), flags).feasible());
  EXPECT_EQ(out.accepted.size() + out.rejected.size(), 4u);
}

TEST(Admission, DmDiscardsOnlyTheHopelessJob) {
  std::vector<Job> jobs = {{0, 0, 100, {5, 5, 5}, {0, 0, 0}},
                           {1, 0, 10, {20, 20, 20}, {1, 1, 1}},
                           {2, 0, 100, {5, 5, 5}, {0, 0, 0}}};
  const JobSet js(Pipeline{{{0, 1}, {0, 1}, {0, 1}}}, std::move(jobs));
  const auto out = assign::dm_admission(js, BoundMode::PreemptiveRefined);
  EXPECT_TRUE(out.feasible());
  EXPECT_EQ(out.rejected, (JobList{1}));
  EXPECT_EQ(out.accepted, (JobList{0, 2}));
}

TEST(Workers, EnvironmentSetsPoolSize) {
  EXPECT_EQ(worker_count(5), 5u);
  setenv("MSMR_WORKERS", "3", 1);
  EXPECT_EQ(worker_count(0), 3u);
  setenv("MSMR_WORKERS", "zero", 1);
  EXPECT_GE(worker_count(0), 1u);
  unsetenv("MSMR_WORKERS");
}

TEST(Workers, ExceptionsPropagate) {
  EXPECT_THROW(parallel_for(10, 3,
                            [](std::size_t k) {
                              if (k == 7) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(Config, ParsesSweepFile) {
  const auto spec = config::parse_experiment_text(R"({
    "axis": "heavy",
    "values": ["0.05:0.05:0.01", "0.1:0.1:0.05"],
    "cases": 7,
    "methods": ["dm", "OPT"],
    "mode": "p-refined",
    "seed": 9,
    "workload": {"aps": 8, "servers": 6, "jobs": 30, "beta": 0.15, "compute": [40, 400]}
  })");
  EXPECT_EQ(spec.axis, Axis::Heavy);
  ASSERT_EQ(spec.points.size(), 2u);
  EXPECT_EQ(spec.points[1].values[2], Rational(1, 20));
  EXPECT_EQ(spec.cases, 7u);
  EXPECT_EQ(spec.methods, (std::vector<Method>{Method::DM, Method::OPT}));
  EXPECT_EQ(spec.mode, BoundMode::PreemptiveRefined);
  EXPECT_EQ(spec.seed, 9u);
  EXPECT_EQ(spec.base.beta, Rational(3, 20));
  EXPECT_EQ(spec.base.compute.lo, 40u);
  EXPECT_EQ(spec.base.num_servers, 6u);
}

TEST(Config, Errors) {
  EXPECT_THROW(config::parse_experiment_text("{"), config::ConfigError);
  EXPECT_THROW(config::parse_experiment_text(R"({"values": ["0.1"], "bogus": 1})"),
               config::ConfigError);
  EXPECT_THROW(config::parse_experiment_text(R"({"axis": "delta", "values": ["0.1"]})"),
               config::ConfigError);
  EXPECT_THROW(config::parse_experiment_text(R"({"values": ["0.1"], "methods": ["EDF"]})"),
               config::ConfigError);
  EXPECT_THROW(config::parse_experiment_text(R"({"values": ["0.1"], "cases": -1})"),
               config::ConfigError);
  EXPECT_THROW(config::parse_experiment_text(R"({"values": ["0.1"], "workload": {"aps": "x"}})"),
               config::ConfigError);
}

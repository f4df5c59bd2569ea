#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dpp/cli/commands.hpp"
#include "dpp/linear_program.hpp"

using namespace dpp;
using namespace dpp::cli;
namespace fs = std::filesystem;

namespace {

fs::path problem(const std::string& name) { return fs::path(DPP_PROBLEMS_DIR) / (name + ".json"); }

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("dpp_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("checkpoint schedule") {
  CHECK(checkpoints(0.1, 400) == std::vector<Slot>{25, 100, 200, 400});
  CHECK(checkpoints(0.1, 150) == std::vector<Slot>{25, 100, 150});
  CHECK(checkpoints(1.0, 4) == std::vector<Slot>{1, 2, 4});
  RunConfig c;
  c.epsilon = 0.05;
  CHECK(c.base_time() == 400);
  CHECK(c.horizon() == 1600);
  CHECK(c.seed_list().size() == 30);
}

TEST_CASE("lp run passes every check") {
  RunConfig c;
  c.problem = problem("lp_cover");
  c.epsilon = 0.05;
  c.out = scratch("lp");
  const auto report = run_command(c);
  CHECK(report.passed());
  CHECK(report.b == doctest::Approx(0.5));
  std::size_t failures = 0;
  for (const auto& check : report.checks) failures += check.status == CheckStatus::fail;
  CHECK(failures == 0);
  CHECK(fs::exists(c.out / "trace.csv"));
  CHECK(fs::exists(c.out / "bound_report.csv"));
  CHECK(fs::exists(c.out / "bound_report.json"));
}

TEST_CASE("epsilon one still runs a few slots") {
  RunConfig c;
  c.problem = problem("lp_cover");
  c.epsilon = 1.0;
  c.out = scratch("eps1");
  const auto report = run_command(c);
  CHECK(report.t_max >= 4);
  CHECK(report.passed());
}

TEST_CASE("usage errors leave no output behind") {
  RunConfig c;
  c.problem = fs::path(DPP_TEST_DATA_DIR) / "unknown_kind.json";
  c.epsilon = 0.1;
  c.out = scratch("unknown");
  CHECK_THROWS_AS(run_command(c), UsageError);
  CHECK_FALSE(fs::exists(c.out));
  c.problem = problem("lp_cover");
  c.epsilon = 0.0;
  CHECK_THROWS_AS(run_command(c), UsageError);
  CHECK_FALSE(fs::exists(c.out));
}

TEST_CASE("sweep caps follow the bounds") {
  SweepConfig c;
  c.problem = problem("lp_cover");
  c.epsilons = {0.1, 0.05, 0.025};
  c.out = scratch("sweep");
  const auto rows = sweep_command(c);
  REQUIRE(rows.size() == 3);
  // lp_cover: B = 1/2, mu = 1, so cap_obj = B eps and the violation cap is the queue bound over t.
  for (const auto& r : rows) {
    CHECK(r.pass == CheckStatus::pass);
    CHECK(r.cap_obj == doctest::Approx(0.5 * r.epsilon));
    REQUIRE(r.cap_violation.has_value());
    const double v = 1.0 / r.epsilon;
    const double t = static_cast<double>(r.t);
    const double mu = 1.0;
    const double bound = v * mu + std::sqrt(v * v * mu * mu + 2.0 * 0.5 * t);
    CHECK(*r.cap_violation == doctest::Approx(bound / t).epsilon(1e-2));
  }
  CHECK(fs::exists(c.out / "sweep.csv"));

  c.epsilons = {0.1};
  c.out = scratch("sweep_single");
  CHECK_THROWS_AS(sweep_command(c), UsageError);
}

TEST_CASE("reruns are byte identical") {
  for (const char* name : {"lp_cover", "equality_no_slater"}) {
    RunConfig c;
    c.problem = problem(name);
    c.epsilon = 0.1;
    c.out = scratch(std::string("rerun_a_") + name);
    run_command(c);
    const auto first = slurp(c.out / "trace.csv");
    const auto first_report = slurp(c.out / "bound_report.csv");
    c.out = scratch(std::string("rerun_b_") + name);
    run_command(c);
    CHECK(first == slurp(c.out / "trace.csv"));
    CHECK(first_report == slurp(c.out / "bound_report.csv"));
  }
}

TEST_CASE("stochastic runs write one trace per seed") {
  RunConfig c;
  c.problem = problem("downlink_2user");
  c.epsilon = 0.1;
  c.seeds = {3, 4};
  c.out = scratch("downlink");
  const auto report = run_command(c);
  CHECK(report.runs == 2);
  CHECK(fs::exists(c.out / "trace_seed_3.csv"));
  CHECK(fs::exists(c.out / "trace_seed_4.csv"));
  CHECK(report.passed());
}

TEST_CASE("violation rows are skipped without a certified multiplier") {
  BoundReport r;
  r.add(10, "violation_1", 0.3, 0.1, 0.0, false);
  r.add(10, "objective_gap", 0.0, 0.1, 0.0);
  CHECK(r.checks[0].status == CheckStatus::skipped);
  CHECK(r.checks[1].status == CheckStatus::pass);
  CHECK(r.passed());
  r.add(10, "objective_gap", 0.5, 0.1, 0.0);
  CHECK_FALSE(r.passed());
}

TEST_CASE("oracle command") {
  OracleConfig c;
  c.problem = problem("lp_cover");
  c.out = scratch("oracle");
  const auto report = oracle_command(c);
  CHECK(std::abs(report.optimum.optimum - 1.0) <= report.optimum.error_bar + 1e-9);
  REQUIRE(report.multiplier.has_value());
  CHECK(report.multiplier->certified);
  CHECK(fs::exists(c.out / "oracle.json"));
}

TEST_CASE("distributed run writes node traces") {
  RunConfig c;
  c.problem = problem("consensus_line");
  c.epsilon = 0.1;
  c.out = scratch("consensus");
  const auto report = run_command(c);
  for (int n = 0; n < 3; ++n) CHECK(fs::exists(c.out / ("node_" + std::to_string(n) + ".csv")));
  CHECK(fs::exists(c.out / "consensus.csv"));
  CHECK(report.passed());
}

#include <string>

#include "doctest.h"
#include "dpp/cli/problem_file.hpp"

using namespace dpp;
using namespace dpp::cli;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_problem_text(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("minimal lp") {
  const auto f = parse_problem_text(R"({"kind": "lp", "b": [1], "A": [[-1]], "c": [-0.5],
                                        "x_min": [0], "x_max": [1]})");
  CHECK(f.kind == ProblemKind::lp);
  CHECK_FALSE(f.optimum.has_value());
  CHECK(f.lp().dimension() == 1);
  CHECK(f.lp().c[0] == -0.5);
}

TEST_CASE("optional optimum and name") {
  const auto f = parse_problem_text(R"({"kind": "lp", "name": "n", "b": [1], "A": [], "c": [],
                                        "x_min": [0], "x_max": [1], "optimum": 0})");
  CHECK(f.name == "n");
  REQUIRE(f.optimum.has_value());
  CHECK(*f.optimum == 0.0);
}

TEST_CASE("schema errors name the field") {
  CHECK(error_of(R"({"kind": "quantum"})").find("kind") != std::string::npos);
  CHECK(error_of("{not json").find("malformed JSON") != std::string::npos);
  CHECK(error_of(R"({"kind": "lp", "b": [1], "A": [[1, 2]], "c": [0], "x_min": [0], "x_max": [1]})") != "");
}

TEST_CASE("probabilities must sum to one") {
  const std::string e = error_of(R"({"kind": "stochastic", "c": [0], "events": [
      {"id": "a", "probability": 0.5, "options": [[0, 1]]},
      {"id": "b", "probability": 0.4, "options": [[1, -1]]}]})");
  CHECK(e.find("event model") != std::string::npos);
  CHECK(e.find("0.9") != std::string::npos);
}

TEST_CASE("stochastic events") {
  const auto f = parse_problem_text(R"({"kind": "stochastic", "c": [0], "events": [
      {"id": "a", "probability": 0.25, "options": [[0, 1], [1, -1]]},
      {"id": "b", "probability": 0.75, "options": [[0, 0]]}]})");
  CHECK(f.stochastic().events.ids()[1] == "b");
  CHECK(f.stochastic().options[0].size() == 2);
}

TEST_CASE("disconnected graphs are rejected") {
  const std::string e = error_of(R"({"kind": "distributed", "links": [[0, 1]], "shared_dim": 1, "nodes": [
      {"box": {"lower": [0], "upper": [1]}, "objective": {"a": [1], "b": 0}},
      {"box": {"lower": [0], "upper": [1]}, "objective": {"a": [1], "b": 0}},
      {"box": {"lower": [0], "upper": [1]}, "objective": {"a": [1], "b": 0}}]})");
  CHECK(e.find("connected") != std::string::npos);
}

TEST_CASE("bundled problem files parse") {
  for (const char* name : {"lp_cover", "equality_no_slater", "downlink_2user", "quadratic_budget",
                           "consensus_line", "shared_budget"}) {
    CAPTURE(name);
    CHECK_NOTHROW(parse_problem_file(std::string(DPP_PROBLEMS_DIR) + "/" + name + ".json"));
  }
  const auto d = parse_problem_file(std::string(DPP_PROBLEMS_DIR) + "/downlink_2user.json");
  CHECK(d.stochastic().num_constraints() == 2);
  const auto s = parse_problem_file(std::string(DPP_PROBLEMS_DIR) + "/shared_budget.json");
  CHECK(s.distributed().replicated.has_value());
}

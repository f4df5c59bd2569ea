#pragma once

// Instances behind the stored golden traces in tests/data/golden.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dpp/csv.hpp"
#include "dpp/distributed.hpp"
#include "dpp/linear_program.hpp"
#include "dpp/stochastic.hpp"

namespace golden {

inline constexpr double kV = 10.0;
inline constexpr dpp::Slot kSlots = 200;
inline constexpr dpp::Slot kStochasticSlots = 300;
inline constexpr std::uint64_t kSeed = 7;
inline constexpr dpp::Slot kDistributedSlots = 100;

inline dpp::LinearProgram lp() {
  // min x1 + 2 x2 s.t. -x1 - x2 <= -1, x1 - x2 <= 0.5 on [0, 1]^2.
  return {{1.0, 2.0}, {{-1.0, -1.0}, {1.0, -1.0}}, {-1.0, 0.5}, {0.0, 0.0}, {1.0, 1.0}};
}

inline dpp::ConvexProgram convex() {
  // min (x1 - 1)^2 + x2^2 s.t. x1^2 <= 0.5, x1 + x2 = 0.5 on [-1, 1]^2.
  dpp::ConvexProgram p;
  p.f = dpp::ConvexFunction::diagonal_quadratic({1.0, 1.0}, {-2.0, 0.0}, 1.0);
  p.g = {dpp::ConvexFunction::diagonal_quadratic({1.0, 0.0}, {0.0, 0.0}, 0.0)};
  p.c = {0.5};
  p.w = {dpp::ConvexFunction::affine({1.0, 1.0}, 0.0)};
  p.d = {0.5};
  p.set = dpp::FeasibleSet::box({-1.0, -1.0}, {1.0, 1.0});
  return p;
}

inline dpp::StochasticProblem stochastic() {
  dpp::StochasticProblem p;
  p.c = {0.0};
  p.events = dpp::RandomEventModel({"on", "off"}, {0.3, 0.7});
  p.options = {{{0.0, 1.0}, {1.0, -1.0}, {2.0, -2.0}}, {{0.0, 1.0}, {1.5, -0.5}}};
  p.validate();
  return p;
}

inline dpp::NodeProgram theta_node(double target) {
  dpp::NodeProgram node;
  node.shared_dim = 1;
  node.program.f = dpp::ConvexFunction::diagonal_quadratic({1.0}, {-2.0 * target}, target * target);
  node.program.set = dpp::FeasibleSet::box({-3.0}, {3.0});
  return node;
}

inline dpp::GraphProblem line() {
  return {dpp::GraphTopology(3, {{0, 1}, {1, 2}}), {theta_node(0.0), theta_node(1.0), theta_node(2.0)}};
}

inline std::filesystem::path dir() { return std::filesystem::path(DPP_TEST_DATA_DIR) / "golden"; }

inline std::string read(const std::string& name) {
  std::ifstream in(dir() / name, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace golden

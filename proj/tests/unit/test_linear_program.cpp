#include <cmath>
#include <random>

#include "doctest.h"
#include "dpp/convex.hpp"
#include "dpp/errors.hpp"
#include "dpp/linear_program.hpp"
#include "reference.hpp"

using namespace dpp;

namespace {

LinearProgram cover() { return {{1.0, 1.0}, {{-1.0, -1.0}}, {-1.0}, {0.0, 0.0}, {1.0, 1.0}}; }

LinearProgram random_lp(std::mt19937_64& gen, std::size_t n, std::size_t k) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  LinearProgram lp;
  lp.b.resize(n);
  for (double& b : lp.b) b = u(gen);
  lp.A.assign(k, std::vector<double>(n));
  for (auto& row : lp.A) {
    for (double& a : row) a = u(gen);
  }
  lp.c.resize(k);
  for (double& c : lp.c) c = u(gen);
  for (std::size_t i = 0; i < n; ++i) {
    const double lo = u(gen);
    lp.x_min.push_back(lo);
    lp.x_max.push_back(lo + 0.1 + std::abs(u(gen)));
  }
  return lp;
}

}  // namespace

TEST_CASE("bang-bang examples") {
  LinearProgram lp{{1.0, 2.0}, {}, {}, {0.0, -1.0}, {1.0, 1.0}};
  CHECK(lp_per_slot_decision(lp, QueueState(0, 0), 5.0) == std::vector<double>{0.0, -1.0});
  lp.b = {-1.0, -2.0};
  CHECK(lp_per_slot_decision(lp, QueueState(0, 0), 5.0) == std::vector<double>{1.0, 1.0});
  // A zero score takes x_max.
  lp.b = {0.0, 0.0};
  CHECK(lp_per_slot_decision(lp, QueueState(0, 0), 5.0) == std::vector<double>{1.0, 1.0});
  CHECK_THROWS_AS(lp_per_slot_decision(lp, QueueState(1, 0), 5.0), ValidationError);
}

TEST_CASE("bang-bang attains the corner minimum") {
  std::mt19937_64 gen(31);
  std::uniform_int_distribution<std::size_t> n_dist(1, 10), k_dist(0, 4);
  std::uniform_real_distribution<double> qd(0.0, 20.0), vd(0.01, 50.0);
  for (int trial = 0; trial < 300; ++trial) {
    const auto lp = random_lp(gen, n_dist(gen), k_dist(gen));
    QueueState q(lp.num_constraints(), 0);
    for (double& x : q.ineq) x = qd(gen);
    const double v = vd(gen);
    const auto x = lp_per_slot_decision(lp, q, v);
    const auto s = ref::lp_scores(lp, q.ineq, v);
    CHECK(ref::corner_value(s, x) == ref::min_corner_value(lp, s));
  }
}

TEST_CASE("bang-bang agrees with the generic inner solver") {
  std::mt19937_64 gen(32);
  for (int trial = 0; trial < 30; ++trial) {
    const auto lp = random_lp(gen, 3, 2);
    QueueState q(2, 0);
    q.ineq = {1.5, 0.25};
    const auto exact = lp_per_slot_decision(lp, q, 2.0);
    const auto program = lp.to_convex();
    const auto obj = per_slot_objective(program, q, 2.0);
    const auto approx = inner_minimize(obj, program.set, {});
    CHECK(approx.value <= obj(exact) + 1e-6);
    CHECK(approx.value >= obj(exact) - 1e-12);
  }
}

TEST_CASE("run_lp recovers a non-corner optimum by averaging") {
  // minimize x s.t. -x <= -0.5 on [0, 1]: every x(t) is 0 or 1, the average tends to 0.5.
  const LinearProgram lp{{1.0}, {{-1.0}}, {-0.5}, {0.0}, {1.0}};
  const double eps = 0.01;
  const auto trace = run_lp(lp, 1.0 / eps, 10000);
  for (std::size_t s = 0; s < trace.length(); ++s) CHECK((trace.x(s)[0] == 0.0 || trace.x(s)[0] == 1.0));
  CHECK(std::abs(trace.x_bar(10000)[0] - 0.5) <= 3 * eps);
}

TEST_CASE("run_lp without constraints sits at the optimal corner") {
  const LinearProgram lp{{1.0, -1.0}, {}, {}, {0.0, 0.0}, {1.0, 2.0}};
  const auto trace = run_lp(lp, 1.0, 50);
  for (Slot t = 1; t <= 50; ++t) CHECK(trace.x_bar(t) == std::vector<double>{0.0, 2.0});
}

TEST_CASE("covering LP bounds") {
  const auto lp = cover();
  CHECK(compute_B_lp(lp) == 0.5);
  for (double eps : {0.1, 0.05, 0.025}) {
    const double v = 1.0 / eps;
    const auto t = static_cast<Slot>(std::ceil(1.0 / (eps * eps)));
    const auto trace = run_lp(lp, v, t);
    const auto xb = trace.x_bar(t);
    CHECK(xb[0] + xb[1] <= 1.0 + 0.5 * eps + 1e-9);
    CHECK(1.0 - xb[0] - xb[1] <= (1.0 + std::sqrt(2.0)) * eps + 1e-9);
  }
}

TEST_CASE("compute_B_lp matches corner enumeration") {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 200; ++trial) {
    const auto lp = random_lp(gen, 4, 3);
    double expected = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      double worst = 0.0;
      for (int mask = 0; mask < 16; ++mask) {
        double ax = 0.0;
        for (std::size_t i = 0; i < 4; ++i) ax += lp.A[k][i] * ((mask >> i) & 1 ? lp.x_max[i] : lp.x_min[i]);
        worst = std::max(worst, std::abs(ax - lp.c[k]));
      }
      expected += 0.5 * worst * worst;
    }
    CHECK(compute_B_lp(lp) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("lp validation") {
  LinearProgram lp = cover();
  lp.x_max = {1.0, 0.0};
  CHECK_THROWS_AS(lp.validate(), ValidationError);
  lp = cover();
  lp.A[0].pop_back();
  CHECK_THROWS_AS(lp.validate(), ValidationError);
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "dpp/errors.hpp"
#include "dpp/oracle.hpp"
#include "reference.hpp"

using namespace dpp;

namespace {

ConvexProgram linear_on_unit(double slope) {
  ConvexProgram p;
  p.f = ConvexFunction::affine({slope}, 0.0);
  p.set = FeasibleSet::box({0.0}, {1.0});
  return p;
}

LinearProgram cover() {
  // min x1 + x2 s.t. -x1 - x2 <= -1 on [0,1]^2.
  return {{1.0, 1.0}, {{-1.0, -1.0}}, {-1.0}, {0.0, 0.0}, {1.0, 1.0}};
}

LinearProgram random_lp(std::mt19937_64& gen, std::size_t n, std::size_t k) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  LinearProgram lp;
  for (std::size_t i = 0; i < n; ++i) {
    lp.b.push_back(u(gen));
    lp.x_min.push_back(0.0);
    lp.x_max.push_back(1.0);
  }
  std::vector<double> center(n, 0.5);
  for (std::size_t r = 0; r < k; ++r) {
    std::vector<double> row;
    double at_center = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      row.push_back(u(gen));
      at_center += row.back() * center[i];
    }
    lp.A.push_back(row);
    lp.c.push_back(at_center + 0.1 + 0.2 * std::abs(u(gen)));  // the center is strictly feasible
  }
  return lp;
}

StochasticProblem stochastic(std::vector<double> c, std::vector<double> probs,
                             std::vector<std::vector<OptionVector>> options) {
  StochasticProblem p;
  p.c = std::move(c);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < probs.size(); ++i) ids.push_back("w" + std::to_string(i));
  p.events = RandomEventModel(ids, std::move(probs));
  p.options = std::move(options);
  p.validate();
  return p;
}

}  // namespace

TEST_CASE("grid optimum examples") {
  const auto r = static_optimum_grid(linear_on_unit(1.0), 1e-3);
  CHECK(r.optimum == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.optimizer[0] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(default_resolution(2) == 1e-3);
  CHECK(default_resolution(4) == 1e-2);

  const auto c = static_optimum_grid(cover(), 1e-3);
  CHECK(std::abs(c.optimum - 1.0) <= 2e-3);
  CHECK(std::abs(c.optimum - 1.0) <= c.error_bar + 1e-9);
}

TEST_CASE("grid refuses large dimensions and reports infeasibility") {
  LinearProgram big{std::vector<double>(5, 1.0), {}, {}, std::vector<double>(5, 0.0), std::vector<double>(5, 1.0)};
  CHECK_THROWS_AS(static_optimum_grid(big, 1e-2), ValidationError);
  // x >= 2 on [0, 1].
  LinearProgram none{{1.0}, {{-1.0}}, {-2.0}, {0.0}, {1.0}};
  CHECK_THROWS_AS(static_optimum_grid(none, 1e-2), SearchError);
}

TEST_CASE("grid agrees with vertex enumeration on random LPs") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 1 + trial % 3;
    const LinearProgram lp = random_lp(gen, n, 1 + trial % 2);
    const auto exact = ref::lp_vertex_optimum(lp);
    REQUIRE(exact.has_value());
    const auto r = static_optimum_grid(lp, default_resolution(n));
    CHECK(r.optimum >= *exact - 1e-9);
    CHECK(r.optimum - *exact <= r.error_bar + 1e-9);
  }
}

TEST_CASE("finer grids never do worse") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 10; ++trial) {
    const LinearProgram lp = random_lp(gen, 2, 2);
    const double coarse = static_optimum_grid(lp, 1e-1).optimum;
    const double fine = static_optimum_grid(lp, 1e-2).optimum;
    CHECK(fine <= coarse + 1e-12);
  }
}

TEST_CASE("multiplier examples") {
  SUBCASE("unconstrained problem has a zero multiplier") {
    ConvexProgram p = linear_on_unit(1.0);
    p.g = {ConvexFunction::affine({1.0}, 0.0)};
    p.c = {5.0};
    const auto opt = static_optimum_grid(p, 1e-3);
    const auto m = estimate_multiplier(p, opt);
    CHECK(m.certified);
    CHECK(m.mu[0] == doctest::Approx(0.0).epsilon(1e-3));
  }
  SUBCASE("minimize x subject to x >= 1/2") {
    ConvexProgram p = linear_on_unit(1.0);
    p.g = {ConvexFunction::affine({-1.0}, 0.0)};
    p.c = {-0.5};
    const auto opt = static_optimum_grid(p, 1e-3);
    const auto m = estimate_multiplier(p, opt);
    CHECK(m.certified);
    CHECK(m.mu[0] == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(m.norm() == doctest::Approx(1.0).epsilon(1e-2));
  }
  SUBCASE("lp cover") {
    const LinearProgram lp = cover();
    const auto m = estimate_multiplier(lp, static_optimum_grid(lp, 1e-3));
    CHECK(m.certified);
    CHECK(m.mu[0] == doctest::Approx(1.0).epsilon(1e-2));
  }
}

TEST_CASE("certified multipliers satisfy the Lagrange inequality on random samples") {
  // min x^2 + y^2 s.t. 1 - x - y <= 0 on [-1, 2]^2: optimum 1/2 at (1/2, 1/2), mu = 1.
  ConvexProgram p;
  p.f = ConvexFunction::diagonal_quadratic({1.0, 1.0}, {0.0, 0.0}, 0.0);
  p.g = {ConvexFunction::affine({-1.0, -1.0}, 1.0)};
  p.c = {0.0};
  p.set = FeasibleSet::box({-1.0, -1.0}, {2.0, 2.0});
  const auto opt = static_optimum_grid(p, 1e-3);
  CHECK(opt.optimum == doctest::Approx(0.5).epsilon(1e-4));
  const auto m = estimate_multiplier(p, opt);
  REQUIRE(m.certified);
  CHECK(m.mu[0] == doctest::Approx(1.0).epsilon(2e-2));
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const std::vector<double> x{u(gen), u(gen)};
    worst = std::min(worst, lagrange_gap(p, m.mu, opt.optimum, x));
  }
  CHECK(worst >= -(1e-6 + opt.error_bar));
}

TEST_CASE("mixture solver") {
  // Points (y0, y1); need E[y1] <= 0. Best mix of (0, 1) and (2, -1) is half/half, value 1.
  const std::vector<std::vector<double>> pts{{0.0, 1.0}, {2.0, -1.0}, {3.0, -2.0}};
  const std::vector<double> c{0.0};
  const auto s = best_feasible_mixture(pts, c);
  REQUIRE(s.feasible);
  CHECK(s.value == doctest::Approx(1.0));
  double total = 0.0;
  for (double w : s.weights) total += w;
  CHECK(total == doctest::Approx(1.0));
  const std::vector<double> impossible{-5.0};
  CHECK_FALSE(best_feasible_mixture(pts, impossible).feasible);
}

TEST_CASE("stochastic optimum examples") {
  SUBCASE("one event, mixing two options gives one half") {
    // Options (y0, y1): (0, 1) and (1, -1); need E[y1] <= 0 -> mix 1/2, value 1/2.
    const auto p = stochastic({0.0}, {1.0}, {{{0.0, 1.0}, {1.0, -1.0}}});
    const auto r = stochastic_optimum(p);
    CHECK(r.optimum == doctest::Approx(0.5).epsilon(1e-9));
    REQUIRE(r.dual_bound.has_value());
    CHECK(*r.dual_bound <= r.optimum + 1e-9);
    CHECK(r.optimum - *r.dual_bound <= 1e-6);
    const auto m = estimate_multiplier(p, r);
    CHECK(m.certified);
    CHECK(m.mu[0] == doctest::Approx(0.5).epsilon(1e-3));
  }
  SUBCASE("the witness policy attains the optimum") {
    const auto p = stochastic({0.2}, {0.5, 0.5}, {{{0.0, 1.0}, {1.0, 0.0}}, {{0.0, 0.5}, {0.3, -0.5}}});
    const auto r = stochastic_optimum(p);
    double y0 = 0.0, y1 = 0.0;
    for (std::size_t e = 0; e < 2; ++e) {
      for (std::size_t a = 0; a < 2; ++a) {
        y0 += 0.5 * r.policy[e][a] * p.options[e][a][0];
        y1 += 0.5 * r.policy[e][a] * p.options[e][a][1];
      }
    }
    CHECK(y0 == doctest::Approx(r.optimum).epsilon(1e-9));
    CHECK(y1 <= 0.2 + 1e-9);
  }
  SUBCASE("infeasible") {
    const auto p = stochastic({-2.0}, {1.0}, {{{0.0, 1.0}, {1.0, -1.0}}});
    CHECK_THROWS_AS(stochastic_optimum(p), SearchError);
  }
}

TEST_CASE("stochastic optimum matches brute force on tiny instances") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<std::vector<OptionVector>> options(2);
    for (auto& ev : options) {
      for (int a = 0; a < 3; ++a) ev.push_back({u(gen), u(gen)});
    }
    // Option 0 of each event gets y1 = -1 so the problem is feasible.
    options[0][0][1] = -1.0;
    options[1][0][1] = -1.0;
    const auto p = stochastic({0.0}, {0.4, 0.6}, options);
    const auto r = stochastic_optimum(p);
    const auto brute = ref::simplex_grid_optimum(p, 60);
    REQUIRE(brute.has_value());
    // The grid only sees rational mixtures, so it can only be above the exact optimum.
    CHECK(r.optimum <= *brute + 1e-9);
    CHECK(*brute - r.optimum <= 0.05);
    CHECK(*r.dual_bound <= r.optimum + 1e-9);
  }
}

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "dpp/convex.hpp"
#include "dpp/errors.hpp"
#include "dpp/oracle.hpp"

using namespace dpp;

namespace {

ConvexProgram lp_instance() {
  ConvexProgram p;
  p.f = ConvexFunction::affine({1.0, 1.0}, 0.0);
  p.g = {ConvexFunction::affine({-1.0, -1.0}, 0.0)};
  p.c = {-1.0};
  p.set = FeasibleSet::box({0.0, 0.0}, {1.0, 1.0});
  return p;
}

ConvexProgram equality_instance() {
  ConvexProgram p;
  p.f = ConvexFunction::affine({-1.0}, 0.0);
  p.w = {ConvexFunction::affine({1.0}, 0.0)};
  p.d = {0.3};
  p.set = FeasibleSet::box({0.0}, {1.0});
  return p;
}

}  // namespace

TEST_CASE("per_slot_objective") {
  ConvexProgram p;
  p.f = ConvexFunction::affine({1.0}, 0.0);
  p.g = {ConvexFunction::diagonal_quadratic({1.0}, {0.0}, 0.0)};
  p.c = {0.0};
  p.set = FeasibleSet::box({-1.0}, {1.0});

  SUBCASE("zero queues give v f") {
    const auto obj = per_slot_objective(p, QueueState(1, 0), 3.0);
    const std::vector<double> x{0.7};
    CHECK(obj(x) == doctest::Approx(2.1));
  }
  SUBCASE("x + 2x^2 has its minimizer at -1/4") {
    QueueState q(1, 0);
    q.ineq = {2.0};
    const auto obj = per_slot_objective(p, q, 1.0);
    const auto r = inner_minimize(obj, p.set, {});
    CHECK(r.x[0] == doctest::Approx(-0.25).epsilon(1e-6));
    CHECK(r.value == doctest::Approx(-0.125).epsilon(1e-9));
  }
  SUBCASE("matches a term-by-term recomputation") {
    ConvexProgram e = equality_instance();
    e.g = {ConvexFunction::diagonal_quadratic({2.0}, {1.0}, -1.0)};
    e.c = {0.0};
    QueueState q(1, 1);
    q.ineq = {1.5};
    q.eq = {-4.0};
    const auto obj = per_slot_objective(e, q, 7.0);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const std::vector<double> x{u(gen)};
      CHECK(obj(x) == doctest::Approx(7.0 * e.f(x) + 1.5 * e.g[0](x) - 4.0 * e.w[0](x)).epsilon(1e-12));
    }
  }
  SUBCASE("queue size mismatch") { CHECK_THROWS_AS(per_slot_objective(p, QueueState(2, 0), 1.0), ValidationError); }
}

TEST_CASE("inner_minimize examples") {
  const auto box = FeasibleSet::box({0.0}, {1.0});
  CHECK(inner_minimize(ConvexFunction::diagonal_quadratic({1.0}, {-0.6}, 0.09), box, {}).x[0] ==
        doctest::Approx(0.3).epsilon(1e-6));
  CHECK(std::abs(inner_minimize(ConvexFunction::affine({1.0}, 0.0), box, {}).x[0]) <= 1e-9);
  const auto wide = FeasibleSet::box({-1.0}, {1.0});
  const auto r = inner_minimize(ConvexFunction::diagonal_quadratic({2.0}, {1.0}, 0.0), wide, {});
  CHECK(std::abs(r.x[0] + 0.25) <= 1e-6);
}

TEST_CASE("inner_minimize reaches the oracle optimum on small boxes") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-2.0, 2.0), q(0.0, 3.0);
  InnerSolverParams long_run;
  long_run.max_iters = 2000;
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<double> curvature{q(gen), q(gen)};
    const std::vector<double> linear{u(gen), u(gen)};
    const auto f = ConvexFunction::diagonal_quadratic(curvature, linear, 0.0);
    ConvexProgram p;
    p.f = f;
    p.set = FeasibleSet::box({-1.0, -1.0}, {1.0, 1.0});
    const auto grid = static_optimum_grid(p, 1e-3);
    // Normalized steps zig-zag on badly conditioned quadratics, so the default
    // 200 iterations only get within about 1e-4.
    CHECK(inner_minimize(f, p.set, {}).value <= grid.optimum + 1e-4);
    CHECK(inner_minimize(f, p.set, long_run).value <= grid.optimum + 1e-6);
  }
}

TEST_CASE("inner_minimize reports NaN with the offending iterate") {
  const auto bad = ConvexFunction(
      1, [](std::span<const double> x) { return x[0] < 0.25 ? std::numeric_limits<double>::quiet_NaN() : x[0]; },
      [](std::span<const double>, std::span<double> g) { g[0] = 1.0; });
  try {
    inner_minimize(bad, FeasibleSet::box({0.0}, {1.0}), {});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("iterate (") != std::string::npos);
  }
}

TEST_CASE("run_convex propagates inner failures with the slot index") {
  ConvexProgram p = lp_instance();
  p.f = ConvexFunction(
      2, [](std::span<const double> x) { return x[0] + x[1] > 0.9 ? x[0] + x[1] : std::nan(""); },
      [](std::span<const double>, std::span<double> g) { g[0] = g[1] = 1.0; });
  try {
    run_convex(p, 10.0, 5);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).rfind("slot 0", 0) == 0);
  }
}

TEST_CASE("never-binding constraint leaves x at the argmin of f") {
  ConvexProgram p;
  p.f = ConvexFunction::diagonal_quadratic({1.0}, {-0.8}, 0.0);  // argmin 0.4
  p.g = {ConvexFunction::affine({1.0}, 0.0)};
  p.c = {5.0};
  p.set = FeasibleSet::box({0.0}, {1.0});
  const auto run = run_convex(p, 4.0, 200);
  for (std::size_t s = 0; s < run.trace.length(); ++s) CHECK(run.trace.x(s)[0] == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(run.trace.x_bar(200)[0] == doctest::Approx(0.4).epsilon(1e-6));
}

TEST_CASE("covering program meets the objective bound and the O(eps) violation") {
  const auto p = lp_instance();
  const double b = compute_B_convex(p);
  CHECK(b == 0.5);
  for (double eps : {0.1, 0.05}) {
    const double v = 1.0 / eps;
    const auto t = static_cast<Slot>(std::ceil(1.0 / (eps * eps)));
    const auto run = run_convex(p, v, t);
    const auto xb = run.trace.x_bar(t);
    CHECK(p.f(xb) <= 1.0 + b / v + 1e-6);
    // Violation bound with mu = 1: (|mu| + sqrt(|mu|^2 + 2B)) eps.
    CHECK(-xb[0] - xb[1] <= -1.0 + (1.0 + std::sqrt(1.0 + 2.0 * b)) * eps + 1e-6);
    for (Slot s = 1; s <= t; ++s) {
      CHECK(run.trace.time_average(s, 0) <= 1.0 + b / v + 1e-6);
      const auto x = run.trace.x_bar(s);
      CHECK(p.set.contains(x, 1e-12));
    }
  }
}

TEST_CASE("equality program converges through its Z queue") {
  const auto p = equality_instance();
  for (double eps : {0.1, 0.02}) {
    const auto t = static_cast<Slot>(std::ceil(1.0 / (eps * eps)));
    const auto run = run_convex(p, 1.0 / eps, t);
    CHECK(std::abs(run.trace.x_bar(t)[0] - 0.3) <= 5 * eps);
    CHECK(std::abs(run.trace.time_average(t, 0) + 0.3) <= 5 * eps);
    // Telescoping: Z(t) = sum (w - d).
    double sum = 0.0;
    for (std::size_t s = 0; s < run.trace.length(); ++s) {
      sum += run.trace.w(s)[0] - 0.3;
      CHECK(std::abs(run.trace.eq_after(s)[0] - sum) <= 1e-9 * static_cast<double>(s + 1));
    }
  }
}

TEST_CASE("compute_B_convex") {
  ConvexProgram p;
  p.f = ConvexFunction::affine({0.0}, 0.0);
  p.g = {ConvexFunction::affine({1.0}, 0.0)};
  p.c = {0.0};
  p.set = FeasibleSet::box({0.0}, {1.0});
  CHECK(compute_B_convex(p) == 0.5);
  CHECK(compute_B_convex(lp_instance()) == 0.5);

  SUBCASE("affine ranges agree with corner enumeration") {
    std::mt19937_64 gen(12);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
      ConvexProgram r;
      r.f = ConvexFunction::zero(3);
      std::vector<double> lo{u(gen), u(gen), u(gen)}, hi(3);
      for (std::size_t i = 0; i < 3; ++i) hi[i] = lo[i] + 0.5 + std::abs(u(gen));
      r.set = FeasibleSet::box(lo, hi);
      double expected = 0.0;
      for (int k = 0; k < 2; ++k) {
        const std::vector<double> a{u(gen), u(gen), u(gen)};
        const double b = u(gen), c = u(gen);
        r.g.push_back(ConvexFunction::affine(a, b));
        r.c.push_back(c);
        double worst = 0.0;
        for (int mask = 0; mask < 8; ++mask) {
          double v = b;
          for (std::size_t i = 0; i < 3; ++i) v += a[i] * ((mask >> i) & 1 ? hi[i] : lo[i]);
          worst = std::max(worst, std::abs(v - c));
        }
        expected += 0.5 * worst * worst;
      }
      CHECK(compute_B_convex(r) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  SUBCASE("opaque constraints on non-box sets need declared ranges") {
    ConvexProgram r;
    r.f = ConvexFunction::zero(1);
    r.g = {ConvexFunction(1, [](std::span<const double> x) { return x[0] * x[0] * x[0] * x[0]; },
                          [](std::span<const double> x, std::span<double> g) { g[0] = 4 * x[0] * x[0] * x[0]; })};
    r.c = {0.0};
    r.set = FeasibleSet::projectable(1, [](std::span<double> x) { x[0] = std::clamp(x[0], -1.0, 1.0); }, 2.0);
    CHECK_THROWS_AS(compute_B_convex(r), ValidationError);
    r.g[0].with_range(0.0, 1.0);
    CHECK(compute_B_convex(r) == 0.5);
  }
}

TEST_CASE("jensen_check") {
  SUBCASE("affine functions are tight") {
    const auto p = lp_instance();
    const auto run = run_convex(p, 10.0, 300);
    for (Slot t = 1; t <= 300; t += 13) {
      const auto r = jensen_check(p, run.trace, t);
      CHECK(r.holds);
      CHECK(r.f_at_average == doctest::Approx(r.average_penalty).epsilon(1e-12));
    }
  }
  SUBCASE("x^2 with x alternating 0, 1") {
    ConvexProgram p;
    p.f = ConvexFunction::diagonal_quadratic({1.0}, {0.0}, 0.0);
    p.set = FeasibleSet::box({0.0}, {1.0});
    Trace trace(0, 0, 1);
    QueueState q(0, 0);
    for (int s = 0; s < 10; ++s) {
      const double x[] = {static_cast<double>(s % 2)};
      const double y[] = {x[0] * x[0]};
      trace.append(y, {}, q, x);
    }
    const auto r = jensen_check(p, trace, 10);
    CHECK(r.f_at_average == 0.25);
    CHECK(r.average_penalty == 0.5);
    CHECK(r.holds);
  }
}

TEST_CASE("program validation") {
  ConvexProgram p = equality_instance();
  p.w = {ConvexFunction::diagonal_quadratic({1.0}, {0.0}, 0.0)};
  CHECK_THROWS_AS(p.validate(), ValidationError);
  p = lp_instance();
  p.c.clear();
  CHECK_THROWS_AS(p.validate(), ValidationError);
}

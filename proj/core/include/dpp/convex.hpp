#pragma once

#include <cstddef>
#include <vector>

#include "dpp/function.hpp"
#include "dpp/queue.hpp"
#include "dpp/trace.hpp"

namespace dpp {

/// minimize f(x) s.t. g_k(x) <= c_k, w_i(x) = d_i, x in X.
/// Equality functions must be affine so that Z_i w_i(x) stays convex for
/// either sign of Z_i.
struct ConvexProgram {
  ConvexFunction f;
  std::vector<ConvexFunction> g;
  std::vector<double> c;
  std::vector<ConvexFunction> w;
  std::vector<double> d;
  FeasibleSet set;

  std::size_t dimension() const { return set.dimension(); }
  std::size_t num_ineq() const { return g.size(); }
  std::size_t num_eq() const { return w.size(); }

  void validate() const;
};

struct InnerSolverParams {
  int max_iters = 200;
  /// Initial step c0; 0 selects the feasible set's diameter.
  double step_scale = 0.0;
  /// Stop once the step falls below tolerance * c0.
  double tolerance = 1e-12;
};

struct InnerResult {
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  /// Step length in force when the solver stopped; 0 at an exact stationary point.
  double final_step = 0.0;
};

/// x -> v f(x) + sum_k Q_k g_k(x) + sum_i Z_i w_i(x).
ConvexFunction per_slot_objective(const ConvexProgram& program, const QueueState& queues, double v);

/// Projected subgradient descent from the set's start point with diminishing
/// steps c0/sqrt(j); c0 halves whenever a trial point fails to improve the
/// best iterate. For boxes the direction ignores components blocked by an
/// active bound. Returns the best iterate. Throws NumericalError on NaN.
InnerResult inner_minimize(const ConvexFunction& objective, const FeasibleSet& set,
                           const InnerSolverParams& params);

struct ConvexRun {
  Trace trace;
  /// Largest final inner step over all slots.
  double max_inner_step = 0.0;
};

/// Deterministic drift-plus-penalty loop with running-average primal recovery.
ConvexRun run_convex(const ConvexProgram& program, double v, Slot t_max,
                     const InnerSolverParams& inner = {});

/// 1/2 sum_k (sup_X |g_k - c_k|)^2 + 1/2 sum_i (sup_X |w_i - d_i|)^2.
/// Exact on boxes for closed-form functions; otherwise uses declared ranges
/// and throws ValidationError when one is missing.
double compute_B_convex(const ConvexProgram& program);

struct JensenReport {
  double f_at_average = 0.0;       // f(x̄(t))
  double average_penalty = 0.0;    // ȳ_0(t)
  std::vector<double> g_at_average;  // g_k(x̄(t))
  std::vector<double> average_constraint;  // ȳ_k(t)
  double max_excess = 0.0;         // largest LHS - RHS over all inequalities
  bool holds = false;
};

/// Checks f(x̄(t)) <= ȳ_0(t) and g_k(x̄(t)) <= ȳ_k(t) within tol.
JensenReport jensen_check(const ConvexProgram& program, const Trace& trace, Slot t,
                          double tol = 1e-9);

}  // namespace dpp

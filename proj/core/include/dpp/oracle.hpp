#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dpp/convex.hpp"
#include "dpp/linear_program.hpp"
#include "dpp/stochastic.hpp"

namespace dpp {

/// Brute-force ground truth for desk-scale instances.
///
/// `optimum` is always attained by the returned witness (`optimizer` for
/// static programs, `policy` for stochastic problems); `error_bar` bounds how
/// far that value may sit from the true optimum.
struct OracleResult {
  double optimum = 0.0;
  /// Static programs: the best grid point. Stochastic problems: E[y] under
  /// the witness policy, (y_0, ..., y_K).
  std::vector<double> optimizer;
  /// Stochastic only: policy[event][option] = probability of choosing option.
  std::vector<std::vector<double>> policy;
  double resolution = 0.0;
  double error_bar = 0.0;
  /// Stochastic only: exact dual lower bound D(mu*) <= y0_opt.
  std::optional<double> dual_bound;
  /// Stochastic only: the maximizing multiplier found while bounding.
  std::optional<std::vector<double>> mu;
};

/// 1e-3 for N <= 2, 1e-2 for N in 3..4.
double default_resolution(std::size_t dim);

/// Exhaustive grid search over a box at the given step, then one refinement
/// pass at step/10 around the best cell. Refuses N > 4 (ValidationError);
/// throws SearchError when no grid point is feasible.
OracleResult static_optimum_grid(const ConvexProgram& program, double resolution);
OracleResult static_optimum_grid(const LinearProgram& lp, double resolution);

/// Optimum over stationary randomized policies, i.e. min y_0 over the set of
/// achievable one-slot expectations subject to y_k <= c_k. The dual
/// D(mu) = sum_w p(w) min_a [y_0 + mu.(y - c)] is maximized by zooming grid
/// search; the witness is an exact mixture of deterministic policies taken
/// around the maximizer. `resolution` sets the perturbation scale used to
/// collect those policies. Requires K <= 3.
OracleResult stochastic_optimum(const StochasticProblem& problem, double resolution = 0.02);

struct MultiplierOptions {
  /// Sample-grid step for static programs; 0 picks a step giving <= ~2e5 samples.
  double resolution = 0.0;
  /// Search box [0, mu_max] (inequalities), [-mu_max, mu_max] (equalities);
  /// 0 selects 10 x (objective range) / (constraint range), doubled while the
  /// maximizer sits on the boundary.
  double mu_max = 0.0;
  double tolerance = 1e-6;
};

struct MultiplierEstimate {
  /// Inequality multipliers first, then equality multipliers.
  std::vector<double> mu;
  double dual_value = 0.0;
  /// dual_value - optimum.optimum
  double margin = 0.0;
  bool certified = false;
  double mu_max = 0.0;
  double norm() const;
};

MultiplierEstimate estimate_multiplier(const ConvexProgram& program, const OracleResult& optimum,
                                       const MultiplierOptions& options = {});
MultiplierEstimate estimate_multiplier(const LinearProgram& lp, const OracleResult& optimum,
                                       const MultiplierOptions& options = {});
MultiplierEstimate estimate_multiplier(const StochasticProblem& problem, const OracleResult& optimum,
                                       const MultiplierOptions& options = {});

/// f(x) + sum mu_k (g_k(x) - c_k) + sum nu_i (w_i(x) - d_i) - y0_opt; nonnegative
/// everywhere on X when mu is a Lagrange multiplier.
double lagrange_gap(const ConvexProgram& program, std::span<const double> mu, double y0_opt,
                    std::span<const double> x);

/// Exact D(mu) for a stochastic problem.
double stochastic_dual_value(const StochasticProblem& problem, std::span<const double> mu);

struct MixtureSolution {
  bool feasible = false;
  std::vector<double> weights;
  double value = 0.0;
};

/// min sum_j l_j p_j[0] s.t. sum_j l_j p_j[k] <= c_k (k >= 1), l in the simplex,
/// solved exactly by enumerating basic solutions. Points are (y_0, ..., y_K).
MixtureSolution best_feasible_mixture(std::span<const std::vector<double>> points,
                                      std::span<const double> c, double tol = 1e-12);

}  // namespace dpp

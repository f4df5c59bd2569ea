#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace dpp {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// sum_i q_i x_i^2 + a_i x_i, plus b. Affine when every q_i is zero.
struct QuadraticForm {
  std::vector<double> q;
  std::vector<double> a;
  double b = 0.0;
};

/// A convex function on R^n with a subgradient oracle.
///
/// Functions built from `affine` / `diagonal_quadratic` carry their
/// coefficients, which lets combinators stay in closed form and lets range
/// queries over boxes be exact. Anything else is opaque: callers that need a
/// range for it must declare one with `with_range`.
class ConvexFunction {
 public:
  using Evaluate = std::function<double(std::span<const double>)>;
  using Subgradient = std::function<void(std::span<const double>, std::span<double>)>;

  ConvexFunction() = default;
  ConvexFunction(std::size_t dim, Evaluate evaluate, Subgradient subgradient);

  static ConvexFunction affine(std::vector<double> a, double b);
  /// Requires q_i >= 0.
  static ConvexFunction diagonal_quadratic(std::vector<double> q, std::vector<double> a, double b);
  static ConvexFunction zero(std::size_t dim);

  std::size_t dimension() const { return dim_; }
  double operator()(std::span<const double> x) const;
  void subgradient(std::span<const double> x, std::span<double> out) const;
  std::vector<double> subgradient(std::span<const double> x) const;

  const std::optional<QuadraticForm>& form() const { return form_; }
  bool is_affine() const;

  /// Declares lo <= f(x) <= hi over the feasible set the function is used on.
  ConvexFunction& with_range(double lo, double hi);
  const std::optional<Interval>& declared_range() const { return declared_range_; }

  /// Exact range over a box for closed-form functions, else the declared
  /// range, else nullopt.
  std::optional<Interval> range_over_box(std::span<const double> lower,
                                         std::span<const double> upper) const;

 private:
  static ConvexFunction from_form(QuadraticForm form);

  std::size_t dim_ = 0;
  Evaluate evaluate_;
  Subgradient subgradient_;
  std::optional<QuadraticForm> form_;
  std::optional<Interval> declared_range_;
};

/// One weighted term of a nonnegative-weight (or affine-term) combination.
struct WeightedTerm {
  double weight;
  const ConvexFunction* function;
};

/// sum_j weight_j * f_j(x), evaluated term by term in the given order.
/// Closed-form inputs produce a closed-form result.
ConvexFunction weighted_sum(std::span<const WeightedTerm> terms);

/// f(x) + <coef, x>.
ConvexFunction add_linear(const ConvexFunction& f, std::span<const double> coef);

/// x in R^dim  ->  f(x[indices[0]], x[indices[1]], ...).
ConvexFunction embed(const ConvexFunction& f, std::size_t dim, std::vector<std::size_t> indices);

/// Compact convex feasible set: a box, or any set with a projection operator.
class FeasibleSet {
 public:
  using Projection = std::function<void(std::span<double>)>;

  FeasibleSet() = default;

  /// Requires lower_i < upper_i, all finite.
  static FeasibleSet box(std::vector<double> lower, std::vector<double> upper);
  /// `diameter` must bound the set's diameter; it scales the solver steps.
  static FeasibleSet projectable(std::size_t dim, Projection projection, double diameter);
  /// Cartesian product of two boxes.
  static FeasibleSet product(const FeasibleSet& first, const FeasibleSet& second);

  bool is_box() const { return !projection_; }
  std::size_t dimension() const { return dim_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

  void project(std::span<double> x) const;
  /// Box midpoint, or the projection of the origin.
  std::vector<double> start_point() const;
  double diameter() const { return diameter_; }
  bool contains(std::span<const double> x, double tol = 1e-12) const;

 private:
  std::size_t dim_ = 0;
  std::vector<double> lower_;
  std::vector<double> upper_;
  Projection projection_;
  double diameter_ = 0.0;
};

}  // namespace dpp

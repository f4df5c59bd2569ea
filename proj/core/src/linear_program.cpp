#include "dpp/linear_program.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpp/errors.hpp"

namespace dpp {

void LinearProgram::validate() const {
  const std::size_t n = b.size();
  if (n == 0) throw ValidationError("lp: b must be nonempty");
  if (x_min.size() != n || x_max.size() != n) {
    throw ValidationError("lp: x_min and x_max must have length " + std::to_string(n));
  }
  if (c.size() != A.size()) {
    throw ValidationError("lp: A has " + std::to_string(A.size()) + " rows but c has " +
                          std::to_string(c.size()) + " entries");
  }
  for (std::size_t k = 0; k < A.size(); ++k) {
    if (A[k].size() != n) {
      throw ValidationError("lp: row " + std::to_string(k) + " of A has length " +
                            std::to_string(A[k].size()) + ", expected " + std::to_string(n));
    }
    for (double a : A[k]) {
      if (!std::isfinite(a)) throw ValidationError("lp: A contains a non-finite entry");
    }
    if (!std::isfinite(c[k])) throw ValidationError("lp: c contains a non-finite entry");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(b[i])) throw ValidationError("lp: b contains a non-finite entry");
    if (!(x_min[i] < x_max[i])) {
      throw ValidationError("lp: x_min[" + std::to_string(i) + "] must be < x_max[" +
                            std::to_string(i) + "]");
    }
  }
}

ConvexProgram LinearProgram::to_convex() const {
  validate();
  ConvexProgram program;
  program.f = ConvexFunction::affine(b, 0.0);
  for (const auto& row : A) program.g.push_back(ConvexFunction::affine(row, 0.0));
  program.c = c;
  program.set = FeasibleSet::box(x_min, x_max);
  return program;
}

std::vector<double> lp_per_slot_decision(const LinearProgram& lp, const QueueState& queues, double v) {
  if (queues.num_ineq() != lp.num_constraints() || queues.num_eq() != 0) {
    throw ValidationError("lp_per_slot_decision: queue state has " +
                          std::to_string(queues.num_ineq()) + " queues, lp has " +
                          std::to_string(lp.num_constraints()) + " constraints");
  }
  const std::size_t n = lp.dimension();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    double score = v * lp.b[i];
    for (std::size_t k = 0; k < lp.num_constraints(); ++k) score += queues.ineq[k] * lp.A[k][i];
    x[i] = score <= 0.0 ? lp.x_max[i] : lp.x_min[i];
  }
  return x;
}

Trace run_lp(const LinearProgram& lp, double v, Slot t_max) {
  lp.validate();
  if (!(v > 0.0)) throw DomainError("run_lp: v must be positive");
  if (t_max < 1) throw DomainError("run_lp: t_max must be >= 1");
  const std::size_t k = lp.num_constraints();
  const std::size_t n = lp.dimension();
  Trace trace(k, 0, n);
  trace.reserve(static_cast<std::size_t>(t_max));
  QueueState queues(k, 0);
  std::vector<double> y(k + 1);
  for (Slot t = 0; t < t_max; ++t) {
    const auto x = lp_per_slot_decision(lp, queues, v);
    y[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) y[0] += lp.b[i] * x[i];
    for (std::size_t j = 0; j < k; ++j) {
      double ax = 0.0;
      for (std::size_t i = 0; i < n; ++i) ax += lp.A[j][i] * x[i];
      y[j + 1] = ax;
      queues.ineq[j] = update_inequality(queues.ineq[j], ax, lp.c[j]);
    }
    trace.append(y, {}, queues, x);
  }
  return trace;
}

double compute_B_lp(const LinearProgram& lp) {
  lp.validate();
  double sum = 0.0;
  for (std::size_t k = 0; k < lp.num_constraints(); ++k) {
    double lo = 0.0, hi = 0.0;
    for (std::size_t i = 0; i < lp.dimension(); ++i) {
      const double a = lp.A[k][i];
      lo += a >= 0.0 ? a * lp.x_min[i] : a * lp.x_max[i];
      hi += a >= 0.0 ? a * lp.x_max[i] : a * lp.x_min[i];
    }
    const double dev = std::max(std::abs(lo - lp.c[k]), std::abs(hi - lp.c[k]));
    sum += dev * dev;
  }
  return 0.5 * sum;
}

}  // namespace dpp

#include "dpp/convex.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "dpp/errors.hpp"

namespace dpp {
namespace {

std::string describe(std::span<const double> x) {
  std::ostringstream out;
  out.precision(17);
  out << '(';
  for (std::size_t i = 0; i < x.size(); ++i) out << (i ? ", " : "") << x[i];
  out << ')';
  return out.str();
}

double sup_deviation(const ConvexFunction& fn, const FeasibleSet& set, double target,
                     const std::string& name) {
  std::optional<Interval> range;
  if (set.is_box()) {
    range = fn.range_over_box(set.lower(), set.upper());
  } else {
    range = fn.declared_range();
  }
  if (!range) {
    throw ValidationError(name + ": cannot bound the function over the feasible set; declare a "
                                 "range with ConvexFunction::with_range");
  }
  return std::max(std::abs(range->lo - target), std::abs(range->hi - target));
}

}  // namespace

void ConvexProgram::validate() const {
  const std::size_t n = set.dimension();
  if (n == 0) throw ValidationError("convex program: feasible set has dimension 0");
  if (f.dimension() != n) throw ValidationError("convex program: objective dimension mismatch");
  if (g.size() != c.size()) {
    throw ValidationError("convex program: " + std::to_string(g.size()) + " constraint functions but " +
                          std::to_string(c.size()) + " constants c");
  }
  if (w.size() != d.size()) {
    throw ValidationError("convex program: " + std::to_string(w.size()) +
                          " equality functions but " + std::to_string(d.size()) + " constants d");
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g[k].dimension() != n) {
      throw ValidationError("convex program: constraint " + std::to_string(k) + " dimension mismatch");
    }
    if (!std::isfinite(c[k])) throw ValidationError("convex program: c is not finite");
  }
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i].dimension() != n) {
      throw ValidationError("convex program: equality " + std::to_string(i) + " dimension mismatch");
    }
    if (!w[i].is_affine()) {
      throw ValidationError("convex program: equality function " + std::to_string(i) +
                            " must be affine");
    }
    if (!std::isfinite(d[i])) throw ValidationError("convex program: d is not finite");
  }
}

ConvexFunction per_slot_objective(const ConvexProgram& program, const QueueState& queues, double v) {
  if (queues.num_ineq() != program.num_ineq() || queues.num_eq() != program.num_eq()) {
    throw ValidationError("per_slot_objective: queue state has " + std::to_string(queues.num_ineq()) +
                          "+" + std::to_string(queues.num_eq()) + " queues, program needs " +
                          std::to_string(program.num_ineq()) + "+" +
                          std::to_string(program.num_eq()));
  }
  std::vector<WeightedTerm> terms;
  terms.reserve(1 + program.num_ineq() + program.num_eq());
  terms.push_back({v, &program.f});
  for (std::size_t k = 0; k < program.num_ineq(); ++k) terms.push_back({queues.ineq[k], &program.g[k]});
  for (std::size_t i = 0; i < program.num_eq(); ++i) terms.push_back({queues.eq[i], &program.w[i]});
  return weighted_sum(terms);
}

InnerResult inner_minimize(const ConvexFunction& objective, const FeasibleSet& set,
                           const InnerSolverParams& params) {
  if (params.max_iters < 1) throw ValidationError("inner_minimize: max_iters must be >= 1");
  if (objective.dimension() != set.dimension()) {
    throw ValidationError("inner_minimize: objective and feasible set dimensions differ");
  }
  const std::size_t n = set.dimension();
  const double c0 = params.step_scale > 0.0 ? params.step_scale : set.diameter();

  InnerResult result;
  result.x = set.start_point();
  result.value = objective(result.x);
  if (!std::isfinite(result.value)) {
    throw NumericalError("inner_minimize: objective is not finite at start point " +
                         describe(result.x));
  }

  std::vector<double> grad(n), dir(n), trial(n);
  double scale = c0;
  double j = 1.0;
  double step = c0;
  double norm = 0.0;
  bool fresh_point = true;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    if (fresh_point) {
      objective.subgradient(result.x, grad);
      double sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(grad[i])) {
          throw NumericalError("inner_minimize: non-finite subgradient at " + describe(result.x));
        }
        dir[i] = grad[i];
        if (set.is_box() && ((result.x[i] <= set.lower()[i] && grad[i] > 0.0) ||
                             (result.x[i] >= set.upper()[i] && grad[i] < 0.0))) {
          dir[i] = 0.0;
        }
        sq += dir[i] * dir[i];
      }
      norm = std::sqrt(sq);
      fresh_point = false;
    }
    if (norm == 0.0) {
      step = 0.0;
      break;
    }
    step = scale / std::sqrt(j);
    if (step < params.tolerance * c0) break;

    for (std::size_t i = 0; i < n; ++i) trial[i] = result.x[i] - step * dir[i] / norm;
    set.project(trial);
    const double value = objective(trial);
    ++result.iterations;
    if (!std::isfinite(value)) {
      throw NumericalError("inner_minimize: objective diverged at iterate " + describe(trial));
    }
    if (value < result.value) {
      result.x = trial;
      result.value = value;
      j += 1.0;
      fresh_point = true;
    } else {
      scale *= 0.5;
    }
  }
  result.final_step = step;
  return result;
}

ConvexRun run_convex(const ConvexProgram& program, double v, Slot t_max,
                     const InnerSolverParams& inner) {
  program.validate();
  if (!(v > 0.0)) throw DomainError("run_convex: v must be positive");
  if (t_max < 1) throw DomainError("run_convex: t_max must be >= 1");

  const std::size_t k = program.num_ineq();
  const std::size_t m = program.num_eq();
  ConvexRun run{Trace(k, m, program.dimension()), 0.0};
  run.trace.reserve(static_cast<std::size_t>(t_max));

  QueueState queues(k, m);
  std::vector<double> y(k + 1), w(m);
  for (Slot t = 0; t < t_max; ++t) {
    InnerResult decision;
    try {
      decision = inner_minimize(per_slot_objective(program, queues, v), program.set, inner);
    } catch (const NumericalError& e) {
      throw NumericalError("slot " + std::to_string(t) + ": " + e.what());
    }
    run.max_inner_step = std::max(run.max_inner_step, decision.final_step);
    const auto& x = decision.x;
    y[0] = program.f(x);
    for (std::size_t j = 0; j < k; ++j) {
      y[j + 1] = program.g[j](x);
      queues.ineq[j] = update_inequality(queues.ineq[j], y[j + 1], program.c[j]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      w[i] = program.w[i](x);
      queues.eq[i] = update_equality(queues.eq[i], w[i], program.d[i]);
    }
    run.trace.append(y, w, queues, x);
  }
  return run;
}

double compute_B_convex(const ConvexProgram& program) {
  program.validate();
  double sum = 0.0;
  for (std::size_t k = 0; k < program.num_ineq(); ++k) {
    const double dev = sup_deviation(program.g[k], program.set, program.c[k],
                                     "constraint " + std::to_string(k));
    sum += dev * dev;
  }
  for (std::size_t i = 0; i < program.num_eq(); ++i) {
    const double dev = sup_deviation(program.w[i], program.set, program.d[i],
                                     "equality " + std::to_string(i));
    sum += dev * dev;
  }
  return 0.5 * sum;
}

JensenReport jensen_check(const ConvexProgram& program, const Trace& trace, Slot t, double tol) {
  if (t < 1) throw DomainError("jensen_check: t must be >= 1");
  const auto xbar = trace.x_bar(t);
  JensenReport report;
  report.f_at_average = program.f(xbar);
  report.average_penalty = trace.time_average(t, 0);
  report.max_excess = report.f_at_average - report.average_penalty;
  for (std::size_t k = 0; k < program.num_ineq(); ++k) {
    report.g_at_average.push_back(program.g[k](xbar));
    report.average_constraint.push_back(trace.time_average(t, k + 1));
    report.max_excess =
        std::max(report.max_excess, report.g_at_average.back() - report.average_constraint.back());
  }
  report.holds = report.max_excess <= tol;
  return report;
}

}  // namespace dpp

#pragma once

#include <cstddef>
#include <vector>

#include "dpp/convex.hpp"
#include "dpp/queue.hpp"
#include "dpp/trace.hpp"

namespace dpp {

/// minimize sum_i b_i x_i  s.t.  sum_i A[k][i] x_i <= c_k,  x_min <= x <= x_max.
struct LinearProgram {
  std::vector<double> b;
  std::vector<std::vector<double>> A;  // K rows of length N
  std::vector<double> c;
  std::vector<double> x_min;
  std::vector<double> x_max;

  std::size_t dimension() const { return b.size(); }
  std::size_t num_constraints() const { return A.size(); }

  void validate() const;
  /// The same instance expressed with affine ConvexFunctions over a box.
  ConvexProgram to_convex() const;
};

/// Bang-bang rule: x_i = x_max,i when V b_i + sum_k Q_k A[k][i] <= 0, else x_min,i.
std::vector<double> lp_per_slot_decision(const LinearProgram& lp, const QueueState& queues, double v);

/// Deterministic drift-plus-penalty loop with the closed-form decision.
Trace run_lp(const LinearProgram& lp, double v, Slot t_max);

/// 1/2 sum_k (max over the box of |A_k x - c_k|)^2, exact by sign-based
/// interval evaluation.
double compute_B_lp(const LinearProgram& lp);

}  // namespace dpp

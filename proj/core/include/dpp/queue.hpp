#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace dpp {

using Slot = std::int64_t;

/// Backlog of every virtual queue in a run: K inequality queues (clipped at
/// zero) followed by M signed equality queues. Lengths never change once a
/// run has started.
struct QueueState {
  std::vector<double> ineq;
  std::vector<double> eq;

  QueueState() = default;
  QueueState(std::size_t num_ineq, std::size_t num_eq)
      : ineq(num_ineq, 0.0), eq(num_eq, 0.0) {}

  std::size_t num_ineq() const { return ineq.size(); }
  std::size_t num_eq() const { return eq.size(); }
};

/// max(q + y - c, 0). Throws ValidationError on non-finite input or q < 0.
double update_inequality(double q, double y, double c);

/// z + w - d, never clipped.
double update_equality(double z, double w, double d);

/// c + q_t / t: upper bound on the running average of the arrivals feeding a
/// queue with backlog q_t after t slots. Throws DomainError when t < 1.
double violation_bound(double q_t, Slot t, double c);

/// 1/2 (sum Q_k^2 + sum Z_i^2).
double lyapunov(const QueueState& state);

/// Euclidean norm of the concatenated (Q, Z) vector.
double queue_norm(const QueueState& state);

/// v * mu_norm + sqrt(v^2 mu_norm^2 + 2 b t), the largest root of the
/// quadratic that bounds the queue-vector norm after t slots.
double queue_norm_bound(double v, double mu_norm, double b, Slot t);

double euclidean_norm(std::span<const double> values);

}  // namespace dpp

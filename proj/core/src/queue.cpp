#include "dpp/queue.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dpp/errors.hpp"

namespace dpp {
namespace {

void require_finite(double value, const char* name, const char* op) {
  if (!std::isfinite(value)) {
    throw ValidationError(std::string(op) + ": " + name + " is not finite");
  }
}

}  // namespace

double update_inequality(double q, double y, double c) {
  require_finite(q, "q", "update_inequality");
  require_finite(y, "y", "update_inequality");
  require_finite(c, "c", "update_inequality");
  if (q < 0.0) {
    throw ValidationError("update_inequality: q must be nonnegative");
  }
  return std::max(q + y - c, 0.0);
}

double update_equality(double z, double w, double d) {
  require_finite(z, "z", "update_equality");
  require_finite(w, "w", "update_equality");
  require_finite(d, "d", "update_equality");
  return z + w - d;
}

double violation_bound(double q_t, Slot t, double c) {
  if (t < 1) {
    throw DomainError("violation_bound: t must be >= 1");
  }
  return c + q_t / static_cast<double>(t);
}

double lyapunov(const QueueState& state) {
  double sum = 0.0;
  for (double q : state.ineq) sum += q * q;
  for (double z : state.eq) sum += z * z;
  return 0.5 * sum;
}

double euclidean_norm(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

double queue_norm(const QueueState& state) { return std::sqrt(2.0 * lyapunov(state)); }

double queue_norm_bound(double v, double mu_norm, double b, Slot t) {
  if (!(v > 0.0)) throw DomainError("queue_norm_bound: v must be positive");
  if (t < 1) throw DomainError("queue_norm_bound: t must be >= 1");
  if (mu_norm < 0.0) throw DomainError("queue_norm_bound: mu_norm must be nonnegative");
  if (b < 0.0) throw DomainError("queue_norm_bound: b must be nonnegative");
  const double vm = v * mu_norm;
  return vm + std::sqrt(vm * vm + 2.0 * b * static_cast<double>(t));
}

}  // namespace dpp

#include "dpp/trace.hpp"

#include <string>

#include "dpp/errors.hpp"

namespace dpp {

Trace::Trace(std::size_t num_ineq, std::size_t num_eq, std::size_t dim)
    : num_ineq_(num_ineq), num_eq_(num_eq), dim_(dim) {}

void Trace::reserve(std::size_t slots) {
  y_.reserve(slots * (num_ineq_ + 1));
  y_sum_.reserve(slots * (num_ineq_ + 1));
  w_.reserve(slots * num_eq_);
  w_sum_.reserve(slots * num_eq_);
  queues_.reserve(slots * (num_ineq_ + num_eq_));
  x_.reserve(slots * dim_);
  x_avg_.reserve(slots * dim_);
  x_sum_.reserve(slots * dim_);
  events_.reserve(slots);
  options_.reserve(slots);
}

void Trace::append(std::span<const double> y, std::span<const double> w, const QueueState& after,
                   std::span<const double> x, std::size_t event, std::size_t option) {
  if (y.size() != num_ineq_ + 1 || w.size() != num_eq_ || after.num_ineq() != num_ineq_ ||
      after.num_eq() != num_eq_ || x.size() != dim_) {
    throw ValidationError("Trace::append: record does not match trace layout");
  }
  const std::size_t ny = num_ineq_ + 1;
  for (std::size_t k = 0; k < ny; ++k) {
    y_.push_back(y[k]);
    y_sum_.push_back(length_ == 0 ? y[k] : y_sum_[(length_ - 1) * ny + k] + y[k]);
  }
  for (std::size_t i = 0; i < num_eq_; ++i) {
    w_.push_back(w[i]);
    w_sum_.push_back(length_ == 0 ? w[i] : w_sum_[(length_ - 1) * num_eq_ + i] + w[i]);
  }
  queues_.insert(queues_.end(), after.ineq.begin(), after.ineq.end());
  queues_.insert(queues_.end(), after.eq.begin(), after.eq.end());

  const double t = static_cast<double>(length_);
  for (std::size_t n = 0; n < dim_; ++n) {
    x_.push_back(x[n]);
    const double prev = length_ == 0 ? 0.0 : x_avg_[(length_ - 1) * dim_ + n];
    x_avg_.push_back(prev * (t / (t + 1.0)) + x[n] / (t + 1.0));
    x_sum_.push_back(length_ == 0 ? x[n] : x_sum_[(length_ - 1) * dim_ + n] + x[n]);
  }
  events_.push_back(event);
  options_.push_back(option);
  ++length_;
}

std::span<const double> Trace::y(std::size_t slot) const {
  const std::size_t ny = num_ineq_ + 1;
  return std::span<const double>(y_).subspan(slot * ny, ny);
}

std::span<const double> Trace::w(std::size_t slot) const {
  return std::span<const double>(w_).subspan(slot * num_eq_, num_eq_);
}

std::span<const double> Trace::x(std::size_t slot) const {
  return std::span<const double>(x_).subspan(slot * dim_, dim_);
}

std::span<const double> Trace::x_average(std::size_t slot) const {
  return std::span<const double>(x_avg_).subspan(slot * dim_, dim_);
}

std::span<const double> Trace::ineq_after(std::size_t slot) const {
  const std::size_t nq = num_ineq_ + num_eq_;
  return std::span<const double>(queues_).subspan(slot * nq, num_ineq_);
}

std::span<const double> Trace::eq_after(std::size_t slot) const {
  const std::size_t nq = num_ineq_ + num_eq_;
  return std::span<const double>(queues_).subspan(slot * nq + num_ineq_, num_eq_);
}

QueueState Trace::queues_at(Slot t) const {
  if (t < 0 || static_cast<std::size_t>(t) > length_) {
    throw DomainError("Trace::queues_at: t out of range");
  }
  QueueState state(num_ineq_, num_eq_);
  if (t == 0) return state;
  const auto q = ineq_after(static_cast<std::size_t>(t - 1));
  const auto z = eq_after(static_cast<std::size_t>(t - 1));
  state.ineq.assign(q.begin(), q.end());
  state.eq.assign(z.begin(), z.end());
  return state;
}

void Trace::check_t(Slot t) const {
  if (t < 1 || static_cast<std::size_t>(t) > length_) {
    throw DomainError("time index t=" + std::to_string(t) + " outside [1, " +
                      std::to_string(length_) + "]");
  }
}

double Trace::time_average(Slot t, std::size_t k) const {
  check_t(t);
  if (k > num_ineq_) throw DomainError("time_average: component index out of range");
  return y_sum_[(static_cast<std::size_t>(t) - 1) * (num_ineq_ + 1) + k] / static_cast<double>(t);
}

double Trace::equality_average(Slot t, std::size_t i) const {
  check_t(t);
  if (i >= num_eq_) throw DomainError("equality_average: component index out of range");
  return w_sum_[(static_cast<std::size_t>(t) - 1) * num_eq_ + i] / static_cast<double>(t);
}

std::vector<double> Trace::x_bar(Slot t) const {
  check_t(t);
  const auto avg = x_average(static_cast<std::size_t>(t) - 1);
  return {avg.begin(), avg.end()};
}

std::vector<double> Trace::x_bar_exact(Slot t) const {
  check_t(t);
  std::vector<double> out(dim_);
  const std::size_t base = (static_cast<std::size_t>(t) - 1) * dim_;
  for (std::size_t n = 0; n < dim_; ++n) out[n] = x_sum_[base + n] / static_cast<double>(t);
  return out;
}

double time_average(const Trace& trace, Slot t, std::size_t k) { return trace.time_average(t, k); }

}  // namespace dpp

#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "dpp/queue.hpp"

namespace dpp {

/// Per-slot record of a drift-plus-penalty run.
///
/// Row `slot` holds the decision taken at that slot: the penalty/constraint
/// values y = (y_0, ..., y_K), the equality values w = (w_1, ..., w_M), the
/// queue backlogs *after* the update (i.e. Q(slot + 1)), and for engines with
/// a primal variable the chosen x and the incrementally updated average
/// x̄(slot + 1). Running sums are kept per slot so that every time average is
/// reconstructable exactly from stored values.
class Trace {
 public:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  Trace() = default;
  Trace(std::size_t num_ineq, std::size_t num_eq, std::size_t dim = 0);

  void reserve(std::size_t slots);

  void append(std::span<const double> y, std::span<const double> w, const QueueState& after,
              std::span<const double> x = {}, std::size_t event = kNone,
              std::size_t option = kNone);

  std::size_t length() const { return length_; }
  std::size_t num_ineq() const { return num_ineq_; }
  std::size_t num_eq() const { return num_eq_; }
  std::size_t dim() const { return dim_; }

  std::span<const double> y(std::size_t slot) const;
  std::span<const double> w(std::size_t slot) const;
  std::span<const double> x(std::size_t slot) const;
  /// x̄(slot + 1) from the incremental update rule.
  std::span<const double> x_average(std::size_t slot) const;
  std::span<const double> ineq_after(std::size_t slot) const;
  std::span<const double> eq_after(std::size_t slot) const;
  std::size_t event(std::size_t slot) const { return events_.at(slot); }
  std::size_t option(std::size_t slot) const { return options_.at(slot); }

  /// Queue state at the start of slot t (t = 0 gives the all-zero state).
  QueueState queues_at(Slot t) const;

  /// ȳ_k(t) = (1/t) sum_{tau < t} y_k(tau), k in 0..K.
  double time_average(Slot t, std::size_t k) const;
  /// (1/t) sum_{tau < t} w_i(tau).
  double equality_average(Slot t, std::size_t i) const;
  /// x̄(t) from the incremental rule x̄(t+1) = x̄(t) t/(t+1) + x(t)/(t+1).
  std::vector<double> x_bar(Slot t) const;
  /// x̄(t) as exact sum / count.
  std::vector<double> x_bar_exact(Slot t) const;

  /// Optional display names for event indices (stochastic runs).
  std::vector<std::string> event_labels;

 private:
  void check_t(Slot t) const;

  std::size_t num_ineq_ = 0;
  std::size_t num_eq_ = 0;
  std::size_t dim_ = 0;
  std::size_t length_ = 0;

  std::vector<double> y_;
  std::vector<double> w_;
  std::vector<double> queues_;
  std::vector<double> x_;
  std::vector<double> x_avg_;
  std::vector<double> y_sum_;
  std::vector<double> w_sum_;
  std::vector<double> x_sum_;
  std::vector<std::size_t> events_;
  std::vector<std::size_t> options_;
};

/// Free-function form of Trace::time_average.
double time_average(const Trace& trace, Slot t, std::size_t k);

}  // namespace dpp

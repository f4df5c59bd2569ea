#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dpp/queue.hpp"
#include "dpp/rng.hpp"
#include "dpp/trace.hpp"

namespace dpp {

/// i.i.d. random event ω(t) over a finite alphabet, sampled by inverse CDF.
class RandomEventModel {
 public:
  RandomEventModel() = default;
  RandomEventModel(std::vector<std::string> ids, std::vector<double> probabilities);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<double>& probabilities() const { return probabilities_; }

  std::size_t sample(SplitMix64& rng) const;

 private:
  std::vector<std::string> ids_;
  std::vector<double> probabilities_;
  std::vector<double> cdf_;
};

/// An option vector (y_0, y_1, ..., y_K).
using OptionVector = std::vector<double>;

/// Minimize the time average of y_0 subject to time averages of y_k <= c_k,
/// where each slot's y is picked from a finite option list attached to the
/// observed event.
struct StochasticProblem {
  std::vector<double> c;
  RandomEventModel events;
  /// options[event][index] is an OptionVector of length K + 1.
  std::vector<std::vector<OptionVector>> options;
  /// h_0 >= max |y_0|, h_k >= max y_k^2; filled in by validate().
  std::vector<double> moment_bounds;

  std::size_t num_constraints() const { return c.size(); }
  std::size_t total_options() const;

  /// Checks dimensions and finiteness and records the moment bounds.
  void validate();
};

/// Index minimizing v*y_0 + sum_k Q_k y_k; ties go to the lowest index.
std::size_t per_slot_decision(std::span<const OptionVector> options, const QueueState& queues,
                              double v);

/// Runs t_max slots of drift-plus-penalty from all-zero queues.
Trace run_stochastic(const StochasticProblem& problem, double v, Slot t_max, std::uint64_t seed);

/// max over every (event, option) of 1/2 sum_k (y_k - c_k)^2.
double compute_B(const StochasticProblem& problem);

// -- multi-user wireless downlink generator ---------------------------------

struct ChannelState {
  std::string id;
  double probability = 0.0;
};

/// Finite distribution of per-slot arrivals for one user.
struct ArrivalModel {
  std::vector<double> amounts;
  std::vector<double> probabilities;

  static ArrivalModel bernoulli(double probability, double amount = 1.0);
};

/// Transmission rates mu_k(p, S) for every user given a power vector and a
/// channel-state index.
using RateFunction =
    std::function<std::vector<double>(std::span<const double> power, std::size_t channel)>;

struct DownlinkModel {
  std::vector<ChannelState> channels;
  std::vector<ArrivalModel> arrivals;           // one per user
  std::vector<std::vector<double>> power_levels;  // one alphabet per user
  RateFunction rates;
};

/// Minimum total average power subject to average service >= average arrivals
/// for every user: y_0 = sum p_k, y_k = a_k - mu_k(p, S), c_k = 0. Events are
/// (channel, arrival vector) pairs with independent users; options are every
/// power vector in the product alphabet.
StochasticProblem build_downlink_problem(const DownlinkModel& model);

}  // namespace dpp

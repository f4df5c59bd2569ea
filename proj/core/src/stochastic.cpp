#include "dpp/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

#include "dpp/errors.hpp"

namespace dpp {
namespace {

constexpr double kProbabilityTolerance = 1e-12;

void require_probabilities(std::span<const double> probabilities, const std::string& what) {
  if (probabilities.empty()) throw ValidationError(what + ": empty alphabet");
  double sum = 0.0;
  for (double p : probabilities) {
    if (!std::isfinite(p) || p < 0.0) {
      throw ValidationError(what + ": probabilities must be finite and nonnegative");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << what << ": probabilities sum to " << sum << ", expected 1";
    throw ValidationError(msg.str());
  }
}

// Odometer over a product of alphabets; returns false after the last tuple.
bool advance(std::vector<std::size_t>& index, const std::vector<std::size_t>& sizes) {
  for (std::size_t pos = index.size(); pos-- > 0;) {
    if (++index[pos] < sizes[pos]) return true;
    index[pos] = 0;
  }
  return false;
}

}  // namespace

RandomEventModel::RandomEventModel(std::vector<std::string> ids, std::vector<double> probabilities)
    : ids_(std::move(ids)), probabilities_(std::move(probabilities)) {
  if (ids_.size() != probabilities_.size()) {
    throw ValidationError("event model: ids and probabilities differ in length");
  }
  require_probabilities(probabilities_, "event model");
  cdf_.resize(probabilities_.size());
  std::partial_sum(probabilities_.begin(), probabilities_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

std::size_t RandomEventModel::sample(SplitMix64& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return std::min(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1);
}

std::size_t StochasticProblem::total_options() const {
  std::size_t total = 0;
  for (const auto& list : options) total += list.size();
  return total;
}

void StochasticProblem::validate() {
  const std::size_t k = c.size();
  if (k == 0) throw ValidationError("stochastic problem: need at least one constraint (K >= 1)");
  for (double ck : c) {
    if (!std::isfinite(ck)) throw ValidationError("stochastic problem: c contains non-finite value");
  }
  if (events.size() == 0) throw ValidationError("stochastic problem: event model is empty");
  if (options.size() != events.size()) {
    throw ValidationError("stochastic problem: options must be given for every event");
  }
  moment_bounds.assign(k + 1, 0.0);
  for (std::size_t e = 0; e < options.size(); ++e) {
    if (options[e].empty()) {
      throw ValidationError("stochastic problem: event '" + events.ids()[e] + "' has no options");
    }
    for (const auto& y : options[e]) {
      if (y.size() != k + 1) {
        throw ValidationError("stochastic problem: option for event '" + events.ids()[e] +
                              "' has length " + std::to_string(y.size()) + ", expected " +
                              std::to_string(k + 1));
      }
      for (double v : y) {
        if (!std::isfinite(v)) throw ValidationError("stochastic problem: non-finite option entry");
      }
      moment_bounds[0] = std::max(moment_bounds[0], std::abs(y[0]));
      for (std::size_t j = 1; j <= k; ++j) {
        moment_bounds[j] = std::max(moment_bounds[j], y[j] * y[j]);
      }
    }
  }
}

std::size_t per_slot_decision(std::span<const OptionVector> options, const QueueState& queues,
                              double v) {
  if (options.empty()) throw ValidationError("per_slot_decision: empty option set");
  const std::size_t k = queues.num_ineq();
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t a = 0; a < options.size(); ++a) {
    const auto& y = options[a];
    if (y.size() != k + 1) {
      throw ValidationError("per_slot_decision: option length " + std::to_string(y.size()) +
                            " does not match K + 1 = " + std::to_string(k + 1));
    }
    double score = v * y[0];
    for (std::size_t j = 0; j < k; ++j) score += queues.ineq[j] * y[j + 1];
    if (a == 0 || score < best_score) {
      best = a;
      best_score = score;
    }
  }
  return best;
}

Trace run_stochastic(const StochasticProblem& problem, double v, Slot t_max, std::uint64_t seed) {
  if (!(v > 0.0)) throw DomainError("run_stochastic: v must be positive");
  if (t_max < 1) throw DomainError("run_stochastic: t_max must be >= 1");
  const std::size_t k = problem.num_constraints();
  SplitMix64 rng(seed);
  QueueState queues(k, 0);
  Trace trace(k, 0, 0);
  trace.reserve(static_cast<std::size_t>(t_max));
  trace.event_labels = problem.events.ids();
  for (Slot t = 0; t < t_max; ++t) {
    const std::size_t event = problem.events.sample(rng);
    const auto& options = problem.options[event];
    const std::size_t choice = per_slot_decision(options, queues, v);
    const auto& y = options[choice];
    for (std::size_t j = 0; j < k; ++j) {
      queues.ineq[j] = update_inequality(queues.ineq[j], y[j + 1], problem.c[j]);
    }
    trace.append(y, {}, queues, {}, event, choice);
  }
  return trace;
}

double compute_B(const StochasticProblem& problem) {
  double b = 0.0;
  for (const auto& list : problem.options) {
    for (const auto& y : list) {
      double sum = 0.0;
      for (std::size_t j = 0; j < problem.c.size(); ++j) {
        const double gap = y[j + 1] - problem.c[j];
        sum += gap * gap;
      }
      b = std::max(b, 0.5 * sum);
    }
  }
  return b;
}

ArrivalModel ArrivalModel::bernoulli(double probability, double amount) {
  return ArrivalModel{{0.0, amount}, {1.0 - probability, probability}};
}

StochasticProblem build_downlink_problem(const DownlinkModel& model) {
  const std::size_t users = model.arrivals.size();
  if (users == 0) throw ValidationError("downlink: need at least one user");
  if (model.power_levels.size() != users) {
    throw ValidationError("downlink: power_levels must list one alphabet per user");
  }
  if (model.channels.empty()) throw ValidationError("downlink: channel model is empty");
  if (!model.rates) throw ValidationError("downlink: rate function missing");

  std::vector<double> channel_probs;
  for (const auto& ch : model.channels) channel_probs.push_back(ch.probability);
  require_probabilities(channel_probs, "downlink channel model");
  for (std::size_t u = 0; u < users; ++u) {
    const auto& a = model.arrivals[u];
    if (a.amounts.size() != a.probabilities.size()) {
      throw ValidationError("downlink arrival model for user " + std::to_string(u) +
                            ": amounts and probabilities differ in length");
    }
    require_probabilities(a.probabilities, "downlink arrival model for user " + std::to_string(u));
    if (model.power_levels[u].empty()) {
      throw ValidationError("downlink: power alphabet for user " + std::to_string(u) + " is empty");
    }
  }

  // Every power vector in the product alphabet, user 0 varying slowest.
  std::vector<std::vector<double>> powers;
  {
    std::vector<std::size_t> sizes, index(users, 0);
    for (const auto& levels : model.power_levels) sizes.push_back(levels.size());
    do {
      std::vector<double> p(users);
      for (std::size_t u = 0; u < users; ++u) p[u] = model.power_levels[u][index[u]];
      powers.push_back(std::move(p));
    } while (advance(index, sizes));
  }

  std::vector<std::string> ids;
  std::vector<double> probs;
  StochasticProblem problem;
  problem.c.assign(users, 0.0);

  std::vector<std::size_t> arrival_sizes;
  for (const auto& a : model.arrivals) arrival_sizes.push_back(a.amounts.size());

  for (std::size_t ch = 0; ch < model.channels.size(); ++ch) {
    // Rates depend only on (power, channel); tabulate once per channel.
    std::vector<std::vector<double>> rates;
    for (const auto& p : powers) {
      auto r = model.rates(p, ch);
      if (r.size() != users) {
        throw ValidationError("downlink: rate function returned " + std::to_string(r.size()) +
                              " rates for " + std::to_string(users) + " users");
      }
      for (double v : r) {
        if (!std::isfinite(v)) throw ValidationError("downlink: non-finite rate");
      }
      rates.push_back(std::move(r));
    }
    std::vector<std::size_t> index(users, 0);
    do {
      double prob = model.channels[ch].probability;
      std::string id = model.channels[ch].id + "|";
      std::vector<double> arrivals(users);
      for (std::size_t u = 0; u < users; ++u) {
        prob *= model.arrivals[u].probabilities[index[u]];
        arrivals[u] = model.arrivals[u].amounts[index[u]];
        std::ostringstream amount;
        amount << arrivals[u];
        id += (u ? "," : "") + amount.str();
      }
      std::vector<OptionVector> options;
      for (std::size_t a = 0; a < powers.size(); ++a) {
        OptionVector y(users + 1);
        y[0] = std::accumulate(powers[a].begin(), powers[a].end(), 0.0);
        for (std::size_t u = 0; u < users; ++u) y[u + 1] = arrivals[u] - rates[a][u];
        options.push_back(std::move(y));
      }
      ids.push_back(std::move(id));
      probs.push_back(prob);
      problem.options.push_back(std::move(options));
    } while (advance(index, arrival_sizes));
  }

  // Products of probabilities summing to 1 can drift by a few ulps; renormalize.
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  for (double& p : probs) p /= total;
  problem.events = RandomEventModel(std::move(ids), std::move(probs));
  problem.validate();
  return problem;
}

}  // namespace dpp

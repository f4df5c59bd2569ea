#include "dpp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <string>

#include "dpp/errors.hpp"
#include "dpp/rng.hpp"

namespace dpp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxGridDim = 4;
constexpr std::size_t kMaxMultipliers = 3;
constexpr std::size_t kMaxSamples = 200000;
constexpr int kRandomSamples = 10000;
constexpr std::uint64_t kSampleSeed = 0x5eedULL;

struct Axis {
  double lo;
  double hi;
  std::size_t n;  // intervals; n + 1 points

  double step() const { return (hi - lo) / static_cast<double>(n); }
  double at(std::size_t j) const {
    return j == n ? hi : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n);
  }
};

std::vector<Axis> make_axes(std::span<const double> lower, std::span<const double> upper, double h) {
  std::vector<Axis> axes;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    const double span = upper[i] - lower[i];
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(span / h - 1e-9)));
    axes.push_back({lower[i], upper[i], n});
  }
  return axes;
}

double max_step(const std::vector<Axis>& axes) {
  double s = 0.0;
  for (const auto& a : axes) s = std::max(s, a.step());
  return s;
}

std::size_t grid_size(const std::vector<Axis>& axes) {
  std::size_t count = 1;
  for (const auto& a : axes) count *= a.n + 1;
  return count;
}

// Visits every grid point in lexicographic index order.
void for_each_point(const std::vector<Axis>& axes, const std::function<void(std::span<const double>)>& visit) {
  std::vector<std::size_t> index(axes.size(), 0);
  std::vector<double> x(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) x[i] = axes[i].at(0);
  while (true) {
    visit(x);
    std::size_t pos = axes.size();
    while (pos-- > 0) {
      if (++index[pos] <= axes[pos].n) {
        x[pos] = axes[pos].at(index[pos]);
        break;
      }
      index[pos] = 0;
      x[pos] = axes[pos].at(0);
    }
    if (pos == static_cast<std::size_t>(-1)) return;
  }
}

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

struct GridSearch {
  const ConvexProgram& program;
  std::vector<double> eq_tol;
  double best = kInf;
  std::vector<double> best_x;
  double lipschitz = 0.0;
  std::vector<double> grad;

  bool feasible(std::span<const double> x) const {
    for (std::size_t k = 0; k < program.num_ineq(); ++k) {
      if (program.g[k](x) > program.c[k] + 1e-9 * (1.0 + std::abs(program.c[k]))) return false;
    }
    for (std::size_t i = 0; i < program.num_eq(); ++i) {
      if (std::abs(program.w[i](x) - program.d[i]) > eq_tol[i]) return false;
    }
    return true;
  }

  void set_equality_tolerance(double step) {
    eq_tol.clear();
    for (const auto& w : program.w) eq_tol.push_back(l1(w.form()->a) * step / 2.0 + 1e-9);
  }

  void scan(const std::vector<Axis>& axes, bool track_lipschitz) {
    grad.resize(program.dimension());
    for_each_point(axes, [&](std::span<const double> x) {
      if (track_lipschitz) {
        program.f.subgradient(x, grad);
        lipschitz = std::max(lipschitz, l1(grad));
      }
      if (!feasible(x)) return;
      const double value = program.f(x);
      if (value < best) {
        best = value;
        best_x.assign(x.begin(), x.end());
      }
    });
  }
};

// Maximizes a concave function over a box by repeatedly gridding and zooming
// onto the best cell. Returns the best point seen.
std::vector<double> zoom_maximize(std::vector<double> lo, std::vector<double> hi,
                                  const std::function<double(std::span<const double>)>& fn,
                                  double* best_value) {
  const std::size_t dim = lo.size();
  const std::size_t points = dim == 1 ? 41 : dim == 2 ? 15 : 9;
  const std::vector<double> lo0 = lo, hi0 = hi;
  std::vector<double> best(dim, 0.0);
  double best_val = -kInf;
  std::vector<double> mu(dim);
  for (int round = 0; round < 200; ++round) {
    std::vector<Axis> axes;
    for (std::size_t k = 0; k < dim; ++k) axes.push_back({lo[k], hi[k], points - 1});
    for_each_point(axes, [&](std::span<const double> m) {
      const double val = fn(m);
      if (val > best_val) {
        best_val = val;
        best.assign(m.begin(), m.end());
      }
    });
    bool done = true;
    for (std::size_t k = 0; k < dim; ++k) {
      const double step = axes[k].step();
      if (step > 1e-13 * (1.0 + std::abs(best[k]))) done = false;
      lo[k] = std::max(lo0[k], best[k] - step);
      hi[k] = std::min(hi0[k], best[k] + step);
    }
    if (done) break;
  }
  *best_value = best_val;
  return best;
}

// Searches the multiplier box, doubling mu_max while the maximizer touches it.
MultiplierEstimate search_multiplier(std::size_t num_ineq, std::size_t num_eq, double mu_max,
                                     const std::function<double(std::span<const double>)>& dual) {
  const std::size_t dim = num_ineq + num_eq;
  MultiplierEstimate est;
  for (int expand = 0; expand < 8; ++expand) {
    std::vector<double> lo(dim), hi(dim, mu_max);
    for (std::size_t i = 0; i < num_eq; ++i) lo[num_ineq + i] = -mu_max;
    double value = 0.0;
    est.mu = zoom_maximize(lo, hi, dual, &value);
    est.dual_value = value;
    est.mu_max = mu_max;
    bool on_boundary = false;
    for (std::size_t k = 0; k < dim; ++k) {
      if (std::abs(est.mu[k]) >= mu_max * (1.0 - 1e-9)) on_boundary = true;
    }
    if (!on_boundary) break;
    mu_max *= 2.0;
  }
  return est;
}

double auto_mu_max(double objective_range, std::span<const double> constraint_ranges) {
  double smallest = kInf;
  for (double r : constraint_ranges) {
    if (r > 0.0) smallest = std::min(smallest, r);
  }
  if (!std::isfinite(smallest) || objective_range <= 0.0) return 1.0;
  return 10.0 * objective_range / smallest;
}

std::vector<std::size_t> policy_at(const StochasticProblem& problem, std::span<const double> mu) {
  std::vector<std::size_t> policy(problem.options.size());
  for (std::size_t e = 0; e < problem.options.size(); ++e) {
    double best = kInf;
    for (std::size_t a = 0; a < problem.options[e].size(); ++a) {
      const auto& y = problem.options[e][a];
      double score = y[0];
      for (std::size_t k = 0; k < mu.size(); ++k) score += mu[k] * (y[k + 1] - problem.c[k]);
      if (score < best) {
        best = score;
        policy[e] = a;
      }
    }
  }
  return policy;
}

std::vector<double> expected_point(const StochasticProblem& problem, const std::vector<std::size_t>& policy) {
  std::vector<double> point(problem.num_constraints() + 1, 0.0);
  const auto& probs = problem.events.probabilities();
  for (std::size_t e = 0; e < policy.size(); ++e) {
    const auto& y = problem.options[e][policy[e]];
    for (std::size_t k = 0; k < point.size(); ++k) point[k] += probs[e] * y[k];
  }
  return point;
}

// Solves a small dense system in place; false when (numerically) singular.
bool solve_dense(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-14) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
      b[r] -= factor * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t r = n; r-- > 0;) {
    double sum = b[r];
    for (std::size_t c = r + 1; c < n; ++c) sum -= a[r][c] * x[c];
    x[r] = sum / a[r][r];
  }
  return true;
}

// Calls visit(subset) for every size-s subset of {0..n-1} in lexicographic order.
void for_each_subset(std::size_t n, std::size_t s, const std::function<void(const std::vector<std::size_t>&)>& visit) {
  if (s > n) return;
  std::vector<std::size_t> idx(s);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    visit(idx);
    std::size_t pos = s;
    while (pos-- > 0) {
      if (idx[pos] < n - s + pos) {
        ++idx[pos];
        for (std::size_t q = pos + 1; q < s; ++q) idx[q] = idx[q - 1] + 1;
        break;
      }
    }
    if (pos == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace

double default_resolution(std::size_t dim) { return dim <= 2 ? 1e-3 : 1e-2; }

OracleResult static_optimum_grid(const ConvexProgram& program, double resolution) {
  program.validate();
  if (!program.set.is_box()) throw ValidationError("oracle: grid search needs a box feasible set");
  if (program.dimension() > kMaxGridDim) {
    throw ValidationError("oracle: refusing grid search in dimension " +
                          std::to_string(program.dimension()) + " (limit 4)");
  }
  if (!(resolution > 0.0)) throw ValidationError("oracle: resolution must be positive");

  const auto coarse = make_axes(program.set.lower(), program.set.upper(), resolution);
  const double h = max_step(coarse);
  GridSearch search{program, {}, kInf, {}, 0.0, {}};
  search.set_equality_tolerance(h);
  search.scan(coarse, true);
  if (search.best_x.empty()) {
    throw SearchError("oracle: no feasible point found at this resolution");
  }

  std::vector<Axis> fine;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    const double lo = std::max(coarse[i].lo, search.best_x[i] - coarse[i].step());
    const double hi = std::min(coarse[i].hi, search.best_x[i] + coarse[i].step());
    fine.push_back({lo, hi, 20});
  }
  search.set_equality_tolerance(max_step(fine));
  search.scan(fine, false);

  OracleResult result;
  result.optimum = search.best;
  result.optimizer = search.best_x;
  result.resolution = resolution;
  result.error_bar = search.lipschitz * h / 2.0;
  return result;
}

OracleResult static_optimum_grid(const LinearProgram& lp, double resolution) {
  return static_optimum_grid(lp.to_convex(), resolution);
}

double MultiplierEstimate::norm() const { return euclidean_norm(mu); }

double lagrange_gap(const ConvexProgram& program, std::span<const double> mu, double y0_opt,
                    std::span<const double> x) {
  if (mu.size() != program.num_ineq() + program.num_eq()) {
    throw ValidationError("lagrange_gap: multiplier length mismatch");
  }
  double value = program.f(x) - y0_opt;
  for (std::size_t k = 0; k < program.num_ineq(); ++k) value += mu[k] * (program.g[k](x) - program.c[k]);
  for (std::size_t i = 0; i < program.num_eq(); ++i) {
    value += mu[program.num_ineq() + i] * (program.w[i](x) - program.d[i]);
  }
  return value;
}

MultiplierEstimate estimate_multiplier(const ConvexProgram& program, const OracleResult& optimum,
                                       const MultiplierOptions& options) {
  program.validate();
  if (!program.set.is_box()) throw ValidationError("estimate_multiplier: needs a box feasible set");
  const std::size_t k_ineq = program.num_ineq(), k_eq = program.num_eq();
  const std::size_t dim = k_ineq + k_eq;
  if (dim > kMaxMultipliers) {
    throw ValidationError("estimate_multiplier: at most 3 constraints supported");
  }

  double h = options.resolution > 0.0 ? options.resolution : default_resolution(program.dimension());
  auto axes = make_axes(program.set.lower(), program.set.upper(), h);
  while (options.resolution <= 0.0 && grid_size(axes) > kMaxSamples) {
    h *= 1.5;
    axes = make_axes(program.set.lower(), program.set.upper(), h);
  }

  // Sampled points of the achievable set: (f, g - c, w - d) on the grid plus the witness.
  std::vector<double> f_vals;
  std::vector<std::vector<double>> slack(dim);
  auto add_sample = [&](std::span<const double> x) {
    f_vals.push_back(program.f(x));
    for (std::size_t k = 0; k < k_ineq; ++k) slack[k].push_back(program.g[k](x) - program.c[k]);
    for (std::size_t i = 0; i < k_eq; ++i) slack[k_ineq + i].push_back(program.w[i](x) - program.d[i]);
  };
  for_each_point(axes, add_sample);
  if (!optimum.optimizer.empty()) add_sample(optimum.optimizer);

  MultiplierEstimate est;
  if (dim == 0) {
    est.dual_value = *std::min_element(f_vals.begin(), f_vals.end());
  } else {
    const auto [fmin, fmax] = std::minmax_element(f_vals.begin(), f_vals.end());
    std::vector<double> ranges;
    for (const auto& s : slack) {
      const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
      ranges.push_back(*hi - *lo);
    }
    const double mu_max = options.mu_max > 0.0 ? options.mu_max : auto_mu_max(*fmax - *fmin, ranges);
    auto dual = [&](std::span<const double> mu) {
      double best = kInf;
      for (std::size_t s = 0; s < f_vals.size(); ++s) {
        double v = f_vals[s];
        for (std::size_t k = 0; k < dim; ++k) v += mu[k] * slack[k][s];
        best = std::min(best, v);
      }
      return best;
    };
    est = search_multiplier(k_ineq, k_eq, mu_max, dual);
  }
  est.margin = est.dual_value - optimum.optimum;
  const double threshold = options.tolerance + optimum.error_bar;
  est.certified = est.margin >= -threshold;

  if (est.certified) {
    SplitMix64 rng(kSampleSeed);
    std::vector<double> x(program.dimension());
    for (int s = 0; s < kRandomSamples && est.certified; ++s) {
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double lo = program.set.lower()[i], hi = program.set.upper()[i];
        x[i] = lo + (hi - lo) * rng.uniform();
      }
      if (lagrange_gap(program, est.mu, optimum.optimum, x) < -threshold) est.certified = false;
    }
  }
  return est;
}

MultiplierEstimate estimate_multiplier(const LinearProgram& lp, const OracleResult& optimum,
                                       const MultiplierOptions& options) {
  return estimate_multiplier(lp.to_convex(), optimum, options);
}

double stochastic_dual_value(const StochasticProblem& problem, std::span<const double> mu) {
  if (mu.size() != problem.num_constraints()) {
    throw ValidationError("stochastic_dual_value: multiplier length mismatch");
  }
  const auto& probs = problem.events.probabilities();
  double total = 0.0;
  for (std::size_t e = 0; e < problem.options.size(); ++e) {
    double best = kInf;
    for (const auto& y : problem.options[e]) {
      double score = y[0];
      for (std::size_t k = 0; k < mu.size(); ++k) score += mu[k] * (y[k + 1] - problem.c[k]);
      best = std::min(best, score);
    }
    total += probs[e] * best;
  }
  return total;
}

MixtureSolution best_feasible_mixture(std::span<const std::vector<double>> points,
                                      std::span<const double> c, double tol) {
  const std::size_t k = c.size();
  std::vector<std::vector<double>> unique;
  for (const auto& p : points) {
    if (p.size() != k + 1) throw ValidationError("best_feasible_mixture: point length mismatch");
    if (std::find(unique.begin(), unique.end(), p) == unique.end()) unique.push_back(p);
  }
  std::vector<std::size_t> origin;
  for (const auto& u : unique) {
    origin.push_back(static_cast<std::size_t>(std::find(points.begin(), points.end(), u) - points.begin()));
  }

  double scale = 1.0;
  for (const auto& p : unique) {
    for (double v : p) scale = std::max(scale, std::abs(v));
  }

  MixtureSolution best;
  best.value = kInf;
  const std::size_t n = unique.size();
  std::vector<double> lambda;
  for (std::size_t s = 1; s <= std::min(n, k + 1); ++s) {
    for_each_subset(n, s, [&](const std::vector<std::size_t>& support) {
      for_each_subset(k, s - 1, [&](const std::vector<std::size_t>& active) {
        std::vector<std::vector<double>> a(s, std::vector<double>(s));
        std::vector<double> rhs(s);
        for (std::size_t j = 0; j < s; ++j) a[0][j] = 1.0;
        rhs[0] = 1.0;
        for (std::size_t r = 0; r + 1 < s; ++r) {
          for (std::size_t j = 0; j < s; ++j) a[r + 1][j] = unique[support[j]][active[r] + 1];
          rhs[r + 1] = c[active[r]];
        }
        if (!solve_dense(a, rhs, lambda)) return;
        for (double l : lambda) {
          if (l < -tol) return;
        }
        for (double& l : lambda) l = std::max(l, 0.0);
        double value = 0.0;
        for (std::size_t j = 0; j < s; ++j) value += lambda[j] * unique[support[j]][0];
        for (std::size_t kk = 0; kk < k; ++kk) {
          double lhs = 0.0;
          for (std::size_t j = 0; j < s; ++j) lhs += lambda[j] * unique[support[j]][kk + 1];
          if (lhs > c[kk] + 1e-9 * (scale + std::abs(c[kk]))) return;
        }
        if (value < best.value) {
          best.feasible = true;
          best.value = value;
          best.weights.assign(points.size(), 0.0);
          for (std::size_t j = 0; j < s; ++j) best.weights[origin[support[j]]] = lambda[j];
        }
      });
    });
  }
  return best;
}

OracleResult stochastic_optimum(const StochasticProblem& problem, double resolution) {
  const std::size_t k = problem.num_constraints();
  if (k == 0 || k > kMaxMultipliers) {
    throw ValidationError("stochastic_optimum: supports 1 <= K <= 3 constraints");
  }
  if (!(resolution > 0.0)) throw ValidationError("stochastic_optimum: resolution must be positive");

  double y0_lo = kInf, y0_hi = -kInf;
  std::vector<double> lo(k, kInf), hi(k, -kInf);
  for (const auto& list : problem.options) {
    for (const auto& y : list) {
      y0_lo = std::min(y0_lo, y[0]);
      y0_hi = std::max(y0_hi, y[0]);
      for (std::size_t j = 0; j < k; ++j) {
        lo[j] = std::min(lo[j], y[j + 1]);
        hi[j] = std::max(hi[j], y[j + 1]);
      }
    }
  }
  std::vector<double> ranges(k);
  for (std::size_t j = 0; j < k; ++j) ranges[j] = hi[j] - lo[j];
  const double mu_max = auto_mu_max(y0_hi - y0_lo, ranges);

  auto dual = [&](std::span<const double> mu) { return stochastic_dual_value(problem, mu); };
  const MultiplierEstimate dual_best = search_multiplier(k, 0, mu_max, dual);
  const auto& mu_star = dual_best.mu;

  // Deterministic policies around mu*: every direction in {-1,0,1}^K plus random ones.
  std::set<std::vector<std::size_t>> seen;
  std::vector<std::vector<std::size_t>> policies;
  std::vector<std::vector<double>> points;
  auto collect = [&](std::span<const double> mu) {
    auto policy = policy_at(problem, mu);
    if (seen.insert(policy).second) {
      points.push_back(expected_point(problem, policy));
      policies.push_back(std::move(policy));
    }
  };
  collect(mu_star);

  double mu_scale = 1.0;
  for (double m : mu_star) mu_scale = std::max(mu_scale, std::abs(m));
  std::vector<std::vector<double>> directions;
  {
    std::vector<int> digits(k, -1);
    while (true) {
      std::vector<double> dir(digits.begin(), digits.end());
      if (std::any_of(dir.begin(), dir.end(), [](double v) { return v != 0.0; })) directions.push_back(dir);
      std::size_t pos = 0;
      while (pos < k && ++digits[pos] > 1) digits[pos++] = -1;
      if (pos == k) break;
    }
    SplitMix64 rng(kSampleSeed);
    for (int r = 0; r < 32; ++r) {
      std::vector<double> dir(k);
      for (double& v : dir) v = 2.0 * rng.uniform() - 1.0;
      directions.push_back(dir);
    }
  }

  MixtureSolution mixture;
  for (double factor : {1.0, 0.1, 0.01, 10.0}) {
    const double delta = resolution * mu_scale * factor;
    std::vector<double> mu(k);
    for (const auto& dir : directions) {
      for (std::size_t j = 0; j < k; ++j) mu[j] = std::max(0.0, mu_star[j] + delta * dir[j]);
      collect(mu);
    }
    mixture = best_feasible_mixture(points, problem.c);
    if (mixture.feasible && mixture.value - dual_best.dual_value <= resolution * 1e-6) break;
  }
  if (!mixture.feasible) {
    throw SearchError("stochastic_optimum: no feasible point found at this resolution");
  }

  OracleResult result;
  result.optimum = mixture.value;
  result.resolution = resolution;
  result.dual_bound = dual_best.dual_value;
  result.mu = mu_star;
  result.error_bar = std::max(0.0, mixture.value - dual_best.dual_value);
  result.optimizer.assign(k + 1, 0.0);
  result.policy.resize(problem.options.size());
  for (std::size_t e = 0; e < problem.options.size(); ++e) {
    result.policy[e].assign(problem.options[e].size(), 0.0);
  }
  for (std::size_t p = 0; p < policies.size(); ++p) {
    const double weight = mixture.weights[p];
    if (weight == 0.0) continue;
    for (std::size_t j = 0; j <= k; ++j) result.optimizer[j] += weight * points[p][j];
    for (std::size_t e = 0; e < policies[p].size(); ++e) result.policy[e][policies[p][e]] += weight;
  }
  return result;
}

MultiplierEstimate estimate_multiplier(const StochasticProblem& problem, const OracleResult& optimum,
                                       const MultiplierOptions& options) {
  const std::size_t k = problem.num_constraints();
  if (k == 0 || k > kMaxMultipliers) {
    throw ValidationError("estimate_multiplier: supports 1 <= K <= 3 constraints");
  }
  MultiplierEstimate est;
  if (optimum.mu && options.mu_max <= 0.0) {
    est.mu = *optimum.mu;
    est.dual_value = stochastic_dual_value(problem, est.mu);
  } else {
    double y0_range = 0.0;
    std::vector<double> ranges(k, 0.0);
    for (const auto& list : problem.options) {
      for (const auto& a : list) {
        for (const auto& b : list) {
          y0_range = std::max(y0_range, std::abs(a[0] - b[0]));
          for (std::size_t j = 0; j < k; ++j) ranges[j] = std::max(ranges[j], std::abs(a[j + 1] - b[j + 1]));
        }
      }
    }
    const double mu_max = options.mu_max > 0.0 ? options.mu_max : auto_mu_max(y0_range, ranges);
    est = search_multiplier(k, 0, mu_max,
                            [&](std::span<const double> mu) { return stochastic_dual_value(problem, mu); });
  }
  est.margin = est.dual_value - optimum.optimum;
  est.certified = est.margin >= -options.tolerance;

  if (est.certified) {
    // Fresh random stationary policies: their expectation vectors sample the achievable set.
    SplitMix64 rng(kSampleSeed);
    const auto& probs = problem.events.probabilities();
    for (int s = 0; s < kRandomSamples && est.certified; ++s) {
      std::vector<double> point(k + 1, 0.0);
      for (std::size_t e = 0; e < problem.options.size(); ++e) {
        const auto& list = problem.options[e];
        std::vector<double> q(list.size());
        double total = 0.0;
        for (double& v : q) total += (v = rng.uniform());
        for (std::size_t a = 0; a < list.size(); ++a) {
          for (std::size_t j = 0; j <= k; ++j) point[j] += probs[e] * (q[a] / total) * list[a][j];
        }
      }
      double gap = point[0] - optimum.optimum;
      for (std::size_t j = 0; j < k; ++j) gap += est.mu[j] * (point[j + 1] - problem.c[j]);
      if (gap < -options.tolerance) est.certified = false;
    }
  }
  return est;
}

}  // namespace dpp

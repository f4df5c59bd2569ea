#include "dpp/function.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "dpp/errors.hpp"

namespace dpp {
namespace {

void require_dim(std::span<const double> x, std::size_t dim, const char* what) {
  if (x.size() != dim) {
    throw ValidationError(std::string(what) + ": expected dimension " + std::to_string(dim) +
                          ", got " + std::to_string(x.size()));
  }
}

Interval coordinate_range(double q, double a, double lo, double hi) {
  const double at_lo = q * lo * lo + a * lo;
  const double at_hi = q * hi * hi + a * hi;
  Interval r{std::min(at_lo, at_hi), std::max(at_lo, at_hi)};
  if (q > 0.0) {
    const double vertex = -a / (2.0 * q);
    if (vertex > lo && vertex < hi) r.lo = std::min(r.lo, q * vertex * vertex + a * vertex);
  }
  return r;
}

}  // namespace

ConvexFunction::ConvexFunction(std::size_t dim, Evaluate evaluate, Subgradient subgradient)
    : dim_(dim), evaluate_(std::move(evaluate)), subgradient_(std::move(subgradient)) {
  if (!evaluate_ || !subgradient_) {
    throw ValidationError("ConvexFunction: evaluate and subgradient are both required");
  }
}

ConvexFunction ConvexFunction::from_form(QuadraticForm form) {
  if (form.q.size() != form.a.size()) {
    throw ValidationError("quadratic form: q and a differ in length");
  }
  for (double q : form.q) {
    if (!std::isfinite(q) || q < 0.0) {
      throw ValidationError("quadratic form: q must be finite and nonnegative for convexity");
    }
  }
  for (double a : form.a) {
    if (!std::isfinite(a)) throw ValidationError("quadratic form: non-finite coefficient");
  }
  if (!std::isfinite(form.b)) throw ValidationError("quadratic form: non-finite constant");

  auto shared = std::make_shared<const QuadraticForm>(form);
  const std::size_t dim = form.a.size();
  ConvexFunction f(
      dim,
      [shared](std::span<const double> x) {
        const auto& p = *shared;
        double sum = p.b;
        for (std::size_t i = 0; i < p.a.size(); ++i) sum += p.q[i] * x[i] * x[i] + p.a[i] * x[i];
        return sum;
      },
      [shared](std::span<const double> x, std::span<double> out) {
        const auto& p = *shared;
        for (std::size_t i = 0; i < p.a.size(); ++i) out[i] = 2.0 * p.q[i] * x[i] + p.a[i];
      });
  f.form_ = std::move(form);
  return f;
}

ConvexFunction ConvexFunction::affine(std::vector<double> a, double b) {
  std::vector<double> q(a.size(), 0.0);
  return from_form(QuadraticForm{std::move(q), std::move(a), b});
}

ConvexFunction ConvexFunction::diagonal_quadratic(std::vector<double> q, std::vector<double> a,
                                                  double b) {
  return from_form(QuadraticForm{std::move(q), std::move(a), b});
}

ConvexFunction ConvexFunction::zero(std::size_t dim) {
  return affine(std::vector<double>(dim, 0.0), 0.0);
}

double ConvexFunction::operator()(std::span<const double> x) const {
  require_dim(x, dim_, "ConvexFunction");
  return evaluate_(x);
}

void ConvexFunction::subgradient(std::span<const double> x, std::span<double> out) const {
  require_dim(x, dim_, "ConvexFunction::subgradient");
  require_dim(out, dim_, "ConvexFunction::subgradient output");
  subgradient_(x, out);
}

std::vector<double> ConvexFunction::subgradient(std::span<const double> x) const {
  std::vector<double> out(dim_);
  subgradient(x, out);
  return out;
}

bool ConvexFunction::is_affine() const {
  return form_ && std::all_of(form_->q.begin(), form_->q.end(), [](double q) { return q == 0.0; });
}

ConvexFunction& ConvexFunction::with_range(double lo, double hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ValidationError("declared range must satisfy lo <= hi with finite endpoints");
  }
  declared_range_ = Interval{lo, hi};
  return *this;
}

std::optional<Interval> ConvexFunction::range_over_box(std::span<const double> lower,
                                                       std::span<const double> upper) const {
  if (form_) {
    require_dim(lower, dim_, "range_over_box");
    require_dim(upper, dim_, "range_over_box");
    Interval total{form_->b, form_->b};
    for (std::size_t i = 0; i < dim_; ++i) {
      const Interval r = coordinate_range(form_->q[i], form_->a[i], lower[i], upper[i]);
      total.lo += r.lo;
      total.hi += r.hi;
    }
    return total;
  }
  return declared_range_;
}

ConvexFunction weighted_sum(std::span<const WeightedTerm> terms) {
  if (terms.empty()) throw ValidationError("weighted_sum: no terms");
  const std::size_t dim = terms.front().function->dimension();
  bool closed_form = true;
  for (const auto& term : terms) {
    if (term.function->dimension() != dim) {
      throw ValidationError("weighted_sum: dimension mismatch between terms");
    }
    if (!std::isfinite(term.weight)) throw ValidationError("weighted_sum: non-finite weight");
    if (term.weight < 0.0 && !term.function->is_affine()) {
      throw ValidationError("weighted_sum: negative weight on a non-affine function breaks convexity");
    }
    closed_form = closed_form && term.function->form().has_value();
  }

  if (closed_form) {
    QuadraticForm sum{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), 0.0};
    for (const auto& term : terms) {
      const auto& p = *term.function->form();
      for (std::size_t i = 0; i < dim; ++i) {
        // Zero weights stay exactly zero so 0 * q never produces -0 noise.
        if (p.q[i] != 0.0) sum.q[i] += term.weight * p.q[i];
        sum.a[i] += term.weight * p.a[i];
      }
      sum.b += term.weight * p.b;
    }
    for (double& q : sum.q) q = std::max(q, 0.0);
    return ConvexFunction::diagonal_quadratic(std::move(sum.q), std::move(sum.a), sum.b);
  }

  std::vector<std::pair<double, ConvexFunction>> parts;
  parts.reserve(terms.size());
  for (const auto& term : terms) parts.emplace_back(term.weight, *term.function);
  auto shared = std::make_shared<const std::vector<std::pair<double, ConvexFunction>>>(std::move(parts));
  return ConvexFunction(
      dim,
      [shared](std::span<const double> x) {
        double sum = 0.0;
        for (const auto& [w, f] : *shared) sum += w * f(x);
        return sum;
      },
      [shared, dim](std::span<const double> x, std::span<double> out) {
        std::vector<double> scratch(dim);
        std::fill(out.begin(), out.end(), 0.0);
        for (const auto& [w, f] : *shared) {
          f.subgradient(x, scratch);
          for (std::size_t i = 0; i < dim; ++i) out[i] += w * scratch[i];
        }
      });
}

ConvexFunction add_linear(const ConvexFunction& f, std::span<const double> coef) {
  require_dim(coef, f.dimension(), "add_linear");
  if (f.form()) {
    QuadraticForm p = *f.form();
    for (std::size_t i = 0; i < coef.size(); ++i) p.a[i] += coef[i];
    return ConvexFunction::diagonal_quadratic(std::move(p.q), std::move(p.a), p.b);
  }
  std::vector<double> c(coef.begin(), coef.end());
  return ConvexFunction(
      f.dimension(),
      [f, c](std::span<const double> x) {
        double sum = f(x);
        for (std::size_t i = 0; i < c.size(); ++i) sum += c[i] * x[i];
        return sum;
      },
      [f, c](std::span<const double> x, std::span<double> out) {
        f.subgradient(x, out);
        for (std::size_t i = 0; i < c.size(); ++i) out[i] += c[i];
      });
}

ConvexFunction embed(const ConvexFunction& f, std::size_t dim, std::vector<std::size_t> indices) {
  if (indices.size() != f.dimension()) {
    throw ValidationError("embed: need one index per argument of the embedded function");
  }
  for (std::size_t idx : indices) {
    if (idx >= dim) throw ValidationError("embed: index out of range");
  }
  if (f.form()) {
    const auto& p = *f.form();
    QuadraticForm out{std::vector<double>(dim, 0.0), std::vector<double>(dim, 0.0), p.b};
    for (std::size_t i = 0; i < indices.size(); ++i) {
      out.q[indices[i]] += p.q[i];
      out.a[indices[i]] += p.a[i];
    }
    return ConvexFunction::diagonal_quadratic(std::move(out.q), std::move(out.a), out.b);
  }
  auto idx = std::make_shared<const std::vector<std::size_t>>(std::move(indices));
  ConvexFunction g(
      dim,
      [f, idx](std::span<const double> x) {
        std::vector<double> sub(idx->size());
        for (std::size_t i = 0; i < idx->size(); ++i) sub[i] = x[(*idx)[i]];
        return f(sub);
      },
      [f, idx](std::span<const double> x, std::span<double> out) {
        std::vector<double> sub(idx->size()), grad(idx->size());
        for (std::size_t i = 0; i < idx->size(); ++i) sub[i] = x[(*idx)[i]];
        f.subgradient(sub, grad);
        std::fill(out.begin(), out.end(), 0.0);
        for (std::size_t i = 0; i < idx->size(); ++i) out[(*idx)[i]] += grad[i];
      });
  if (f.declared_range()) g.with_range(f.declared_range()->lo, f.declared_range()->hi);
  return g;
}

FeasibleSet FeasibleSet::box(std::vector<double> lower, std::vector<double> upper) {
  if (lower.size() != upper.size()) throw ValidationError("box: lower and upper differ in length");
  double diameter_sq = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i])) {
      throw ValidationError("box: bounds must be finite");
    }
    if (!(lower[i] < upper[i])) {
      throw ValidationError("box: lower[" + std::to_string(i) + "] must be < upper[" +
                            std::to_string(i) + "]");
    }
    diameter_sq += (upper[i] - lower[i]) * (upper[i] - lower[i]);
  }
  FeasibleSet set;
  set.dim_ = lower.size();
  set.lower_ = std::move(lower);
  set.upper_ = std::move(upper);
  set.diameter_ = std::sqrt(diameter_sq);
  return set;
}

FeasibleSet FeasibleSet::projectable(std::size_t dim, Projection projection, double diameter) {
  if (!projection) throw ValidationError("projectable set: projection operator required");
  if (!(diameter > 0.0) || !std::isfinite(diameter)) {
    throw ValidationError("projectable set: diameter must be positive and finite");
  }
  FeasibleSet set;
  set.dim_ = dim;
  set.projection_ = std::move(projection);
  set.diameter_ = diameter;
  return set;
}

FeasibleSet FeasibleSet::product(const FeasibleSet& first, const FeasibleSet& second) {
  if (!first.is_box() || !second.is_box()) {
    throw ValidationError("FeasibleSet::product: only boxes can be combined");
  }
  std::vector<double> lower = first.lower_, upper = first.upper_;
  lower.insert(lower.end(), second.lower_.begin(), second.lower_.end());
  upper.insert(upper.end(), second.upper_.begin(), second.upper_.end());
  return box(std::move(lower), std::move(upper));
}

void FeasibleSet::project(std::span<double> x) const {
  require_dim(x, dim_, "FeasibleSet::project");
  if (projection_) {
    projection_(x);
    return;
  }
  for (std::size_t i = 0; i < dim_; ++i) x[i] = std::clamp(x[i], lower_[i], upper_[i]);
}

std::vector<double> FeasibleSet::start_point() const {
  std::vector<double> x(dim_, 0.0);
  if (projection_) {
    projection_(x);
    return x;
  }
  for (std::size_t i = 0; i < dim_; ++i) x[i] = 0.5 * (lower_[i] + upper_[i]);
  return x;
}

bool FeasibleSet::contains(std::span<const double> x, double tol) const {
  if (x.size() != dim_) return false;
  if (projection_) {
    std::vector<double> p(x.begin(), x.end());
    projection_(p);
    double dist = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) dist = std::max(dist, std::abs(p[i] - x[i]));
    return dist <= tol;
  }
  for (std::size_t i = 0; i < dim_; ++i) {
    if (x[i] < lower_[i] - tol || x[i] > upper_[i] + tol) return false;
  }
  return true;
}

}  // namespace dpp

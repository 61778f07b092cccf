#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ot1d/numeric.hpp"

namespace ot1d {

/// Finitely supported probability measure on the real line. Atoms are kept
/// strictly increasing; nearly coincident atoms are merged at construction
/// and weights are renormalized to sum to one.
///
/// The CDF convention is left-continuous, F(x) = mass strictly below x, and
/// the quantile function is its left-continuous generalized inverse
/// F^{-1}(p) = inf{x : F(x) >= p}.
class DiscreteMeasure {
public:
  DiscreteMeasure(std::vector<double> atoms, std::vector<double> weights) {
    if (atoms.size() != weights.size()) {
      throw std::invalid_argument("DiscreteMeasure: atoms/weights length mismatch");
    }
    if (atoms.empty()) {
      throw std::invalid_argument("DiscreteMeasure: empty support");
    }
    std::vector<std::pair<double, double>> pairs;
    pairs.reserve(atoms.size());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      if (!std::isfinite(atoms[i]) || !std::isfinite(weights[i])) {
        throw std::invalid_argument("DiscreteMeasure: non-finite atom or weight");
      }
      if (weights[i] < 0.0) {
        throw std::invalid_argument("DiscreteMeasure: negative weight");
      }
      if (weights[i] > 0.0) pairs.emplace_back(atoms[i], weights[i]);
    }
    if (pairs.empty()) {
      throw std::invalid_argument("DiscreteMeasure: all weights are zero");
    }
    std::sort(pairs.begin(), pairs.end());

    // Merge atoms closer than 1e-12 * max(1, |atom|); the merged atom is the
    // mass-weighted mean of the group.
    atoms_.reserve(pairs.size());
    weights_.reserve(pairs.size());
    for (const auto& [a, w] : pairs) {
      if (!atoms_.empty() &&
          a - atoms_.back() <=
              1e-12 * std::max({1.0, std::abs(a), std::abs(atoms_.back())})) {
        const double wtot = weights_.back() + w;
        atoms_.back() = (atoms_.back() * weights_.back() + a * w) / wtot;
        weights_.back() = wtot;
      } else {
        atoms_.push_back(a);
        weights_.push_back(w);
      }
    }

    StableSum total;
    for (double w : weights_) total.add(w);
    const double s = total.value();
    if (std::abs(s - 1.0) >= 1e-9) {
      throw std::invalid_argument("DiscreteMeasure: weights sum to " +
                                  std::to_string(s) + ", expected 1");
    }
    for (double& w : weights_) w /= s;

    cum_.resize(weights_.size());
    StableSum run;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
      run.add(weights_[i]);
      cum_[i] = std::min(run.value(), 1.0);
    }
    cum_.back() = 1.0;
  }

  static DiscreteMeasure dirac(double x) { return DiscreteMeasure({x}, {1.0}); }

  /// Equal-weight empirical measure of a sample; duplicates merge.
  static DiscreteMeasure from_samples(std::span<const double> xs) {
    if (xs.empty()) {
      throw std::invalid_argument("from_samples: empty sample");
    }
    const double w = 1.0 / static_cast<double>(xs.size());
    std::vector<double> atoms(xs.begin(), xs.end());
    return DiscreteMeasure(std::move(atoms), std::vector<double>(xs.size(), w));
  }

  const std::vector<double>& atoms() const { return atoms_; }

  double atom(std::size_t i) const { return atoms_.at(i); }
  double weight(std::size_t i) const { return weights_.at(i); }
  const std::vector<double>& weights() const { return weights_; }

  /// Cumulative weights c_i = w_1 + ... + w_i; the last entry is exactly 1.
  const std::vector<double>& cum_weights() const { return cum_; }

  std::size_t size() const { return atoms_.size(); }

  /// F(x) = mass strictly below x (left-continuous CDF).
  double cdf(double x) const {
    const auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x);
    const std::size_t idx = static_cast<std::size_t>(it - atoms_.begin());
    return idx == 0 ? 0.0 : cum_[idx - 1];
  }

  /// F(x+) = mass at or below x (right limit of the CDF).
  double cdf_plus(double x) const {
    const auto it = std::upper_bound(atoms_.begin(), atoms_.end(), x);
    const std::size_t idx = static_cast<std::size_t>(it - atoms_.begin());
    return idx == 0 ? 0.0 : cum_[idx - 1];
  }

  /// F^{-1}(p) = inf{x : F(x) >= p}; piecewise constant, left-continuous,
  /// jumping exactly at the cumulative weight levels.
  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("quantile: p must lie in (0,1)");
    }
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), p);
    return atoms_[static_cast<std::size_t>(it - cum_.begin())];
  }

  DiscreteMeasure translated(double t) const {
    std::vector<double> a(atoms_);
    for (double& x : a) x += t;
    return DiscreteMeasure(std::move(a), weights_);
  }

  bool approx_equal(const DiscreteMeasure& other, double tol = 1e-12) const {
    if (size() != other.size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (std::abs(atoms_[i] - other.atoms_[i]) > tol) return false;
      if (std::abs(weights_[i] - other.weights_[i]) > tol) return false;
    }
    return true;
  }

private:
  std::vector<double> atoms_;
  std::vector<double> weights_;
  std::vector<double> cum_;
};

/// Raw sample container; sorts on construction and normalizes to an
/// equal-weight DiscreteMeasure on demand.
class EmpiricalMeasure {
public:
  explicit EmpiricalMeasure(std::vector<double> samples)
      : samples_(std::move(samples)) {
    if (samples_.empty()) {
      throw std::invalid_argument("EmpiricalMeasure: empty sample");
    }
    std::sort(samples_.begin(), samples_.end());
  }

  const std::vector<double>& samples() const { return samples_; }

  DiscreteMeasure measure() const {
    return DiscreteMeasure::from_samples(samples_);
  }

private:
  std::vector<double> samples_;
};

/// Left-continuous nondecreasing function on (0,1): the quantile view of a
/// measure. Either wraps a DiscreteMeasure (exact breakpoints, exact
/// transport) or an analytic inverse CDF (evaluated by quadrature).
class QuantileCurve {
public:
  QuantileCurve(DiscreteMeasure m)
      : discrete_(std::make_shared<DiscreteMeasure>(std::move(m))),
        label_("discrete") {
    const auto& cum = discrete_->cum_weights();
    breakpoints_.assign(cum.begin(), cum.end() - 1);
  }

  static QuantileCurve analytic(std::function<double(double)> eval,
                                std::string label,
                                std::vector<double> breakpoints = {}) {
    QuantileCurve c;
    c.eval_ = std::move(eval);
    c.label_ = std::move(label);
    c.breakpoints_ = std::move(breakpoints);
    return c;
  }

  static QuantileCurve uniform(double a, double b) {
    if (!(b > a)) throw std::invalid_argument("uniform: requires b > a");
    return analytic([a, b](double p) { return a + (b - a) * p; },
                    "uniform(" + std::to_string(a) + "," + std::to_string(b) + ")");
  }

  static QuantileCurve gaussian(double mean, double std_dev) {
    if (!(std_dev > 0.0)) throw std::invalid_argument("gaussian: requires std > 0");
    return analytic(
        [mean, std_dev](double p) { return mean + std_dev * normal_quantile(p); },
        "gaussian(" + std::to_string(mean) + "," + std::to_string(std_dev) + ")");
  }

  static QuantileCurve exponential(double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("exponential: requires rate > 0");
    return analytic([rate](double p) { return -std::log1p(-p) / rate; },
                    "exponential(" + std::to_string(rate) + ")");
  }

  double operator()(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
      throw std::domain_error("QuantileCurve: p must lie in (0,1)");
    }
    if (discrete_) return discrete_->quantile(p);
    return eval_(p);
  }

  /// Non-null iff the curve is the quantile function of a discrete measure.
  const DiscreteMeasure* as_discrete() const { return discrete_.get(); }

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::string& label() const { return label_; }

  QuantileCurve translated(double t) const {
    if (discrete_) return QuantileCurve(discrete_->translated(t));
    auto base = eval_;
    return analytic([base, t](double p) { return base(p) + t; },
                    label_ + "+shift", breakpoints_);
  }

private:
  QuantileCurve() = default;

  std::shared_ptr<const DiscreteMeasure> discrete_;
  std::function<double(double)> eval_;
  std::vector<double> breakpoints_;
  std::string label_;
};

namespace detail {

// One side of the Levy sandwich F_mu(x-eps)-eps <= F_nu(x) <= F_mu(x+eps)+eps,
// checked at every merged jump point and on every open interval between them
// (via right limits). Both CDFs are step functions, so this is exhaustive.
inline bool levy_upper_ok(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          double eps) {
  // F_nu(x) <= F_mu(x+eps) + eps for all x.
  for (double b : nu.atoms()) {
    if (nu.cdf(b) > mu.cdf(b + eps) + eps) return false;
    if (nu.cdf_plus(b) > mu.cdf_plus(b + eps) + eps) return false;
  }
  for (double a : mu.atoms()) {
    const double x = a - eps;
    if (nu.cdf(x) > mu.cdf(a) + eps) return false;
    if (nu.cdf_plus(x) > mu.cdf_plus(a) + eps) return false;
  }
  return true;
}

inline bool levy_lower_ok(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          double eps) {
  // F_mu(x-eps) - eps <= F_nu(x) for all x.
  for (double b : nu.atoms()) {
    if (mu.cdf(b - eps) - eps > nu.cdf(b)) return false;
    if (mu.cdf_plus(b - eps) - eps > nu.cdf_plus(b)) return false;
  }
  for (double a : mu.atoms()) {
    const double x = a + eps;
    if (mu.cdf(a) - eps > nu.cdf(x)) return false;
    if (mu.cdf_plus(a) - eps > nu.cdf_plus(x)) return false;
  }
  return true;
}

inline bool levy_feasible(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                          double eps) {
  return levy_upper_ok(mu, nu, eps) && levy_lower_ok(mu, nu, eps);
}

} // namespace detail

/// Levy distance between two discrete measures:
///   inf{eps > 0 : F_mu(x-eps)-eps <= F_nu(x) <= F_mu(x+eps)+eps for all x}.
/// Computed exactly for step CDFs by bisection on eps; it metrizes weak
/// convergence and never exceeds 1.
inline double levy_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (detail::levy_feasible(mu, nu, 0.0)) return 0.0;
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (detail::levy_feasible(mu, nu, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

} // namespace ot1d

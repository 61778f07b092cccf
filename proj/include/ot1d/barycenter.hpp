#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ot1d/cost.hpp"
#include "ot1d/errors.hpp"
#include "ot1d/isotonic.hpp"
#include "ot1d/measure.hpp"
#include "ot1d/minimize.hpp"
#include "ot1d/numeric.hpp"
#include "ot1d/rng.hpp"
#include "ot1d/transport.hpp"

namespace ot1d {

/// Finite family of measures with normalized positive weights.
class WeightedFamily {
public:
  WeightedFamily(std::vector<DiscreteMeasure> measures, std::vector<double> weights)
      : measures_(std::move(measures)), weights_(std::move(weights)) {
    if (measures_.empty()) throw std::invalid_argument("WeightedFamily: empty family");
    if (measures_.size() != weights_.size()) {
      throw std::invalid_argument("WeightedFamily: measures/weights length mismatch");
    }
    StableSum sum;
    for (double w : weights_) {
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw std::invalid_argument("WeightedFamily: weights must be positive");
      }
      sum.add(w);
    }
    if (std::abs(sum.value() - 1.0) >= 1e-9) {
      throw std::invalid_argument("WeightedFamily: weights must sum to 1 (got " +
                                  format_double(sum.value()) + ")");
    }
    for (double& w : weights_) w /= sum.value();
  }

  const std::vector<DiscreteMeasure>& measures() const { return measures_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t size() const { return measures_.size(); }

private:
  std::vector<DiscreteMeasure> measures_;
  std::vector<double> weights_;
};

struct ScalarFrechetResult {
  double minimizer = 0.0;
  double objective = 0.0;
  int iterations = 0;
};

/// Leftmost minimizer of f(y) = sum_i w_i g(a_i - y). Strict convexity of g
/// pins the minimizer inside [min a, max a], so the search brackets there
/// directly. The quadratic cost short-circuits to the weighted mean. Costs
/// exposing a derivative are solved by bisecting the strictly decreasing
/// function h(y) = sum_i w_i g'(a_i - y) to its sign change, which locates
/// the minimizer to near machine precision; golden section alone cannot do
/// better than ~sqrt(eps) because f is numerically flat around its minimum.
inline ScalarFrechetResult scalar_frechet_mean(const CostFunction& g, std::span<const double> points,
                                               std::span<const double> weights) {
  if (points.empty()) throw std::invalid_argument("scalar_frechet_mean: no points");
  if (points.size() != weights.size()) {
    throw std::invalid_argument("scalar_frechet_mean: points/weights length mismatch");
  }
  double lo = points[0];
  double hi = points[0];
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]) || !std::isfinite(weights[i]) || !(weights[i] > 0.0)) {
      throw std::invalid_argument("scalar_frechet_mean: non-finite point or nonpositive weight");
    }
    lo = std::min(lo, points[i]);
    hi = std::max(hi, points[i]);
  }

  const auto objective = [&](double y) {
    StableSum s;
    for (std::size_t i = 0; i < points.size(); ++i) s.add(weights[i] * g(points[i] - y));
    return s.value();
  };

  if (g.kind() == CostFunction::Kind::Quadratic) {
    StableSum wsum;
    StableSum wx;
    for (std::size_t i = 0; i < points.size(); ++i) {
      wsum.add(weights[i]);
      wx.add(weights[i] * points[i]);
    }
    const double mean = wx.value() / wsum.value();
    return {mean, objective(mean), 0};
  }
  if (lo == hi) return {lo, objective(lo), 0};

  if (g.has_derivative()) {
    const auto slope = [&](double y) {
      StableSum s;
      for (std::size_t i = 0; i < points.size(); ++i) s.add(weights[i] * g.derivative(points[i] - y));
      return s.value();
    };
    // h(lo) >= 0 >= h(hi) by construction; keep lo on the h >= 0 side so
    // the returned point is never right of the true minimizer.
    const double width_tol = 1e-13 * std::max({1.0, std::abs(lo), std::abs(hi)});
    int iterations = 0;
    while (hi - lo > width_tol && iterations < 200) {
      const double mid = 0.5 * (lo + hi);
      if (!(mid > lo && mid < hi)) break;
      ++iterations;
      if (slope(mid) >= 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return {lo, objective(lo), iterations};
  }

  const MinimizeResult m = golden_section_min(objective, lo, hi, 1e-12);
  return {m.xmin, m.fmin, m.iterations};
}

/// The barycenter's quantile function as a step function on the merged
/// cumulative-weight partition of (0,1): cuts[k] < cuts[k+1] delimit the
/// k-th interval and psi[k] is the barycenter's quantile value there.
struct BarycenterCurve {
  std::vector<double> cuts;
  std::vector<double> psi;
};

/// Quantile-wise barycenter computation: every quantile function in the
/// family is constant inside each interval of the merged partition, so the
/// barycenter's quantile value there is a scalar Fréchet mean of the
/// family's values. The resulting step function is provably nondecreasing;
/// the postcondition is re-verified, absorbing solver noise up to 1e-8 and
/// treating anything larger as a bug.
inline BarycenterCurve barycenter_curve(const CostFunction& g, const WeightedFamily& fam) {
  std::vector<double> merged;
  merged.push_back(0.0);
  for (const auto& mu : fam.measures()) {
    merged.insert(merged.end(), mu.cum_weights().begin(), mu.cum_weights().end());
  }
  std::sort(merged.begin(), merged.end());
  merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
  merged.back() = 1.0;

  BarycenterCurve curve;
  curve.cuts.reserve(merged.size());
  curve.psi.reserve(merged.size());
  curve.cuts.push_back(0.0);
  std::vector<double> values(fam.size());
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < merged.size(); ++k) {
    if (merged[k + 1] - curve.cuts.back() <= 1e-15) continue;
    const double p = 0.5 * (curve.cuts.back() + merged[k + 1]);
    for (std::size_t i = 0; i < fam.size(); ++i) values[i] = fam.measures()[i].quantile(p);
    double psi = scalar_frechet_mean(g, values, fam.weights()).minimizer;
    if (psi < prev) {
      if (prev - psi > 1e-8 * std::max(1.0, std::abs(prev))) {
        throw MonotonicityError("barycenter quantile dropped by " + format_double(prev - psi) +
                                " at level " + format_double(p));
      }
      psi = prev;
    }
    prev = psi;
    curve.cuts.push_back(merged[k + 1]);
    curve.psi.push_back(psi);
  }
  // A trailing sliver below the width threshold would otherwise be dropped;
  // absorb it into the last interval so the partition covers all of (0,1).
  if (!curve.psi.empty()) curve.cuts.back() = 1.0;
  return curve;
}

/// Weighted Fréchet barycenter of a finite family: the measure whose
/// quantile function is barycenter_curve's step function.
inline DiscreteMeasure finite_barycenter(const CostFunction& g, const WeightedFamily& fam) {
  const BarycenterCurve curve = barycenter_curve(g, fam);
  std::vector<double> masses(curve.psi.size());
  for (std::size_t k = 0; k < masses.size(); ++k) masses[k] = curve.cuts[k + 1] - curve.cuts[k];
  return DiscreteMeasure(curve.psi, masses);
}

/// The functional the barycenter minimizes: sum_i w_i J(mu_i, nu).
inline double barycenter_objective(const CostFunction& g, const WeightedFamily& fam,
                                   const DiscreteMeasure& nu) {
  StableSum s;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    s.add(fam.weights()[i] * transport_cost(fam.measures()[i], nu, g));
  }
  return s.value();
}

/// A law over measures: either an explicit finite mixture (exact reduction
/// to the finite barycenter) or a seeded sampler.
class MeasureDistribution {
public:
  using Draw = std::function<DiscreteMeasure(RngStream&)>;

  static MeasureDistribution mixture(WeightedFamily components) {
    MeasureDistribution d;
    d.components_.emplace_back(std::move(components));
    d.description_ = "mixture";
    return d;
  }

  static MeasureDistribution sampler(std::string description, Draw draw) {
    if (!draw) throw std::invalid_argument("MeasureDistribution: null sampler");
    MeasureDistribution d;
    d.draw_ = std::move(draw);
    d.description_ = std::move(description);
    return d;
  }

  bool is_mixture() const { return !components_.empty(); }

  const WeightedFamily& components() const {
    if (!is_mixture()) throw std::logic_error("MeasureDistribution: not a mixture");
    return components_.front();
  }

  DiscreteMeasure draw(RngStream& rng) const {
    if (is_mixture()) throw std::logic_error("MeasureDistribution: mixture has no sampler");
    return draw_(rng);
  }

  const std::string& description() const { return description_; }

private:
  MeasureDistribution() = default;

  std::vector<WeightedFamily> components_; // empty or one element
  Draw draw_;
  std::string description_;
};

/// 199 equispaced levels k/200; the endpoints are excluded because quantile
/// functions may diverge there.
inline std::vector<double> default_quantile_grid() {
  std::vector<double> grid(199);
  for (std::size_t k = 0; k < grid.size(); ++k) grid[k] = static_cast<double>(k + 1) / 200.0;
  return grid;
}

struct PopulationBarycenterResult {
  DiscreteMeasure measure;
  std::vector<double> grid;
  std::vector<double> psi;        // monotonicity-corrected estimates
  std::vector<double> psi_raw;    // per-point Monte Carlo estimates
  std::vector<double> std_errors; // bootstrap standard errors (50 resamples)
  double max_violation = 0.0;     // worst monotonicity drop before correction
  std::string provenance;         // "mixture-exact" or "monte-carlo"
};

/// Barycenter of a law over measures. The mixture path is exact (the
/// expectation over the law is a finite weighted sum, so the finite
/// barycenter applies verbatim; `quantile_grid` and the Monte Carlo knobs
/// are ignored). The sampler path is a labeled approximation: it draws
/// `mc_samples` measures once, shares them across the whole grid, estimates
/// psi pointwise, and repairs small monotonicity violations by isotonic
/// regression. A violation above 10x the local bootstrap standard error
/// cannot be explained by Monte Carlo noise and raises MonotonicityError.
///
/// Stream layout: draw k comes from the substream (epoch, tag, seed, k);
/// the bootstrap at grid point i from (epoch, tag', seed, i). Results are
/// therefore independent of evaluation order.
inline PopulationBarycenterResult population_barycenter(const CostFunction& g,
                                                        const MeasureDistribution& dist,
                                                        std::vector<double> quantile_grid,
                                                        std::size_t mc_samples, std::uint64_t seed) {
  if (dist.is_mixture()) {
    PopulationBarycenterResult r{finite_barycenter(g, dist.components()), {}, {}, {}, {}, 0.0,
                                 "mixture-exact"};
    return r;
  }
  if (quantile_grid.empty()) {
    throw std::invalid_argument("population_barycenter: empty quantile grid");
  }
  for (std::size_t i = 0; i < quantile_grid.size(); ++i) {
    const double p = quantile_grid[i];
    if (!(p > 0.0 && p < 1.0) || (i > 0 && p <= quantile_grid[i - 1])) {
      throw std::invalid_argument("population_barycenter: grid must be strictly increasing in (0,1)");
    }
  }
  if (mc_samples < 2) throw std::invalid_argument("population_barycenter: mc_samples must be >= 2");

  std::vector<DiscreteMeasure> draws;
  draws.reserve(mc_samples);
  for (std::size_t k = 0; k < mc_samples; ++k) {
    RngStream stream(stream_key({detail::kStreamEpoch, hash_label("population-draw"), seed, k}));
    draws.push_back(dist.draw(stream));
  }

  const std::size_t npts = quantile_grid.size();
  std::vector<double> psi_raw(npts);
  std::vector<double> se(npts);
  const std::vector<double> unit_weights(mc_samples, 1.0);
  std::vector<double> column(mc_samples);
  std::vector<double> resample(mc_samples);
  constexpr int kResamples = 50;
  std::vector<double> boot_estimates(kResamples);
  for (std::size_t i = 0; i < npts; ++i) {
    for (std::size_t k = 0; k < mc_samples; ++k) column[k] = draws[k].quantile(quantile_grid[i]);
    psi_raw[i] = scalar_frechet_mean(g, column, unit_weights).minimizer;

    RngStream boot(stream_key({detail::kStreamEpoch, hash_label("population-bootstrap"), seed, i}));
    for (int r = 0; r < kResamples; ++r) {
      for (std::size_t k = 0; k < mc_samples; ++k) {
        resample[k] = column[boot.next_below(mc_samples)];
      }
      boot_estimates[r] = scalar_frechet_mean(g, resample, unit_weights).minimizer;
    }
    StableSum mean_sum;
    for (double b : boot_estimates) mean_sum.add(b);
    const double mean = mean_sum.value() / kResamples;
    StableSum var_sum;
    for (double b : boot_estimates) var_sum.add((b - mean) * (b - mean));
    se[i] = std::sqrt(var_sum.value() / (kResamples - 1));
  }

  double max_violation = 0.0;
  for (std::size_t i = 0; i + 1 < npts; ++i) {
    const double drop = psi_raw[i] - psi_raw[i + 1];
    if (drop <= 0.0) continue;
    max_violation = std::max(max_violation, drop);
    const double allowance = 10.0 * std::max({se[i], se[i + 1], 1e-12});
    if (drop > allowance) {
      throw MonotonicityError("population barycenter estimate dropped by " + format_double(drop) +
                              " between grid levels " + format_double(quantile_grid[i]) + " and " +
                              format_double(quantile_grid[i + 1]) +
                              ", far beyond Monte Carlo noise (allowance " +
                              format_double(allowance) + ")");
    }
  }
  std::vector<double> psi = isotonic_regression(psi_raw);

  // Step measure through the (grid, psi) pairs: each grid point carries the
  // probability mass of the cell around it, split at grid midpoints.
  std::vector<double> masses(npts);
  for (std::size_t i = 0; i < npts; ++i) {
    const double left = i == 0 ? 0.0 : 0.5 * (quantile_grid[i - 1] + quantile_grid[i]);
    const double right = i + 1 == npts ? 1.0 : 0.5 * (quantile_grid[i] + quantile_grid[i + 1]);
    masses[i] = right - left;
  }
  DiscreteMeasure measure(psi, masses);
  return {std::move(measure), std::move(quantile_grid), std::move(psi), std::move(psi_raw),
          std::move(se),      max_violation,            "monte-carlo"};
}

} // namespace ot1d

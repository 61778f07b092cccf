#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "ot1d/cost.hpp"
#include "ot1d/errors.hpp"
#include "ot1d/measure.hpp"
#include "ot1d/numeric.hpp"

namespace ot1d {

/// One cell of a coupling between two discrete measures: moves `mass` from
/// source atom `i` to target atom `j`.
struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  double mass = 0.0;
};

class TransportPlan {
public:
  TransportPlan(DiscreteMeasure source, DiscreteMeasure target, std::vector<PlanEntry> entries)
      : source_(std::move(source)), target_(std::move(target)), entries_(std::move(entries)) {}

  const DiscreteMeasure& source() const { return source_; }
  const DiscreteMeasure& target() const { return target_; }
  const std::vector<PlanEntry>& entries() const { return entries_; }

  double total_mass() const {
    StableSum s;
    for (const auto& e : entries_) s.add(e.mass);
    return s.value();
  }

  /// Row sums, indexed like source().atoms().
  std::vector<double> source_marginal() const {
    std::vector<double> m(source_.size(), 0.0);
    for (const auto& e : entries_) m[e.i] += e.mass;
    return m;
  }

  /// Column sums, indexed like target().atoms().
  std::vector<double> target_marginal() const {
    std::vector<double> m(target_.size(), 0.0);
    for (const auto& e : entries_) m[e.j] += e.mass;
    return m;
  }

  double cost(const CostFunction& g) const {
    StableSum s;
    for (const auto& e : entries_) s.add(e.mass * g(source_.atom(e.i) - target_.atom(e.j)));
    return s.value();
  }

  /// A coupling is monotone when its support never contains a crossing pair
  /// (x, y'), (x', y) with x < x' and y > y'. With atoms sorted this reduces
  /// to the entry list being staircase-ordered in both indices.
  bool is_monotone() const {
    for (std::size_t k = 0; k + 1 < entries_.size(); ++k) {
      const auto& a = entries_[k];
      const auto& b = entries_[k + 1];
      if (b.i < a.i || (b.i == a.i && b.j < a.j)) return false;
      if (b.i > a.i && b.j < a.j) return false;
    }
    // Entries may arrive unsorted (e.g. from an external solver); fall back
    // to a pairwise scan when the cheap pass above is inconclusive.
    for (std::size_t k = 0; k < entries_.size(); ++k) {
      for (std::size_t l = k + 1; l < entries_.size(); ++l) {
        const auto& a = entries_[k];
        const auto& b = entries_[l];
        const bool crossed = (a.i < b.i && a.j > b.j) || (b.i < a.i && b.j > a.j);
        if (crossed) return false;
      }
    }
    return true;
  }

private:
  DiscreteMeasure source_;
  DiscreteMeasure target_;
  std::vector<PlanEntry> entries_;
};

/// Builds the monotone (quantile) coupling of two discrete measures by a
/// two-pointer sweep that pairs mass in increasing order on both sides.
/// Slivers of mass at or below 1e-15 are dropped to keep the support clean
/// of pure rounding artifacts.
inline TransportPlan monotone_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<PlanEntry> entries;
  entries.reserve(mu.size() + nu.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double remaining_i = mu.weights()[0];
  double remaining_j = nu.weights()[0];
  while (i < mu.size() && j < nu.size()) {
    const double moved = std::min(remaining_i, remaining_j);
    if (moved > 1e-15) entries.push_back({i, j, moved});
    remaining_i -= moved;
    remaining_j -= moved;
    if (remaining_i <= remaining_j) {
      ++i;
      if (i < mu.size()) remaining_i = mu.weights()[i];
    }
    if (remaining_j <= 0.0) {
      ++j;
      if (j < nu.size()) remaining_j = nu.weights()[j];
    }
  }
  return TransportPlan(mu, nu, std::move(entries));
}

/// Deterministic (Monge) map underlying the monotone plan: atom i of the
/// source goes to image[i] in one piece. Exists iff no source atom has to be
/// split across two target atoms; otherwise throws NoMongeMapError.
inline std::vector<double> optimal_map(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const TransportPlan plan = monotone_plan(mu, nu);
  std::vector<double> image(mu.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> moved(mu.size(), 0.0);
  for (const auto& e : plan.entries()) {
    if (!std::isnan(image[e.i]) && image[e.i] != nu.atom(e.j)) {
      throw NoMongeMapError("source atom at x=" + format_double(mu.atom(e.i)) +
                            " must split between targets; no deterministic map exists");
    }
    image[e.i] = nu.atom(e.j);
    moved[e.i] += e.mass;
  }
  for (std::size_t k = 0; k < mu.size(); ++k) {
    // Mass dropped as slivers can leave a source atom formally unassigned;
    // route it like its neighbourhood to keep the map total and monotone.
    if (std::isnan(image[k])) {
      image[k] = nu.quantile(std::min(1.0 - 1e-16, std::max(1e-16, mu.cdf_plus(mu.atom(k)))));
    }
  }
  return image;
}

namespace detail {

/// Merge of the two cumulative-weight grids: cut points of (0, 1] such that
/// both quantile functions are constant inside every resulting interval.
inline std::vector<double> merged_cum_grid(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  std::vector<double> cuts;
  cuts.reserve(mu.size() + nu.size() + 1);
  cuts.push_back(0.0);
  const auto& a = mu.cum_weights();
  const auto& b = nu.cum_weights();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    double next;
    if (j >= b.size() || (i < a.size() && a[i] <= b[j])) {
      next = a[i];
      if (j < b.size() && b[j] == next) ++j;
      ++i;
    } else {
      next = b[j];
      ++j;
    }
    if (next > cuts.back()) cuts.push_back(next);
  }
  cuts.back() = 1.0;
  return cuts;
}

} // namespace detail

/// Exact transportation cost between discrete measures: the integral of
/// g(F_mu^{-1} - F_nu^{-1}) over (0,1), evaluated interval-by-interval on
/// the merged cumulative grid where both quantiles are constant. Intervals
/// of width <= 1e-15 are skipped.
inline double transport_cost(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                             const CostFunction& g) {
  const std::vector<double> cuts = detail::merged_cum_grid(mu, nu);
  StableSum total;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double width = cuts[k + 1] - cuts[k];
    if (width <= 1e-15) continue;
    const double p = 0.5 * (cuts[k] + cuts[k + 1]);
    total.add(width * g(mu.quantile(p) - nu.quantile(p)));
  }
  return total.value();
}

/// Transportation cost between arbitrary quantile curves. Discrete pairs are
/// routed to the exact interval formula; otherwise the quantile integral is
/// approximated by composite 32-point Gauss-Legendre quadrature on 256 equal
/// panels covering [1e-6, 1 - 1e-6]. A divergent integrand (infinite or NaN
/// term, as happens for tails too heavy for g) yields +infinity rather than
/// an exception, so callers can compare "infinite cost" states directly.
inline double transport_cost(const QuantileCurve& mu, const QuantileCurve& nu,
                             const CostFunction& g) {
  if (mu.as_discrete() && nu.as_discrete()) {
    return transport_cost(*mu.as_discrete(), *nu.as_discrete(), g);
  }
  const GaussLegendreRule& rule = gauss_legendre_32();
  constexpr int kPanels = 256;
  constexpr double kClip = 1e-6;
  const double lo = kClip;
  const double hi = 1.0 - kClip;
  StableSum total;
  for (int panel = 0; panel < kPanels; ++panel) {
    const double a = lo + (hi - lo) * panel / kPanels;
    const double b = lo + (hi - lo) * (panel + 1) / kPanels;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      const double p = mid + half * rule.nodes[k];
      const double term = g(mu(p) - nu(p));
      if (!std::isfinite(term)) return std::numeric_limits<double>::infinity();
      total.add(half * rule.weights[k] * term);
    }
  }
  if (!std::isfinite(total.value())) return std::numeric_limits<double>::infinity();
  return total.value();
}

} // namespace ot1d

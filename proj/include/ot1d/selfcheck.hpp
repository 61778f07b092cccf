#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "ot1d/barycenter.hpp"
#include "ot1d/cost.hpp"
#include "ot1d/lp_oracle.hpp"
#include "ot1d/measure.hpp"
#include "ot1d/rng.hpp"
#include "ot1d/transport.hpp"

namespace ot1d {

namespace detail {

inline DiscreteMeasure random_measure(RngStream& rng, std::size_t max_atoms) {
  const std::size_t n = 1 + rng.next_below(max_atoms);
  std::vector<double> atoms(n);
  std::vector<double> weights(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    atoms[i] = rng.next_uniform(-10.0, 10.0);
    weights[i] = -std::log(rng.next_double()); // Dirichlet(1,..,1) via exponentials
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

inline std::vector<CostFunction> builtin_costs() {
  return {CostFunction::quadratic(), CostFunction::power(1.5), CostFunction::power(3.0),
          CostFunction::skew_quadratic(4.0)};
}

} // namespace detail

/// Built-in invariant suite behind `ot1d check`: a quick, deterministic
/// cross-check of the core constructions against independent computations.
/// Prints one row per check and returns true iff everything passed.
inline bool run_self_check(std::ostream& out) {
  std::vector<std::pair<std::string, std::function<bool()>>> checks;

  checks.emplace_back("monotone plan cost matches LP oracle (20 pairs x 4 costs)", [] {
    RngStream rng(stream_key({hash_label("self-check"), 1}));
    const auto costs = detail::builtin_costs();
    for (int trial = 0; trial < 20; ++trial) {
      const DiscreteMeasure mu = detail::random_measure(rng, 8);
      const DiscreteMeasure nu = detail::random_measure(rng, 8);
      for (const auto& g : costs) {
        const double direct = transport_cost(mu, nu, g);
        const double lp = lp_optimal_plan(mu, nu, g).cost;
        if (std::abs(direct - lp) > 1e-9 * std::max(1.0, std::abs(lp))) return false;
      }
    }
    return true;
  });

  checks.emplace_back("growth constants for |x|^p hold on [-100,100]", [] {
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const GrowthConstants gc = growth_constants_for_power(p);
      const std::vector<double> grid = linspace(-100.0, 100.0, 100);
      if (!check_growth(CostFunction::power(p), gc.A, gc.B, grid).ok) return false;
    }
    return true;
  });

  checks.emplace_back("undersized growth constant is rejected with a witness pair", [] {
    const std::vector<double> grid = linspace(-100.0, 100.0, 100);
    const GrowthCheckReport r = check_growth(CostFunction::quadratic(), 0.0, 0.5, grid);
    return !r.ok && r.worst_violation > 0.0;
  });

  checks.emplace_back("strict convexity probe (10^4 triples per cost)", [] {
    RngStream rng(stream_key({hash_label("self-check"), 2}));
    for (const auto& g : detail::builtin_costs()) {
      for (int trial = 0; trial < 10000; ++trial) {
        const double x = rng.next_uniform(-20.0, 20.0);
        const double y = x + rng.next_uniform(1e-9, 40.0);
        const double delta = rng.next_double() * 0.5 * (y - x);
        const double lhs = g(x) + g(y);
        const double rhs = g(x + delta) + g(y - delta);
        if (!(lhs > rhs - 1e-12 * std::max(1.0, std::abs(lhs)))) return false;
      }
    }
    return true;
  });

  checks.emplace_back("quantile/CDF adjunction on random measures", [] {
    RngStream rng(stream_key({hash_label("self-check"), 3}));
    for (int trial = 0; trial < 1000; ++trial) {
      const DiscreteMeasure mu = detail::random_measure(rng, 6);
      const double p = rng.next_double();
      const double x = rng.next_uniform(-12.0, 12.0);
      const bool lhs = mu.quantile(p) <= x;
      const bool rhs = p <= mu.cdf_plus(x);
      if (lhs != rhs) return false;
    }
    return true;
  });

  checks.emplace_back("monotone plan marginals and mass", [] {
    RngStream rng(stream_key({hash_label("self-check"), 4}));
    for (int trial = 0; trial < 500; ++trial) {
      const DiscreteMeasure mu = detail::random_measure(rng, 7);
      const DiscreteMeasure nu = detail::random_measure(rng, 7);
      const TransportPlan plan = monotone_plan(mu, nu);
      if (std::abs(plan.total_mass() - 1.0) > 1e-12) return false;
      if (!plan.is_monotone()) return false;
      const auto sm = plan.source_marginal();
      const auto tm = plan.target_marginal();
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (std::abs(sm[i] - mu.weight(i)) > 1e-12) return false;
      }
      for (std::size_t j = 0; j < nu.size(); ++j) {
        if (std::abs(tm[j] - nu.weight(j)) > 1e-12) return false;
      }
    }
    return true;
  });

  checks.emplace_back("root of quadratic cost is a metric (triangle inequality)", [] {
    RngStream rng(stream_key({hash_label("self-check"), 5}));
    const CostFunction g = CostFunction::quadratic();
    for (int trial = 0; trial < 200; ++trial) {
      const DiscreteMeasure a = detail::random_measure(rng, 6);
      const DiscreteMeasure b = detail::random_measure(rng, 6);
      const DiscreteMeasure c = detail::random_measure(rng, 6);
      const double ab = std::sqrt(transport_cost(a, b, g));
      const double bc = std::sqrt(transport_cost(b, c, g));
      const double ac = std::sqrt(transport_cost(a, c, g));
      if (ac > ab + bc + 1e-9) return false;
    }
    return true;
  });

  checks.emplace_back("barycenter first-order condition (smooth costs)", [] {
    RngStream rng(stream_key({hash_label("self-check"), 6}));
    const std::vector<CostFunction> costs = {CostFunction::quadratic(), CostFunction::power(3.0),
                                             CostFunction::skew_quadratic(4.0)};
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t k = 2 + rng.next_below(3);
      std::vector<DiscreteMeasure> measures;
      std::vector<double> lambdas(k);
      double total = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        measures.push_back(detail::random_measure(rng, 5));
        lambdas[i] = -std::log(rng.next_double());
        total += lambdas[i];
      }
      for (double& l : lambdas) l /= total;
      const WeightedFamily fam(measures, lambdas);
      for (const auto& g : costs) {
        const BarycenterCurve curve = barycenter_curve(g, fam);
        for (std::size_t s = 0; s < curve.psi.size(); ++s) {
          const double p = 0.5 * (curve.cuts[s] + curve.cuts[s + 1]);
          StableSum residual;
          for (std::size_t i = 0; i < k; ++i) {
            residual.add(fam.weights()[i] * g.derivative(fam.measures()[i].quantile(p) - curve.psi[s]));
          }
          if (std::abs(residual.value()) > 1e-6) return false;
        }
      }
    }
    return true;
  });

  bool all_ok = true;
  for (const auto& [name, run] : checks) {
    const bool ok = run();
    all_ok = all_ok && ok;
    out << (ok ? "  ok   " : "  FAIL ") << name << '\n';
  }
  out << (all_ok ? "all checks passed\n" : "SELF-CHECK FAILED\n");
  return all_ok;
}

} // namespace ot1d

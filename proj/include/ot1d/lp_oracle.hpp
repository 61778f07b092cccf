#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "ot1d/cost.hpp"
#include "ot1d/errors.hpp"
#include "ot1d/measure.hpp"
#include "ot1d/transport.hpp"

namespace ot1d {

/// Outcome of solving the coupling problem as a linear program, with no
/// reference to the order structure of the line. Serves as an independent
/// check of the quantile construction.
struct LpResult {
  TransportPlan plan;
  double cost = 0.0;
  int iterations = 0;
};

namespace detail {

/// Solves the masses of a candidate basis (set of cells) by leaf peeling:
/// any row or column covered by exactly one undetermined cell fixes that
/// cell's mass. Returns false when the set is not a spanning tree of the
/// bipartite supply/demand graph or yields a negative mass.
inline bool peel_basis(std::size_t m, std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& cells,
                       const std::vector<double>& supply, const std::vector<double>& demand,
                       std::vector<double>& masses) {
  std::vector<double> rs = supply;
  std::vector<double> cs = demand;
  std::vector<int> row_count(m, 0);
  std::vector<int> col_count(n, 0);
  for (const auto& [i, j] : cells) {
    ++row_count[i];
    ++col_count[j];
  }
  for (std::size_t i = 0; i < m; ++i)
    if (row_count[i] == 0) return false;
  for (std::size_t j = 0; j < n; ++j)
    if (col_count[j] == 0) return false;

  masses.assign(cells.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t solved = 0;
  while (solved < cells.size()) {
    bool progressed = false;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (!std::isnan(masses[k])) continue;
      const auto [i, j] = cells[k];
      if (row_count[i] == 1) {
        masses[k] = rs[i];
      } else if (col_count[j] == 1) {
        masses[k] = cs[j];
      } else {
        continue;
      }
      if (masses[k] < -1e-12) return false;
      rs[i] -= masses[k];
      cs[j] -= masses[k];
      --row_count[i];
      --col_count[j];
      ++solved;
      progressed = true;
    }
    if (!progressed) return false; // cycle or disconnected: not a vertex
  }
  for (double& x : masses) x = std::max(x, 0.0);
  return true;
}

/// Brute-force LP solve by enumerating every vertex of the transportation
/// polytope (spanning trees with m+n-1 cells). Exact up to 4x4 problems.
inline LpResult lp_by_vertex_enumeration(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                         const CostFunction& g) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  const std::size_t cells_total = m * n;
  const std::size_t basis_size = m + n - 1;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<PlanEntry> best_entries;
  int vertices = 0;

  std::vector<std::pair<std::size_t, std::size_t>> cells;
  std::vector<double> masses;
  for (std::uint32_t mask = 0; mask < (1u << cells_total); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != basis_size) continue;
    cells.clear();
    for (std::size_t c = 0; c < cells_total; ++c) {
      if (mask & (1u << c)) cells.emplace_back(c / n, c % n);
    }
    if (!peel_basis(m, n, cells, mu.weights(), nu.weights(), masses)) continue;
    ++vertices;
    StableSum cost;
    for (std::size_t k = 0; k < cells.size(); ++k) {
      cost.add(masses[k] * g(mu.atom(cells[k].first) - nu.atom(cells[k].second)));
    }
    if (cost.value() < best_cost) {
      best_cost = cost.value();
      best_entries.clear();
      for (std::size_t k = 0; k < cells.size(); ++k) {
        if (masses[k] > 1e-15) best_entries.push_back({cells[k].first, cells[k].second, masses[k]});
      }
    }
  }
  return {TransportPlan(mu, nu, std::move(best_entries)), best_cost, vertices};
}

/// Transportation simplex with a northwest-corner start and Bland's rule for
/// both the entering and the leaving variable, which rules out cycling.
inline LpResult lp_by_simplex(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                              const CostFunction& g) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  std::vector<double> cost(m * n);
  double cost_scale = 1.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cost[i * n + j] = g(mu.atom(i) - nu.atom(j));
      cost_scale = std::max(cost_scale, std::abs(cost[i * n + j]));
    }
  }
  const double enter_tol = 1e-12 * cost_scale;

  std::vector<double> mass(m * n, 0.0);
  std::vector<char> basic(m * n, 0);

  // Northwest-corner start walks a staircase from (0,0) to (m-1,n-1) and
  // always yields exactly m+n-1 basic cells (zero-mass ones when degenerate).
  {
    std::vector<double> s(mu.weights());
    std::vector<double> d(nu.weights());
    std::size_t i = 0;
    std::size_t j = 0;
    while (true) {
      const double x = std::min(s[i], d[j]);
      mass[i * n + j] = x;
      basic[i * n + j] = 1;
      s[i] -= x;
      d[j] -= x;
      if (i == m - 1 && j == n - 1) break;
      if (s[i] <= 0.0 && i < m - 1) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  std::vector<double> u(m), v(n);
  std::vector<char> u_known(m), v_known(n);
  std::vector<std::size_t> cycle;
  int iterations = 0;
  const int max_iterations = 200000;

  while (true) {
    if (++iterations > max_iterations) {
      throw ComputationError("transportation simplex failed to converge");
    }

    // Potentials u_i + v_j = c_ij on the basis tree, anchored at u_0 = 0.
    std::fill(u_known.begin(), u_known.end(), 0);
    std::fill(v_known.begin(), v_known.end(), 0);
    u[0] = 0.0;
    u_known[0] = 1;
    std::size_t assigned = 1;
    while (assigned < m + n) {
      bool progressed = false;
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (!basic[i * n + j]) continue;
          if (u_known[i] && !v_known[j]) {
            v[j] = cost[i * n + j] - u[i];
            v_known[j] = 1;
            ++assigned;
            progressed = true;
          } else if (!u_known[i] && v_known[j]) {
            u[i] = cost[i * n + j] - v[j];
            u_known[i] = 1;
            ++assigned;
            progressed = true;
          }
        }
      }
      if (!progressed) {
        throw ComputationError("transportation simplex basis lost connectivity");
      }
    }

    // Entering cell: Bland's rule, first cell with negative reduced cost.
    std::size_t enter = m * n;
    for (std::size_t c = 0; c < m * n; ++c) {
      if (basic[c]) continue;
      if (cost[c] - u[c / n] - v[c % n] < -enter_tol) {
        enter = c;
        break;
      }
    }
    if (enter == m * n) break; // optimal

    // The basis tree plus the entering cell closes a unique alternating
    // cycle; find it as the tree path from row node ei to column node ej.
    const std::size_t ei = enter / n;
    const std::size_t ej = enter % n;
    // parent_edge[node] = basic cell used to reach it; nodes 0..m-1 rows,
    // m..m+n-1 columns.
    std::vector<std::size_t> parent_edge(m + n, m * n);
    std::vector<char> visited(m + n, 0);
    std::vector<std::size_t> stack = {ei};
    visited[ei] = 1;
    while (!stack.empty()) {
      const std::size_t node = stack.back();
      stack.pop_back();
      if (node == m + ej) break;
      if (node < m) {
        for (std::size_t j = 0; j < n; ++j) {
          if (basic[node * n + j] && !visited[m + j]) {
            visited[m + j] = 1;
            parent_edge[m + j] = node * n + j;
            stack.push_back(m + j);
          }
        }
      } else {
        const std::size_t j = node - m;
        for (std::size_t i = 0; i < m; ++i) {
          if (basic[i * n + j] && !visited[i]) {
            visited[i] = 1;
            parent_edge[i] = i * n + j;
            stack.push_back(i);
          }
        }
      }
    }
    if (!visited[m + ej]) {
      throw ComputationError("transportation simplex basis lost connectivity");
    }
    cycle.clear();
    for (std::size_t node = m + ej; node != ei;) {
      const std::size_t edge = parent_edge[node];
      cycle.push_back(edge);
      const std::size_t ri = edge / n;
      const std::size_t cj = m + edge % n;
      node = (node == cj) ? ri : cj;
    }
    // Walking back from column ej toward row ei lists the path edges so the
    // one incident to ej comes first; with the entering cell taking +theta,
    // signs along the path alternate starting at -.
    std::reverse(cycle.begin(), cycle.end()); // now starts at the edge incident to ei

    double theta = std::numeric_limits<double>::infinity();
    std::size_t leave = m * n;
    for (std::size_t k = 0; k < cycle.size(); k += 2) { // minus positions
      const double x = mass[cycle[k]];
      if (x < theta - 1e-18 || (std::abs(x - theta) <= 1e-18 && cycle[k] < leave)) {
        theta = x;
        leave = cycle[k];
      }
    }
    for (std::size_t k = 0; k < cycle.size(); ++k) {
      if (k % 2 == 0) {
        mass[cycle[k]] = std::max(0.0, mass[cycle[k]] - theta);
      } else {
        mass[cycle[k]] += theta;
      }
    }
    mass[enter] = theta;
    basic[enter] = 1;
    mass[leave] = 0.0;
    basic[leave] = 0;
  }

  std::vector<PlanEntry> entries;
  StableSum total;
  for (std::size_t c = 0; c < m * n; ++c) {
    if (mass[c] > 1e-15) {
      entries.push_back({c / n, c % n, mass[c]});
      total.add(mass[c] * cost[c]);
    }
  }
  return {TransportPlan(mu, nu, std::move(entries)), total.value(), iterations};
}

} // namespace detail

/// Optimal coupling by linear programming. Problems up to 4x4 are solved by
/// exhaustive vertex enumeration, larger ones by the transportation simplex;
/// products m*n beyond 10^4 are refused.
inline LpResult lp_optimal_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                const CostFunction& g) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  if (m * n > 10000) {
    throw SizeLimitError("lp_optimal_plan: problem size m*n = " + std::to_string(m * n) +
                         " exceeds the 10^4 cell limit");
  }
  if (m <= 4 && n <= 4) return detail::lp_by_vertex_enumeration(mu, nu, g);
  return detail::lp_by_simplex(mu, nu, g);
}

} // namespace ot1d

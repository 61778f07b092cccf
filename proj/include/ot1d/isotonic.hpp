#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ot1d {

/// Weighted least-squares isotonic regression (pool adjacent violators).
/// Returns the non-decreasing sequence closest to `values` in the weighted
/// L2 sense. Weights default to 1.
inline std::vector<double> isotonic_regression(const std::vector<double>& values,
                                               const std::vector<double>& weights = {}) {
  if (!weights.empty() && weights.size() != values.size()) {
    throw std::invalid_argument("isotonic_regression: weights length mismatch");
  }
  const std::size_t n = values.size();
  std::vector<double> level;  // pooled block means
  std::vector<double> wsum;   // pooled block weights
  std::vector<std::size_t> count; // block lengths
  level.reserve(n);
  wsum.reserve(n);
  count.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    double v = values[k];
    double w = weights.empty() ? 1.0 : weights[k];
    std::size_t c = 1;
    // Strict violations only: pooling ties would recompute the mean of
    // equal values and drift by an ulp, breaking idempotence.
    while (!level.empty() && level.back() > v) {
      v = (level.back() * wsum.back() + v * w) / (wsum.back() + w);
      w += wsum.back();
      c += count.back();
      level.pop_back();
      wsum.pop_back();
      count.pop_back();
    }
    level.push_back(v);
    wsum.push_back(w);
    count.push_back(c);
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t b = 0; b < level.size(); ++b) {
    out.insert(out.end(), count[b], level[b]);
  }
  return out;
}

} // namespace ot1d

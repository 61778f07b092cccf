#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>

namespace ot1d {

struct MinimizeResult {
  double xmin = 0.0;
  double fmin = 0.0;
  int iterations = 0;
};

/// Golden-section search on [lo, hi]. Shrinks the bracket until its width is
/// below `width_tol` and returns the left end, so for objectives with a flat
/// bottom the leftmost minimizer is selected (ties f(c) == f(d) shrink the
/// right side). Assumes f is unimodal on the bracket.
inline MinimizeResult golden_section_min(const std::function<double(double)>& f, double lo,
                                         double hi, double width_tol = 1e-12) {
  if (!(lo <= hi)) throw std::invalid_argument("golden_section_min: lo > hi");
  static const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;

  MinimizeResult result;
  double c = hi - invphi * (hi - lo);
  double d = lo + invphi * (hi - lo);
  double fc = f(c);
  double fd = f(d);
  while (hi - lo > width_tol) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - invphi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + invphi * (hi - lo);
      fd = f(d);
    }
    ++result.iterations;
    // Bail out once floating point cannot split the bracket any further.
    if (!(c > lo && d < hi && c < d)) break;
  }
  result.xmin = lo;
  result.fmin = f(lo);
  return result;
}

} // namespace ot1d

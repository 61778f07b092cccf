#pragma once

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace ot1d {

/// Shortest-round-trip text form of a double (17 significant digits); used
/// everywhere a numeric value crosses a serialization boundary.
inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

/// Neumaier-compensated accumulator. Running sums of probability weights and
/// of per-interval cost contributions go through this so that merged
/// breakpoint levels from different measures agree to the last bit.
class StableSum {
public:
  void add(double v) {
    const double t = sum_ + v;
    if (!std::isfinite(t)) {
      // Overflow and NaN must propagate untouched; the compensation term
      // would otherwise turn inf - inf into NaN.
      sum_ = t;
      comp_ = 0.0;
      return;
    }
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return std::isfinite(sum_) ? sum_ + comp_ : sum_; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {a};
  std::vector<double> out(n);
  const double step = (b - a) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + step * static_cast<double>(i);
  out.back() = b;
  return out;
}

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1], computed
/// by Newton iteration on the Legendre recurrence (accurate to ~1e-15).
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendreRule(std::size_t n) : nodes(n), weights(n) {
    const std::size_t m = (n + 1) / 2;
    for (std::size_t i = 0; i < m; ++i) {
      double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                          (static_cast<double>(n) + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = x;
        for (std::size_t k = 2; k <= n; ++k) {
          const double pk = ((2.0 * static_cast<double>(k) - 1.0) * x * p1 -
                             (static_cast<double>(k) - 1.0) * p0) /
                            static_cast<double>(k);
          p0 = p1;
          p1 = pk;
        }
        dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes[i] = -x;
      nodes[n - 1 - i] = x;
      const double w = 2.0 / ((1.0 - x * x) * dp * dp);
      weights[i] = w;
      weights[n - 1 - i] = w;
    }
  }
};

inline const GaussLegendreRule& gauss_legendre_32() {
  static const GaussLegendreRule rule(32);
  return rule;
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

/// Inverse standard normal CDF: Acklam's rational approximation polished by
/// one Halley step against erfc. Absolute error is well below 1e-10 on
/// [1e-8, 1 - 1e-8].
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0,1)");
  }
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement
  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

} // namespace ot1d

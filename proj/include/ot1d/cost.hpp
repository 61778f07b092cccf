#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ot1d/numeric.hpp"
#include "ot1d/rng.hpp"

namespace ot1d {

/// Growth constants (A, B) of the condition g(x-y) <= A + B(g(x)+g(y)).
struct GrowthConstants {
  double A = 0.0;
  double B = 0.0;
};

/// Constants (0, 2^p) that make |x|^p satisfy the growth condition; this is
/// the algebraic-growth bound with C1 = C2 = 1 and a vanishing core radius.
inline GrowthConstants growth_constants_for_power(double p) {
  if (!(p > 1.0)) {
    throw std::domain_error("growth_constants_for_power: requires p > 1");
  }
  return {0.0, std::pow(2.0, p)};
}

/// Strictly convex cost g with g(0) = 0. Built-ins:
///   quadratic        g(x) = x^2
///   power(p), p > 1  g(x) = |x|^p
///   skew_quadratic(c), c > 0   g(x) = x^2 for x >= 0, c*x^2 for x < 0
///
/// `smooth()` marks costs whose derivative is locally Lipschitz; power(p)
/// with p < 2 is excluded because g'' blows up at the origin.
class CostFunction {
public:
  enum class Kind { Quadratic, Power, SkewQuadratic, Custom };

  static CostFunction quadratic() {
    CostFunction g;
    g.kind_ = Kind::Quadratic;
    g.label_ = "quadratic";
    g.growth_ = GrowthConstants{0.0, 2.0};
    g.smooth_ = true;
    return g;
  }

  static CostFunction power(double p) {
    if (!(p > 1.0)) {
      throw std::invalid_argument("cost must be strictly convex: p > 1 required");
    }
    CostFunction g;
    g.kind_ = Kind::Power;
    g.param_ = p;
    g.label_ = "power:" + std::to_string(p);
    g.growth_ = growth_constants_for_power(p);
    g.smooth_ = p >= 2.0;
    return g;
  }

  static CostFunction skew_quadratic(double c) {
    if (!(c > 0.0)) {
      throw std::invalid_argument("cost must be strictly convex: c > 0 required");
    }
    CostFunction g;
    g.kind_ = Kind::SkewQuadratic;
    g.param_ = c;
    g.label_ = "skewquad:" + std::to_string(c);
    const double ratio = std::max(1.0, c) / std::min(1.0, c);
    g.growth_ = GrowthConstants{0.0, 2.0 * ratio};
    g.smooth_ = true;
    return g;
  }

  /// Registers a user cost. Strict convexity cannot be proven from code, so
  /// it is sample-checked here on 10^4 random triples via the exchange
  /// inequality g(x)+g(y) > g(x+delta)+g(y-delta); failures throw.
  static CostFunction custom(std::string label, std::function<double(double)> eval,
                             std::function<double(double)> derivative = nullptr,
                             std::optional<GrowthConstants> growth = std::nullopt,
                             bool smooth = false) {
    if (!eval) throw std::invalid_argument("custom cost: eval required");
    if (eval(0.0) != 0.0) {
      throw std::invalid_argument("custom cost: g(0) must be exactly 0");
    }
    RngStream rng(stream_key({hash_label("cost-registration-probe"), hash_label(label)}));
    for (int trial = 0; trial < 10000; ++trial) {
      const double x = rng.next_uniform(-50.0, 50.0);
      const double y = x + rng.next_uniform(1e-6, 50.0);
      const double delta = rng.next_double() * 0.5 * (y - x);
      const double lhs = eval(x) + eval(y);
      const double rhs = eval(x + delta) + eval(y - delta);
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      if (!(lhs > rhs - 1e-12 * scale)) {
        throw std::invalid_argument("custom cost: strict convexity probe failed at x=" +
                                    std::to_string(x) + " y=" + std::to_string(y));
      }
      if (!(eval(x) >= 0.0) || (x != 0.0 && !(eval(x) > 0.0))) {
        throw std::invalid_argument("custom cost: g must be positive away from 0");
      }
    }
    // The loop above tolerates equality (tiny deltas sit below rounding), so
    // an affine segment such as g = |x| on a half-line would slip through.
    // On well-separated triples strict convexity shows up as a definite
    // margin; require it.
    for (int trial = 0; trial < 10000; ++trial) {
      const double x = rng.next_uniform(-50.0, 50.0);
      const double gap = rng.next_uniform(1.0, 50.0);
      const double delta = gap * rng.next_uniform(0.25, 0.75);
      const double lhs = eval(x) + eval(x + gap);
      const double rhs = eval(x + delta) + eval(x + gap - delta);
      const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
      if (!(lhs - rhs > 1e-9 * scale)) {
        throw std::invalid_argument("custom cost: flat segment near x=" + std::to_string(x) +
                                    ", strict convexity not established");
      }
    }
    CostFunction g;
    g.kind_ = Kind::Custom;
    g.label_ = std::move(label);
    g.custom_eval_ = std::move(eval);
    g.custom_derivative_ = std::move(derivative);
    g.growth_ = growth;
    g.smooth_ = smooth;
    return g;
  }

  double operator()(double x) const {
    switch (kind_) {
      case Kind::Quadratic:
        return x * x;
      case Kind::Power:
        return power_eval(std::abs(x));
      case Kind::SkewQuadratic:
        return x >= 0.0 ? x * x : param_ * x * x;
      case Kind::Custom:
        return custom_eval_(x);
    }
    return 0.0;
  }

  bool has_derivative() const {
    return kind_ != Kind::Custom || static_cast<bool>(custom_derivative_);
  }

  double derivative(double x) const {
    switch (kind_) {
      case Kind::Quadratic:
        return 2.0 * x;
      case Kind::Power: {
        if (x == 0.0) return 0.0;
        const double mag = param_ * power_eval_exponent(std::abs(x), param_ - 1.0);
        return x > 0.0 ? mag : -mag;
      }
      case Kind::SkewQuadratic:
        return x >= 0.0 ? 2.0 * x : 2.0 * param_ * x;
      case Kind::Custom:
        if (!custom_derivative_) {
          throw std::logic_error("cost '" + label_ + "' has no derivative");
        }
        return custom_derivative_(x);
    }
    return 0.0;
  }

  const std::string& label() const { return label_; }
  const std::optional<GrowthConstants>& growth() const { return growth_; }
  bool smooth() const { return smooth_; }
  Kind kind() const { return kind_; }

  /// p for power costs, c for skew-quadratic.
  double parameter() const { return param_; }

private:
  CostFunction() = default;

  double power_eval(double a) const { return power_eval_exponent(a, param_); }

  static double power_eval_exponent(double a, double p) {
    if (p == 2.0) return a * a;
    if (p == 1.0) return a;
    if (p == 3.0) return a * a * a;
    if (p == 4.0) {
      const double s = a * a;
      return s * s;
    }
    if (p == 0.5) return std::sqrt(a);
    if (p == 1.5) return a * std::sqrt(a);
    return std::pow(a, p);
  }

  Kind kind_ = Kind::Quadratic;
  double param_ = 0.0;
  std::string label_;
  std::function<double(double)> custom_eval_;
  std::function<double(double)> custom_derivative_;
  std::optional<GrowthConstants> growth_;
  bool smooth_ = false;
};

/// Result of scanning the growth condition over a grid of (x, y) pairs.
struct GrowthCheckReport {
  bool ok = true;
  double worst_violation = 0.0;
  double worst_x = 0.0;
  double worst_y = 0.0;
};

/// Checks g(x-y) <= A + B(g(x)+g(y)) on every ordered pair of grid points,
/// with a 1e-12 relative slack for rounding. Reports the worst violating
/// pair when the check fails.
inline GrowthCheckReport check_growth(const CostFunction& g, double A, double B,
                                      std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("check_growth: empty grid");
  GrowthCheckReport report;
  for (double x : grid) {
    for (double y : grid) {
      const double bound = A + B * (g(x) + g(y));
      const double violation = g(x - y) - bound;
      if (violation > 1e-12 * std::max(1.0, std::abs(bound))) {
        report.ok = false;
        if (violation > report.worst_violation) {
          report.worst_violation = violation;
          report.worst_x = x;
          report.worst_y = y;
        }
      }
    }
  }
  return report;
}

/// Parses the CLI cost grammar: quadratic | power:<p> | skewquad:<c>.
inline CostFunction parse_cost_spec(std::string_view spec) {
  if (spec == "quadratic") return CostFunction::quadratic();
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  if (colon != std::string_view::npos) {
    const std::string arg(spec.substr(colon + 1));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(arg, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad cost parameter in '" + std::string(spec) + "'");
    }
    if (used != arg.size()) {
      throw std::invalid_argument("bad cost parameter in '" + std::string(spec) + "'");
    }
    if (head == "power") return CostFunction::power(value);
    if (head == "skewquad") return CostFunction::skew_quadratic(value);
  }
  throw std::invalid_argument("unknown cost spec '" + std::string(spec) +
                              "' (expected quadratic | power:<p> | skewquad:<c>)");
}

} // namespace ot1d

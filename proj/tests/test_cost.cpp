#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "ot1d/cost.hpp"
#include "ot1d/numeric.hpp"
#include "ot1d/rng.hpp"

using namespace ot1d;

TEST_CASE("built-in costs evaluate correctly", "[cost]") {
  const CostFunction quad = CostFunction::quadratic();
  CHECK(quad(0.0) == 0.0);
  CHECK(quad(-3.0) == 9.0);

  const CostFunction cube = CostFunction::power(3.0);
  CHECK(cube(-2.0) == 8.0);
  CHECK(cube(0.0) == 0.0);

  const CostFunction skew = CostFunction::skew_quadratic(4.0);
  CHECK(skew(-1.0) == 4.0);
  CHECK(skew(1.0) == 1.0);
  CHECK(skew(0.0) == 0.0);
}

TEST_CASE("power costs match std::pow on random arguments", "[cost]") {
  RngStream rng(stream_key({hash_label("power-vs-pow"), 0}));
  for (double p : {1.5, 2.0, 3.0, 4.0, 2.7}) {
    const CostFunction g = CostFunction::power(p);
    for (int rep = 0; rep < 200; ++rep) {
      const double x = rng.next_uniform(-20.0, 20.0);
      const double expected = std::pow(std::abs(x), p);
      CHECK_THAT(g(x), Catch::Matchers::WithinRel(expected, 1e-13));
    }
  }
}

TEST_CASE("non-convex power parameters are rejected", "[cost]") {
  CHECK_THROWS_AS(CostFunction::power(1.0), std::invalid_argument);
  CHECK_THROWS_AS(CostFunction::power(0.5), std::invalid_argument);
  CHECK_THROWS_AS(CostFunction::skew_quadratic(0.0), std::invalid_argument);
  CHECK_THROWS_AS(CostFunction::skew_quadratic(-1.0), std::invalid_argument);
}

TEST_CASE("cost spec grammar", "[cost]") {
  CHECK(parse_cost_spec("quadratic").kind() == CostFunction::Kind::Quadratic);
  CHECK(parse_cost_spec("power:3").kind() == CostFunction::Kind::Power);
  CHECK(parse_cost_spec("skewquad:4").kind() == CostFunction::Kind::SkewQuadratic);
  CHECK_THROWS_AS(parse_cost_spec("power:0.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_cost_spec("power:abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_cost_spec("power:3x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_cost_spec("cubic"), std::invalid_argument);
}

TEST_CASE("derivatives match central finite differences", "[cost]") {
  // The grid avoids x = 0 where Power(p < 2) has unbounded curvature.
  const std::vector<CostFunction> costs = {CostFunction::quadratic(), CostFunction::power(1.5),
                                           CostFunction::power(3.0), CostFunction::power(4.0),
                                           CostFunction::skew_quadratic(4.0)};
  for (const auto& g : costs) {
    REQUIRE(g.has_derivative());
    for (double x = -5.0; x <= 5.0; x += 0.25) {
      if (std::abs(x) < 0.2) continue;
      const double h = 1e-6 * std::max(1.0, std::abs(x));
      const double fd = (g(x + h) - g(x - h)) / (2.0 * h);
      CHECK_THAT(g.derivative(x), Catch::Matchers::WithinRel(fd, 1e-6));
    }
  }
}

TEST_CASE("growth constants for power costs", "[cost][growth]") {
  const GrowthConstants g2 = growth_constants_for_power(2.0);
  CHECK(g2.A == 0.0);
  CHECK(g2.B == 4.0);
  const GrowthConstants g3 = growth_constants_for_power(3.0);
  CHECK(g3.B == 8.0);
  const GrowthConstants g15 = growth_constants_for_power(1.5);
  CHECK_THAT(g15.B, Catch::Matchers::WithinRel(std::pow(2.0, 1.5), 1e-15));
  CHECK_THROWS_AS(growth_constants_for_power(1.0), std::domain_error);
  CHECK_THROWS_AS(growth_constants_for_power(0.3), std::domain_error);
}

TEST_CASE("growth condition scan", "[cost][growth]") {
  const std::vector<double> grid = linspace(-10.0, 10.0, 100);

  SECTION("quadratic with B=2 passes") {
    const auto report = check_growth(CostFunction::quadratic(), 0.0, 2.0, grid);
    CHECK(report.ok);
  }
  SECTION("quadratic with undersized B=0.5 fails near the corners") {
    const auto report = check_growth(CostFunction::quadratic(), 0.0, 0.5, grid);
    REQUIRE_FALSE(report.ok);
    // (x-y)^2 = 400 against 0.5*(100+100): worst pair sits at opposite ends.
    CHECK(std::abs(report.worst_x) > 9.0);
    CHECK(std::abs(report.worst_y) > 9.0);
    CHECK(report.worst_x * report.worst_y < 0.0);
    CHECK(report.worst_violation > 0.0);
  }
  SECTION("cubic cost satisfies the sharper B=4 bound") {
    const auto report = check_growth(CostFunction::power(3.0), 0.0, 4.0, grid);
    CHECK(report.ok);
  }
  SECTION("lemma constants pass for the standard exponents") {
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
      const GrowthConstants c = growth_constants_for_power(p);
      const auto report = check_growth(CostFunction::power(p), c.A, c.B, grid);
      CHECK(report.ok);
    }
  }
}

TEST_CASE("strict convexity holds on sampled triples", "[cost]") {
  RngStream rng(stream_key({hash_label("convexity-unit"), 0}));
  const std::vector<CostFunction> costs = {CostFunction::quadratic(), CostFunction::power(1.5),
                                           CostFunction::power(3.0),
                                           CostFunction::skew_quadratic(4.0)};
  for (const auto& g : costs) {
    for (int rep = 0; rep < 1000; ++rep) {
      const double x = rng.next_uniform(-20.0, 20.0);
      const double y = x + rng.next_uniform(1e-3, 20.0);
      const double delta = rng.next_double() * 0.5 * (y - x);
      CHECK(g(x) + g(y) >= g(x + delta) + g(y - delta) - 1e-12);
    }
  }
}

TEST_CASE("custom cost registration probes convexity", "[cost]") {
  SECTION("a convex custom cost registers and evaluates") {
    const CostFunction g = CostFunction::custom(
        "cosh-1", [](double x) { return std::cosh(x) - 1.0; },
        [](double x) { return std::sinh(x); }, std::nullopt, true);
    CHECK(g(0.0) == 0.0);
    CHECK(g.has_derivative());
    CHECK_FALSE(g.growth().has_value());
  }
  SECTION("a non-convex candidate is rejected") {
    CHECK_THROWS_AS(CostFunction::custom("abs", [](double x) { return std::abs(x); }),
                    std::invalid_argument);
  }
  SECTION("g(0) != 0 is rejected") {
    CHECK_THROWS_AS(CostFunction::custom("shifted", [](double x) { return x * x + 1.0; }),
                    std::invalid_argument);
  }
}

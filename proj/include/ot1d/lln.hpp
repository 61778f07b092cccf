#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ot1d/barycenter.hpp"
#include "ot1d/cost.hpp"
#include "ot1d/errors.hpp"
#include "ot1d/measure.hpp"
#include "ot1d/rng.hpp"
#include "ot1d/transport.hpp"

namespace ot1d {

/// Per-sample-size diagnostics of one convergence experiment. Columns are
/// parallel to n_values; the CSV layout is one row per (n, metric).
struct ConvergenceReport {
  std::vector<std::size_t> n_values;
  std::vector<std::string> metric_names;
  std::vector<std::vector<double>> columns;
  std::uint64_t seed = 0;
  std::string target_kind;

  double value(std::string_view metric, std::size_t n) const {
    for (std::size_t c = 0; c < metric_names.size(); ++c) {
      if (metric_names[c] != metric) continue;
      for (std::size_t k = 0; k < n_values.size(); ++k) {
        if (n_values[k] == n) return columns[c][k];
      }
    }
    throw std::invalid_argument("ConvergenceReport: no entry for metric '" + std::string(metric) +
                                "' at n=" + std::to_string(n));
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "n,metric_name,value,seed,target_kind\n";
    std::string kind = target_kind;
    std::replace(kind.begin(), kind.end(), ',', ';');
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      for (std::size_t c = 0; c < metric_names.size(); ++c) {
        out << n_values[k] << ',' << metric_names[c] << ',' << format_double(columns[c][k]) << ','
            << seed << ',' << kind << '\n';
      }
    }
    return out.str();
  }
};

namespace detail {

inline void require_increasing(const std::vector<std::size_t>& n_values) {
  if (n_values.empty()) throw std::invalid_argument("experiment: empty n ladder");
  for (std::size_t k = 0; k + 1 < n_values.size(); ++k) {
    if (n_values[k] >= n_values[k + 1]) {
      throw std::invalid_argument("experiment: n ladder must be strictly increasing");
    }
  }
}

} // namespace detail

/// Half-decade ladder 10^1 .. 10^4.
inline std::vector<std::size_t> default_n_ladder() {
  return {10, 32, 100, 316, 1000, 3162, 10000};
}

/// Seeded real-valued distribution. Draw i of a size-n sample is taken from
/// its own substream keyed by (epoch, experiment, family, seed, n, i), so
/// samples depend on the sampler family but not on the cost being fitted:
/// different costs are compared on identical data.
struct ScalarSampler {
  std::string label;
  std::function<double(RngStream&)> draw;

  static ScalarSampler bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("bernoulli: p outside [0,1]");
    return {"bernoulli(" + format_double(p) + ")",
            [p](RngStream& rng) { return rng.next_double() < p ? 1.0 : 0.0; }};
  }
  static ScalarSampler uniform(double a, double b) {
    if (!(a < b)) throw std::invalid_argument("uniform: a must be < b");
    return {"uniform(" + format_double(a) + "," + format_double(b) + ")",
            [a, b](RngStream& rng) { return rng.next_uniform(a, b); }};
  }
  static ScalarSampler two_point(double a, double b) {
    return {"twopoint(" + format_double(a) + "," + format_double(b) + ")",
            [a, b](RngStream& rng) { return rng.next_double() < 0.5 ? a : b; }};
  }
  static ScalarSampler gaussian(double mean, double sd) {
    if (!(sd >= 0.0)) throw std::invalid_argument("gaussian: sd must be >= 0");
    return {"gaussian(" + format_double(mean) + "," + format_double(sd) + ")",
            [mean, sd](RngStream& rng) { return mean + sd * rng.next_gaussian(); }};
  }
  static ScalarSampler constant(double c) {
    return {"constant(" + format_double(c) + ")", [c](RngStream&) { return c; }};
  }
};

/// Draws the i-th point of the size-n sample of a scalar experiment.
inline double scalar_draw(const ScalarSampler& sampler, std::uint64_t seed, std::size_t n,
                          std::size_t i) {
  RngStream stream(stream_key({detail::kStreamEpoch, hash_label("scalar-lln"),
                               hash_label(sampler.label), seed, n, i}));
  return sampler.draw(stream);
}

/// Strong law for M-estimators: for each n draws n i.i.d. reals, fits the
/// scalar Fréchet mean under g, and reports |x_hat - x_star| against the
/// caller-supplied minimizer x_star of E g(X - x).
inline ConvergenceReport scalar_lln_experiment(const CostFunction& g, const ScalarSampler& sampler,
                                               const std::vector<std::size_t>& n_values,
                                               std::uint64_t seed, double x_star,
                                               std::string target_kind) {
  detail::require_increasing(n_values);
  ConvergenceReport report;
  report.n_values = n_values;
  report.metric_names = {"abs_error"};
  report.columns.resize(1);
  report.seed = seed;
  report.target_kind = std::move(target_kind);
  std::vector<double> sample;
  for (std::size_t n : n_values) {
    sample.resize(n);
    for (std::size_t i = 0; i < n; ++i) sample[i] = scalar_draw(sampler, seed, n, i);
    const std::vector<double> weights(n, 1.0);
    const double x_hat = scalar_frechet_mean(g, sample, weights).minimizer;
    report.columns[0].push_back(std::abs(x_hat - x_star));
  }
  return report;
}

/// Law of random Dirac masses delta_S.
inline MeasureDistribution dirac_family(ScalarSampler s) {
  auto draw = [s](RngStream& rng) { return DiscreteMeasure::dirac(s.draw(rng)); };
  return MeasureDistribution::sampler("dirac(" + s.label + ")", std::move(draw));
}

/// Equal-weight m-point discretization of Uniform(a, b): atoms at the
/// interval midpoints (k - 1/2)/m scaled into (a, b).
inline DiscreteMeasure discretized_uniform(double a, double b, std::size_t m) {
  if (!(a < b) || m == 0) throw std::invalid_argument("discretized_uniform: need a < b, m > 0");
  std::vector<double> atoms(m);
  for (std::size_t k = 0; k < m; ++k) {
    atoms[k] = a + (b - a) * (static_cast<double>(k) + 0.5) / static_cast<double>(m);
  }
  return DiscreteMeasure(std::move(atoms), std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

/// Law of a fixed base measure translated by a random shift S.
inline MeasureDistribution translate_family(DiscreteMeasure base, ScalarSampler shift) {
  auto draw = [base, shift](RngStream& rng) { return base.translated(shift.draw(rng)); };
  return MeasureDistribution::sampler("translate(" + shift.label + ")", std::move(draw));
}

/// Draws the i-th measure of the size-n sample of a barycenter experiment.
inline DiscreteMeasure measure_draw(const MeasureDistribution& dist, std::uint64_t seed,
                                    std::size_t n, std::size_t i) {
  RngStream stream(stream_key({detail::kStreamEpoch, hash_label("barycenter-lln"),
                               hash_label(dist.description()), seed, n, i}));
  return dist.draw(stream);
}

/// Convergence of empirical barycenters: for each n draws mu_1..mu_n from
/// the sampler, forms the equal-weight barycenter, and reports both
/// transportation costs to a reference measure plus the Levy distance.
/// `reference_kind` records the provenance of the reference ("analytic ..."
/// for closed forms, "numerical ..." for a high-budget estimate). The cost
/// must carry growth constants: without them the J columns are not known to
/// be meaningful diagnostics of convergence.
inline ConvergenceReport barycenter_lln_experiment(const CostFunction& g,
                                                   const MeasureDistribution& dist,
                                                   const std::vector<std::size_t>& n_values,
                                                   std::uint64_t seed,
                                                   const DiscreteMeasure& reference,
                                                   std::string reference_kind) {
  detail::require_increasing(n_values);
  if (dist.is_mixture()) {
    throw std::invalid_argument("barycenter_lln_experiment: needs a sampler distribution");
  }
  if (!g.growth()) {
    throw GrowthConstantsMissingError("barycenter_lln_experiment: cost '" + g.label() +
                                      "' carries no growth constants");
  }
  ConvergenceReport report;
  report.n_values = n_values;
  report.metric_names = {"J_bar_to_ref", "J_ref_to_bar", "levy"};
  report.columns.resize(3);
  report.seed = seed;
  report.target_kind = std::move(reference_kind);
  for (std::size_t n : n_values) {
    std::vector<DiscreteMeasure> sample;
    sample.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sample.push_back(measure_draw(dist, seed, n, i));
    const WeightedFamily fam(std::move(sample),
                             std::vector<double>(n, 1.0 / static_cast<double>(n)));
    const DiscreteMeasure bar = finite_barycenter(g, fam);
    report.columns[0].push_back(transport_cost(bar, reference, g));
    report.columns[1].push_back(transport_cost(reference, bar, g));
    report.columns[2].push_back(levy_distance(bar, reference));
  }
  return report;
}

/// mu_n = (1 - 1/n) delta_0 + (1/n) delta_n for n = 1..count: converges
/// weakly to delta_0 while the transportation cost to delta_0 blows up
/// (mass 1/n escapes at speed n).
inline std::vector<DiscreteMeasure> mass_escape_sequence(std::size_t count) {
  std::vector<DiscreteMeasure> seq;
  seq.reserve(count);
  for (std::size_t n = 1; n <= count; ++n) {
    const double inv = 1.0 / static_cast<double>(n);
    seq.emplace_back(std::vector<double>{0.0, static_cast<double>(n)},
                     std::vector<double>{1.0 - inv, inv});
  }
  return seq;
}

/// mu_n = delta_{1/n} for n = 1..count: converges to delta_0 weakly and in
/// transportation cost simultaneously.
inline std::vector<DiscreteMeasure> shrinking_dirac_sequence(std::size_t count) {
  std::vector<DiscreteMeasure> seq;
  seq.reserve(count);
  for (std::size_t n = 1; n <= count; ++n) {
    seq.push_back(DiscreteMeasure::dirac(1.0 / static_cast<double>(n)));
  }
  return seq;
}

/// Diagnostics separating weak convergence from convergence in
/// transportation cost: per element of the sequence reports the Levy
/// distance to the target, the drift of the cost to a fixed witness nu0,
/// and the cost to the target itself.
inline ConvergenceReport strongweak_check(const CostFunction& g,
                                          const std::vector<DiscreteMeasure>& sequence,
                                          const DiscreteMeasure& target,
                                          const DiscreteMeasure& nu0) {
  if (sequence.empty()) throw std::invalid_argument("strongweak_check: empty sequence");
  if (!g.growth()) {
    throw GrowthConstantsMissingError("strongweak_check: cost '" + g.label() +
                                      "' carries no growth constants");
  }
  const double j_target_witness = transport_cost(target, nu0, g);
  if (!std::isfinite(j_target_witness)) {
    throw std::invalid_argument("strongweak_check: J(target, nu0) must be finite");
  }
  ConvergenceReport report;
  report.metric_names = {"levy_to_target", "J_drift_at_witness", "J_to_target"};
  report.columns.resize(3);
  report.target_kind = "constructed sequence";
  for (std::size_t k = 0; k < sequence.size(); ++k) {
    report.n_values.push_back(k + 1);
    report.columns[0].push_back(levy_distance(sequence[k], target));
    report.columns[1].push_back(std::abs(transport_cost(sequence[k], nu0, g) - j_target_witness));
    report.columns[2].push_back(transport_cost(sequence[k], target, g));
  }
  return report;
}

/// A measure known only through finite truncations, used to represent
/// heavy-tail laws whose transportation cost to compact measures diverges.
/// `truncate(level)` must return a valid probability measure for the levels
/// the diagnostics probe (10, 20, 40).
struct TailFamily {
  std::string label;
  std::function<DiscreteMeasure(int)> truncate;
};

/// One participant of an equivalence-class check: a fixed measure or a
/// truncation family.
class ClassMember {
public:
  ClassMember(DiscreteMeasure m) : fixed_(std::move(m)), label_("measure") {}
  ClassMember(TailFamily f) : family_(std::move(f.truncate)), label_(std::move(f.label)) {
    if (!family_) throw std::invalid_argument("ClassMember: null truncation family");
  }

  DiscreteMeasure at_level(int level) const { return family_ ? family_(level) : *fixed_; }
  const std::string& label() const { return label_; }

private:
  std::optional<DiscreteMeasure> fixed_;
  std::function<DiscreteMeasure(int)> family_;
  std::string label_;
};

struct EquivalenceReport {
  std::vector<std::vector<std::size_t>> classes; // partition of member indices
  std::vector<std::size_t> class_of;             // class index per member
  std::vector<std::vector<char>> finite;         // computed relation matrix
};

namespace detail {

/// Finite discrete data can only indicate a divergent cost by trend: J is
/// computed at truncation levels 10, 20, 40 and declared infinite when it
/// grows by at least 10x per level (or overflows outright).
inline bool pair_cost_finite(const CostFunction& g, const ClassMember& a, const ClassMember& b) {
  const double j10 = transport_cost(a.at_level(10), b.at_level(10), g);
  const double j20 = transport_cost(a.at_level(20), b.at_level(20), g);
  const double j40 = transport_cost(a.at_level(40), b.at_level(40), g);
  if (!std::isfinite(j10) || !std::isfinite(j20) || !std::isfinite(j40)) return false;
  if (j10 > 0.0 && j20 >= 10.0 * j10 && j40 >= 10.0 * j20) return false;
  return true;
}

} // namespace detail

/// Groups members by finiteness of the mutual transportation cost and
/// verifies that the computed relation is an equivalence (symmetric and
/// transitive) on the given set; violations mean the finite/infinite
/// classification is inconsistent and raise ComputationError.
inline EquivalenceReport equivalence_class_check(const CostFunction& g,
                                                 const std::vector<ClassMember>& members) {
  if (!g.growth()) {
    throw GrowthConstantsMissingError("equivalence_class_check: cost '" + g.label() +
                                      "' carries no growth constants");
  }
  if (members.empty()) throw std::invalid_argument("equivalence_class_check: empty member list");
  const std::size_t n = members.size();
  EquivalenceReport report;
  report.finite.assign(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    report.finite[i][i] = 1;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool ij = detail::pair_cost_finite(g, members[i], members[j]);
      const bool ji = detail::pair_cost_finite(g, members[j], members[i]);
      if (ij != ji) {
        throw ComputationError("equivalence_class_check: asymmetric classification between '" +
                               members[i].label() + "' and '" + members[j].label() + "'");
      }
      report.finite[i][j] = report.finite[j][i] = ij ? 1 : 0;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t k = 0; k < n; ++k) {
        if (report.finite[i][j] && report.finite[j][k] && !report.finite[i][k]) {
          throw ComputationError("equivalence_class_check: transitivity violated on members " +
                                 std::to_string(i) + ", " + std::to_string(j) + ", " +
                                 std::to_string(k));
        }
      }
    }
  }
  report.class_of.assign(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (report.class_of[i] != n) continue;
    const std::size_t cls = report.classes.size();
    report.classes.emplace_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (report.finite[i][j]) {
        report.class_of[j] = cls;
        report.classes.back().push_back(j);
      }
    }
  }
  return report;
}

} // namespace ot1d

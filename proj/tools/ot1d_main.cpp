// ot1d: one-dimensional optimal transport toolbox.
//
// Subcommands: cost, plan, barycenter, lln (scalar|barycenter|strongweak),
// check. Every run echoes its resolved configuration as one JSON line on
// standard error. Exit codes: 0 success, 1 computational error, 2 usage
// error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ot1d/io.hpp"
#include "ot1d/ot1d.hpp"
#include "ot1d/selfcheck.hpp"

namespace {

using nlohmann::json;

void echo_config(const json& cfg) { std::cerr << cfg.dump() << '\n'; }

void write_output(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw std::invalid_argument("cannot open output file '" + out_path + "'");
  f << text;
}

std::vector<double> parse_weights(const std::string& spec) {
  std::vector<double> weights;
  std::size_t pos = 0;
  while (pos <= spec.size()) {
    const std::size_t comma = std::min(spec.find(',', pos), spec.size());
    const std::string token = spec.substr(pos, comma - pos);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad weight '" + token + "' in --weights");
    }
    if (used != token.size()) throw std::invalid_argument("bad weight '" + token + "' in --weights");
    weights.push_back(value);
    pos = comma + 1;
  }
  return weights;
}

std::vector<double> make_grid(std::size_t n) {
  if (n == 0) throw std::invalid_argument("--grid must be positive");
  std::vector<double> grid(n);
  for (std::size_t k = 0; k < n; ++k) {
    grid[k] = static_cast<double>(k + 1) / static_cast<double>(n + 1);
  }
  return grid;
}

// Analytic inputs are approximated on an n-point quantile grid; discrete
// inputs pass through exactly.
ot1d::DiscreteMeasure as_discrete(const ot1d::QuantileCurve& curve, std::size_t grid_n) {
  if (const auto* d = curve.as_discrete()) return *d;
  const std::vector<double> grid = make_grid(grid_n);
  std::vector<double> atoms(grid.size());
  std::vector<double> masses(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    atoms[i] = curve(grid[i]);
    const double left = i == 0 ? 0.0 : 0.5 * (grid[i - 1] + grid[i]);
    const double right = i + 1 == grid.size() ? 1.0 : 0.5 * (grid[i] + grid[i + 1]);
    masses[i] = right - left;
  }
  return ot1d::DiscreteMeasure(std::move(atoms), std::move(masses));
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  return json::parse(in);
}

int run_cost(const std::string& cost_spec, const std::string& mu_path, const std::string& nu_path) {
  echo_config(json{{"subcommand", "cost"}, {"cost", cost_spec}, {"mu", mu_path}, {"nu", nu_path}});
  const ot1d::CostFunction g = ot1d::parse_cost_spec(cost_spec);
  const ot1d::QuantileCurve mu = ot1d::read_measure_file(mu_path);
  const ot1d::QuantileCurve nu = ot1d::read_measure_file(nu_path);
  std::cout << ot1d::format_double(ot1d::transport_cost(mu, nu, g)) << '\n';
  return 0;
}

int run_plan(const std::string& mu_path, const std::string& nu_path, const std::string& out_path) {
  echo_config(json{{"subcommand", "plan"}, {"mu", mu_path}, {"nu", nu_path}, {"out", out_path}});
  const ot1d::QuantileCurve mu = ot1d::read_measure_file(mu_path);
  const ot1d::QuantileCurve nu = ot1d::read_measure_file(nu_path);
  if (!mu.as_discrete() || !nu.as_discrete()) {
    throw std::invalid_argument("plan requires discrete or sample measures");
  }
  const ot1d::TransportPlan plan = ot1d::monotone_plan(*mu.as_discrete(), *nu.as_discrete());
  write_output(ot1d::plan_to_csv(plan), out_path);
  return 0;
}

int run_barycenter(const std::string& cost_spec, const std::string& weights_spec,
                   const std::vector<std::string>& mu_paths, std::size_t grid_n, std::size_t mc,
                   std::uint64_t seed, const std::string& emit_quantiles,
                   const std::string& out_path) {
  echo_config(json{{"subcommand", "barycenter"},
                   {"cost", cost_spec},
                   {"weights", weights_spec},
                   {"mu", mu_paths},
                   {"grid", grid_n},
                   {"mc", mc},
                   {"seed", seed},
                   {"emit_quantiles", emit_quantiles},
                   {"out", out_path}});
  const ot1d::CostFunction g = ot1d::parse_cost_spec(cost_spec);
  std::vector<ot1d::DiscreteMeasure> measures;
  measures.reserve(mu_paths.size());
  for (const auto& path : mu_paths) {
    measures.push_back(as_discrete(ot1d::read_measure_file(path), grid_n));
  }
  const ot1d::WeightedFamily fam(std::move(measures), parse_weights(weights_spec));

  ot1d::DiscreteMeasure result = [&] {
    if (mc == 0) return ot1d::finite_barycenter(g, fam);
    // Monte Carlo demonstration path: resample the family as a law over its
    // components and run the population estimator on the quantile grid.
    auto draw = [fam](ot1d::RngStream& rng) {
      const double u = rng.next_double();
      double acc = 0.0;
      for (std::size_t i = 0; i < fam.size(); ++i) {
        acc += fam.weights()[i];
        if (u < acc || i + 1 == fam.size()) return fam.measures()[i];
      }
      return fam.measures().back();
    };
    const auto dist = ot1d::MeasureDistribution::sampler("family-resample", draw);
    return ot1d::population_barycenter(g, dist, make_grid(grid_n), mc, seed).measure;
  }();

  if (!emit_quantiles.empty()) {
    const std::vector<double> grid = make_grid(grid_n);
    std::vector<double> psi(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) psi[i] = result.quantile(grid[i]);
    std::ofstream f(emit_quantiles);
    if (!f) throw std::invalid_argument("cannot open quantile file '" + emit_quantiles + "'");
    f << ot1d::quantiles_to_csv(grid, psi);
  }
  write_output(ot1d::measure_to_json(result).dump() + "\n", out_path);
  return 0;
}

ot1d::ScalarSampler sampler_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family") || !j["family"].is_string()) {
    throw std::invalid_argument("sampler spec must be an object with a \"family\" field");
  }
  const std::string family = j["family"].get<std::string>();
  const auto num = [&j](const char* field) {
    if (!j.contains(field) || !j[field].is_number()) {
      throw std::invalid_argument(std::string("sampler spec: missing numeric field \"") + field +
                                  "\"");
    }
    return j[field].get<double>();
  };
  if (family == "bernoulli") return ot1d::ScalarSampler::bernoulli(num("p"));
  if (family == "uniform") return ot1d::ScalarSampler::uniform(num("a"), num("b"));
  if (family == "twopoint") return ot1d::ScalarSampler::two_point(num("a"), num("b"));
  if (family == "gaussian") return ot1d::ScalarSampler::gaussian(num("mean"), num("sd"));
  if (family == "constant") return ot1d::ScalarSampler::constant(num("c"));
  throw std::invalid_argument("unknown sampler family \"" + family + "\"");
}

// Mean of the sampler's law, available in closed form for every built-in
// family; it is the target of the quadratic-cost experiment.
double sampler_mean(const json& j) {
  const std::string family = j["family"].get<std::string>();
  if (family == "bernoulli") return j["p"].get<double>();
  if (family == "uniform" || family == "twopoint") {
    return 0.5 * (j["a"].get<double>() + j["b"].get<double>());
  }
  if (family == "gaussian") return j["mean"].get<double>();
  if (family == "constant") return j["c"].get<double>();
  throw std::invalid_argument("no closed-form mean for sampler family");
}

std::vector<std::size_t> ladder_from_config(const json& cfg) {
  if (!cfg.contains("n_values")) return ot1d::default_n_ladder();
  std::vector<std::size_t> ladder;
  for (const auto& v : cfg["n_values"]) {
    if (!v.is_number_unsigned() || v.get<std::uint64_t>() == 0) {
      throw std::invalid_argument("config: n_values must be positive integers");
    }
    ladder.push_back(v.get<std::size_t>());
  }
  return ladder;
}

int run_lln_scalar(const json& cfg, std::uint64_t seed, const std::string& out_path) {
  const ot1d::CostFunction g = ot1d::parse_cost_spec(cfg.value("cost", "quadratic"));
  const json sampler_cfg = cfg.at("sampler");
  const ot1d::ScalarSampler sampler = sampler_from_json(sampler_cfg);
  double target = 0.0;
  std::string target_kind;
  if (cfg.contains("target")) {
    target = cfg["target"].get<double>();
    target_kind = "config x*=" + ot1d::format_double(target);
  } else if (g.kind() == ot1d::CostFunction::Kind::Quadratic) {
    target = sampler_mean(sampler_cfg);
    target_kind = "analytic x*=" + ot1d::format_double(target);
  } else {
    throw std::invalid_argument(
        "config: non-quadratic costs need an explicit \"target\" minimizer");
  }
  const auto report =
      ot1d::scalar_lln_experiment(g, sampler, ladder_from_config(cfg), seed, target, target_kind);
  write_output(report.to_csv(), out_path);
  return 0;
}

int run_lln_barycenter(const json& cfg, std::uint64_t seed, const std::string& out_path) {
  const ot1d::CostFunction g = ot1d::parse_cost_spec(cfg.value("cost", "quadratic"));
  const json family_cfg = cfg.at("family");
  const std::string kind = family_cfg.at("kind").get<std::string>();
  const ot1d::ScalarSampler shift = sampler_from_json(family_cfg.at("shift"));
  ot1d::MeasureDistribution dist = [&] {
    if (kind == "dirac") return ot1d::dirac_family(shift);
    if (kind == "translate") {
      const std::size_t base_points = family_cfg.value("base_points", std::size_t{64});
      const ot1d::DiscreteMeasure base =
          as_discrete(ot1d::parse_measure_json(family_cfg.at("base")), base_points);
      return ot1d::translate_family(base, shift);
    }
    throw std::invalid_argument("config: family kind must be \"dirac\" or \"translate\"");
  }();
  const std::vector<std::size_t> ladder = ladder_from_config(cfg);

  ot1d::DiscreteMeasure reference = ot1d::DiscreteMeasure::dirac(0.0);
  std::string reference_kind;
  if (cfg.contains("reference")) {
    const ot1d::QuantileCurve ref = ot1d::parse_measure_json(cfg["reference"]);
    reference = as_discrete(ref, cfg.value("grid", std::size_t{199}));
    reference_kind = "analytic (config reference)";
  } else {
    // No closed form provided: estimate the population barycenter with ten
    // times the experiment's largest sample size.
    const std::size_t budget = 10 * ladder.back();
    const std::vector<double> grid = make_grid(cfg.value("grid", std::size_t{199}));
    reference = ot1d::population_barycenter(g, dist, grid, budget, seed).measure;
    reference_kind = "numerical (10x budget)";
  }
  const auto report =
      ot1d::barycenter_lln_experiment(g, dist, ladder, seed, reference, reference_kind);
  write_output(report.to_csv(), out_path);
  return 0;
}

int run_lln_strongweak(const json& cfg, const std::string& out_path) {
  const ot1d::CostFunction g = ot1d::parse_cost_spec(cfg.value("cost", "quadratic"));
  const std::size_t count = cfg.value("count", std::size_t{20});
  std::vector<ot1d::DiscreteMeasure> sequence;
  const json seq_cfg = cfg.at("sequence");
  if (seq_cfg.is_string()) {
    const std::string name = seq_cfg.get<std::string>();
    if (name == "mass-escape") {
      sequence = ot1d::mass_escape_sequence(count);
    } else if (name == "shrinking-dirac") {
      sequence = ot1d::shrinking_dirac_sequence(count);
    } else {
      throw std::invalid_argument("config: unknown sequence \"" + name + "\"");
    }
  } else if (seq_cfg.is_array()) {
    for (const auto& m : seq_cfg) {
      const ot1d::QuantileCurve curve = ot1d::parse_measure_json(m);
      if (!curve.as_discrete()) {
        throw std::invalid_argument("config: sequence measures must be discrete");
      }
      sequence.push_back(*curve.as_discrete());
    }
  } else {
    throw std::invalid_argument("config: \"sequence\" must be a name or an array of measures");
  }
  const auto measure_or_dirac0 = [&cfg](const char* field) {
    if (!cfg.contains(field)) return ot1d::DiscreteMeasure::dirac(0.0);
    const ot1d::QuantileCurve curve = ot1d::parse_measure_json(cfg[field]);
    if (!curve.as_discrete()) {
      throw std::invalid_argument(std::string("config: \"") + field + "\" must be discrete");
    }
    return *curve.as_discrete();
  };
  const auto report = ot1d::strongweak_check(g, sequence, measure_or_dirac0("target"),
                                             measure_or_dirac0("witness"));
  write_output(report.to_csv(), out_path);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"one-dimensional optimal transport: costs, plans, barycenters, experiments"};
  app.require_subcommand(1);

  std::string cost_spec = "quadratic";
  std::string mu_path;
  std::string nu_path;
  std::vector<std::string> mu_paths;
  std::string weights_spec;
  std::string out_path;
  std::string emit_quantiles;
  std::string config_path;
  std::size_t grid_n = 199;
  std::size_t mc = 0;
  std::uint64_t seed = 0;

  auto* cost_cmd = app.add_subcommand("cost", "transportation cost J between two measures");
  cost_cmd->add_option("--cost", cost_spec, "cost spec: quadratic | power:<p> | skewquad:<c>")
      ->required();
  cost_cmd->add_option("--mu", mu_path, "source measure file")->required();
  cost_cmd->add_option("--nu", nu_path, "target measure file")->required();

  auto* plan_cmd = app.add_subcommand("plan", "monotone optimal plan as CSV x,y,mass");
  plan_cmd->add_option("--mu", mu_path, "source measure file")->required();
  plan_cmd->add_option("--nu", nu_path, "target measure file")->required();
  plan_cmd->add_option("--out", out_path, "output file (default: stdout)");

  auto* bary_cmd = app.add_subcommand("barycenter", "weighted Fréchet barycenter as JSON");
  bary_cmd->add_option("--cost", cost_spec, "cost spec")->required();
  bary_cmd->add_option("--weights", weights_spec, "comma-separated weights")->required();
  bary_cmd->add_option("--mu", mu_paths, "measure file (repeatable)")->required();
  bary_cmd->add_option("--grid", grid_n, "quantile grid size for analytic inputs (default 199)");
  bary_cmd->add_option("--mc", mc, "Monte Carlo resampling budget (0 = exact)");
  bary_cmd->add_option("--seed", seed, "random seed (default 0)");
  bary_cmd->add_option("--emit-quantiles", emit_quantiles, "write CSV p,psi to this file");
  bary_cmd->add_option("--out", out_path, "output file (default: stdout)");

  auto* lln_cmd = app.add_subcommand("lln", "seeded convergence experiments");
  lln_cmd->require_subcommand(1);
  auto* lln_scalar = lln_cmd->add_subcommand("scalar", "scalar Fréchet-mean law of large numbers");
  auto* lln_bary = lln_cmd->add_subcommand("barycenter", "empirical barycenter convergence");
  auto* lln_sw = lln_cmd->add_subcommand("strongweak", "weak vs transportation-cost convergence");
  for (auto* sub : {lln_scalar, lln_bary, lln_sw}) {
    sub->add_option("--config", config_path, "experiment config JSON")->required();
    sub->add_option("--seed", seed, "random seed (default 0)");
    sub->add_option("--out", out_path, "output CSV file (default: stdout)");
  }

  auto* check_cmd = app.add_subcommand("check", "run the built-in invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cost_cmd->parsed()) return run_cost(cost_spec, mu_path, nu_path);
    if (plan_cmd->parsed()) return run_plan(mu_path, nu_path, out_path);
    if (bary_cmd->parsed()) {
      return run_barycenter(cost_spec, weights_spec, mu_paths, grid_n, mc, seed, emit_quantiles,
                            out_path);
    }
    if (lln_cmd->parsed()) {
      const json cfg = load_json_file(config_path);
      json echo = {{"subcommand", "lln"}, {"config", cfg}, {"seed", seed}, {"out", out_path}};
      if (lln_scalar->parsed()) {
        echo["mode"] = "scalar";
        echo_config(echo);
        return run_lln_scalar(cfg, seed, out_path);
      }
      if (lln_bary->parsed()) {
        echo["mode"] = "barycenter";
        echo_config(echo);
        return run_lln_barycenter(cfg, seed, out_path);
      }
      echo["mode"] = "strongweak";
      echo_config(echo);
      return run_lln_strongweak(cfg, out_path);
    }
    if (check_cmd->parsed()) {
      echo_config(json{{"subcommand", "check"}});
      return ot1d::run_self_check(std::cout) ? 0 : 1;
    }
  } catch (const ot1d::ComputationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::logic_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

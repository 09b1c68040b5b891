#pragma once

// Command-line front end: measure, share, regress, heatmap, simulate.
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric rejection.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "factor_risk/factor_risk.hpp"

namespace factor_risk::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MeasureSpec {
  const char* name;
  const char* params;  // required levels, for usage messages
};

inline const std::vector<MeasureSpec>& measure_specs() {
  static const std::vector<MeasureSpec> specs = {
      {"covar", "--alpha, --q"},     {"covar-eq", "--alpha, --q"},       {"coes", "--alpha, --q"},
      {"mes", "--alpha"},            {"var-var", "--p, --q"},            {"esssup-var", "--p"},
      {"mean-var", "--p"},           {"dist-var", "--p [--lambda]"},     {"mean-es", "--p"},
      {"es-box", "--p, --alpha, --beta"}, {"es-es", "--p, --q"},         {"esssup-es", "--p"},
      {"linear", "[--weighting]"},   {"choquet-custom", "--owa"},
  };
  return specs;
}

namespace detail {

inline nlohmann::json number(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

inline double to_double(const std::string& s, const std::string& what) {
  double v = 0.0;
  if (!factor_risk::detail::parse_double(factor_risk::detail::trim(s), v))
    throw UsageError(what + ": not a number ('" + s + "')");
  return v;
}

inline std::vector<double> to_doubles(const std::string& s, const std::string& what) {
  std::vector<double> out;
  for (const auto& part : split(s, ',')) out.push_back(to_double(part, what));
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

// identity | var:Q | es:Q | pl:u1:l1;u2:l2;...
inline DistortionFunction parse_lambda(const std::string& s) {
  if (s.empty() || s == "identity") return DistortionFunction::identity();
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw UsageError("--lambda: expected identity, var:Q, es:Q or pl:u:l;u:l;...");
  const std::string kind = s.substr(0, colon), rest = s.substr(colon + 1);
  if (kind == "var") return DistortionFunction::var_level(to_double(rest, "--lambda"));
  if (kind == "es") return DistortionFunction::es_level(to_double(rest, "--lambda"));
  if (kind == "pl") {
    std::vector<std::pair<double, double>> knots;
    for (const auto& knot : split(rest, ';')) {
      const auto parts = split(knot, ':');
      if (parts.size() != 2) throw UsageError("--lambda: knot '" + knot + "' is not u:l");
      knots.emplace_back(to_double(parts[0], "--lambda"), to_double(parts[1], "--lambda"));
    }
    return DistortionFunction::piecewise_linear(std::move(knots));
  }
  throw UsageError("--lambda: unknown distortion '" + kind + "'");
}

inline std::vector<double> broadcast(const std::vector<double>& v, std::size_t dim, const std::string& what) {
  if (v.size() == dim) return v;
  if (v.size() == 1) return std::vector<double>(dim, v.front());
  throw UsageError(what + ": expected 1 or " + std::to_string(dim) + " values");
}

// ordered weighted average of the survival vector sorted in decreasing order
inline ScenarioDistortion owa_distortion(std::vector<double> owa, std::span<const double> pi, std::uint64_t seed) {
  for (double w : owa)
    if (!(w >= 0.0)) throw DomainError("--owa: weights must be nonnegative");
  double total = 0.0;
  for (double w : owa) total += w;
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("--owa: weights must sum to one");
  auto fn = [owa](std::span<const double> v, std::span<const double>) {
    if (v.size() != owa.size()) throw DomainError("--owa: one weight per scenario required");
    std::vector<double> sorted(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double acc = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) acc += owa[i] * sorted[i];
    return acc;
  };
  if (owa.size() != pi.size())
    throw DomainError("--owa: got " + std::to_string(owa.size()) + " weights for " + std::to_string(pi.size()) +
                      " scenarios");
  return ScenarioDistortion::custom(fn, pi, 1000, seed);
}

inline void emit(const std::string& text, const std::string& output, std::ostream& out) {
  if (output.empty() || output == "-") {
    out << text;
    return;
  }
  std::ofstream file(output);
  if (!file) throw DataError("cannot write '" + output + "'");
  file << text;
}

struct DataOptions {
  std::string data;
  std::string target;
  std::vector<std::string> factors;
  std::vector<std::string> skip;
};

inline void add_data_options(CLI::App* cmd, DataOptions& d, bool need_factors = true) {
  cmd->add_option("--data", d.data, "headered CSV file")->required();
  cmd->add_option("--target", d.target, "loss column")->required();
  auto* f = cmd->add_option("--factors", d.factors, "factor columns")->delimiter(',');
  if (need_factors) f->required();
  cmd->add_option("--skip", d.skip, "columns not parsed (e.g. a date)")->delimiter(',');
}

inline ScenarioPartition make_partition(const JointSample& sample, std::size_t bins) {
  return bins == 0 ? partition_discrete(sample) : partition_quantile_boxes(sample, bins);
}

struct MeasureArgs {
  DataOptions data;
  std::string measure;
  std::optional<double> p, q;
  std::vector<double> alpha, beta, owa;
  std::size_t bins = 0;
  std::uint64_t seed = kDefaultSeed;
  std::string weighting = "physical";
  std::string lambda = "identity";
  std::string output, format = "json";
};

inline int run_measure(const MeasureArgs& a, std::ostream& out) {
  const auto& specs = measure_specs();
  const auto it = std::find_if(specs.begin(), specs.end(), [&](const auto& s) { return a.measure == s.name; });
  if (it == specs.end()) {
    std::string names;
    for (const auto& s : specs) names += std::string(names.empty() ? "" : ", ") + s.name;
    throw UsageError("unknown measure '" + a.measure + "'; expected one of " + names);
  }
  const std::string m = a.measure;
  auto uses = [&](std::initializer_list<const char*> names) {
    return std::any_of(names.begin(), names.end(), [&](const char* n) { return m == n; });
  };
  const bool ok = (a.p || !uses({"var-var", "esssup-var", "mean-var", "dist-var", "mean-es", "es-box", "es-es",
                                 "esssup-es"})) &&
                  (a.q || !uses({"covar", "covar-eq", "coes", "var-var", "es-es"})) &&
                  (!a.alpha.empty() || !uses({"covar", "covar-eq", "coes", "mes", "es-box"})) &&
                  (!a.beta.empty() || m != "es-box") && (!a.owa.empty() || m != "choquet-custom");
  if (!ok) throw UsageError("measure " + m + " requires " + it->params);

  const CsvTable table = read_csv(a.data.data, a.data.skip);
  const JointSample sample = make_sample(table, a.data.target, a.data.factors);
  const std::size_t dim = sample.factor_dim();
  std::vector<std::string> warnings;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::size_t> scenarios;
  double value = 0.0;

  auto family = [&]() {
    const ScenarioPartition part = make_partition(sample, a.bins);
    scenarios = part.size();
    if (a.bins == 0 && part.size() * 2 > sample.size())
      warnings.push_back("most factor values are distinct; consider --bins");
    if (a.bins > 0) params["bins"] = a.bins;
    return from_sample(sample, part);
  };

  if (m == "covar" || m == "covar-eq" || m == "coes" || m == "mes") {
    const auto alpha = broadcast(a.alpha, dim, "--alpha");
    params["alpha"] = alpha;
    if (m == "mes") {
      value = mes(sample, alpha);
    } else {
      params["q"] = *a.q;
      if (m == "coes")
        value = coes(sample, alpha, *a.q);
      else
        value = covar(sample, alpha, *a.q, m == "covar" ? CoMode::tail : CoMode::equal);
    }
  } else if (m == "es-box") {
    const auto alpha = broadcast(a.alpha, dim, "--alpha"), beta = broadcast(a.beta, dim, "--beta");
    params["p"] = *a.p;
    params["alpha"] = alpha;
    params["beta"] = beta;
    value = es_on_event(sample, VarBox(alpha, beta), *a.p);
  } else if (m == "var-var" || m == "es-es") {
    params["p"] = *a.p;
    params["q"] = *a.q;
    const auto fam = family();
    value = m == "var-var" ? quantile_factor(fam, IncreasingSetPredicate::var_of_var(*a.p, *a.q))
                           : es_composition(fam, *a.p, OuterMeasure::expected_shortfall(*a.q));
  } else if (m == "esssup-var" || m == "esssup-es" || m == "mean-var" || m == "mean-es" || m == "dist-var") {
    params["p"] = *a.p;
    const auto fam = family();
    if (m == "esssup-var") {
      value = quantile_factor(fam, IncreasingSetPredicate::esssup_var(*a.p));
    } else if (m == "esssup-es") {
      value = es_composition(fam, *a.p, OuterMeasure::essential_sup());
    } else if (m == "mean-var") {
      value = choquet_factor(fam, ScenarioDistortion::mean_of_var(LevelMap::constant(*a.p)));
    } else if (m == "mean-es") {
      value = choquet_factor(fam, ScenarioDistortion::mean_of_es(LevelMap::constant(*a.p)));
    } else {
      params["lambda"] = a.lambda;
      value = choquet_factor(fam, ScenarioDistortion::lambda_of_var(parse_lambda(a.lambda), LevelMap::constant(*a.p)));
    }
  } else if (m == "linear") {
    params["weighting"] = a.weighting;
    const auto fam = family();
    const auto q = a.weighting == "physical" ? ScenarioWeighting::physical()
                                             : ScenarioWeighting::explicit_weights(to_doubles(a.weighting, "--weighting"));
    value = linear_factor(fam, q);
  } else {  // choquet-custom
    params["owa"] = a.owa;
    const auto fam = family();
    value = choquet_factor(fam, owa_distortion(a.owa, fam.weights(), a.seed));
  }

  std::ostringstream text;
  if (a.format == "csv") {
    text << "measure,value,nScenarios,nObservations\n"
         << m << ',' << factor_risk::detail::format_g9(value) << ','
         << (scenarios ? std::to_string(*scenarios) : std::string()) << ',' << sample.size() << '\n';
  } else {
    nlohmann::json report = {{"measure", m},
                             {"params", params},
                             {"value", number(value)},
                             {"nScenarios", scenarios ? nlohmann::json(*scenarios) : nlohmann::json(nullptr)},
                             {"nObservations", sample.size()},
                             {"warnings", warnings}};
    text << report.dump(2) << '\n';
  }
  emit(text.str(), a.output, out);
  return kOk;
}

// agent syntax: kind[:key=value,...]@col1+col2, kind in
// mean | mean-var | mean-es | var-var | dist-var
inline std::pair<std::function<ScenarioDistortion(std::span<const double>)>, std::vector<std::string>>
parse_agent(const std::string& spec) {
  const auto at = spec.find('@');
  if (at == std::string::npos || at + 1 == spec.size())
    throw UsageError("--agent '" + spec + "': expected kind[:key=value,...]@factor[+factor...]");
  const std::string head = spec.substr(0, at);
  const auto factors = split(spec.substr(at + 1), '+');
  const auto colon = head.find(':');
  const std::string kind = head.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) {
    for (const auto& item : split(head.substr(colon + 1), ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw UsageError("--agent '" + spec + "': parameter '" + item + "' is not key=value");
      kv[item.substr(0, eq)] = item.substr(eq + 1);
    }
  }
  auto level = [&](const std::string& key) {
    const auto f = kv.find(key);
    if (f == kv.end()) throw UsageError("--agent '" + spec + "': kind " + kind + " requires " + key + "=");
    return to_double(f->second, "--agent " + key);
  };
  std::function<ScenarioDistortion(std::span<const double>)> make;
  if (kind == "mean") {
    make = [](std::span<const double>) { return ScenarioDistortion::mean(); };
  } else if (kind == "mean-var") {
    const double p = level("p");
    make = [p](std::span<const double>) { return ScenarioDistortion::mean_of_var(LevelMap::constant(p)); };
  } else if (kind == "mean-es") {
    const double p = level("p");
    make = [p](std::span<const double>) { return ScenarioDistortion::mean_of_es(LevelMap::constant(p)); };
  } else if (kind == "var-var") {
    const double p = level("p"), q = level("q");
    make = [p, q](std::span<const double>) { return ScenarioDistortion::indicator_var_var(p, q); };
  } else if (kind == "dist-var") {
    const double p = level("p");
    const auto lambda = parse_lambda(kv.count("lambda") ? kv["lambda"] : "identity");
    make = [p, lambda](std::span<const double>) { return ScenarioDistortion::lambda_of_var(lambda, LevelMap::constant(p)); };
  } else {
    throw UsageError("--agent '" + spec + "': unknown kind '" + kind + "' (mean, mean-var, mean-es, var-var, dist-var)");
  }
  return {make, factors};
}

struct ShareArgs {
  DataOptions data;
  std::vector<std::string> agents;
  std::size_t bins = 0;
  std::string output;
};

inline int run_share(const ShareArgs& a, std::ostream& out) {
  if (a.agents.empty()) throw UsageError("share requires at least one --agent");
  const CsvTable table = read_csv(a.data.data, a.data.skip);
  std::vector<std::pair<double, double>> atoms;
  for (double x : table.column(a.data.target)) atoms.emplace_back(x, 1.0);
  const StepCdf x_law = StepCdf::from_masses(std::move(atoms));
  std::vector<SharingAgent> agents;
  nlohmann::json standalone = nlohmann::json::array();
  for (const auto& spec : a.agents) {
    const auto [make, factors] = parse_agent(spec);
    const JointSample sample = make_sample(table, a.data.target, factors);
    const auto fam = from_sample(sample, make_partition(sample, a.bins));
    agents.push_back({make(fam.weights()), fam});
    standalone.push_back({{"agent", spec}, {"value", choquet_factor(fam, agents.back().psi)}, {"nScenarios", fam.size()}});
  }
  const SharingResult result = inf_convolution(x_law, agents);
  const auto bp = result.allocation.breakpoints();
  nlohmann::json report = {{"measure", "inf-convolution"},
                           {"value", result.value},
                           {"standalone", standalone},
                           {"allocation",
                            {{"breakpoints", std::vector<double>(bp.begin(), bp.end())},
                             {"slopes", result.allocation.slopes()}}},
                           {"nObservations", table.rows()},
                           {"warnings", nlohmann::json::array()}};
  emit(report.dump(2) + "\n", a.output, out);
  return kOk;
}

struct RegressArgs {
  DataOptions data;
  std::string output, format = "text";
};

inline int run_regress(const RegressArgs& a, std::ostream& out) {
  const CsvTable table = read_csv(a.data.data, a.data.skip);
  const RegressionFit fit = ols_fit(make_sample(table, a.data.target, a.data.factors), a.data.factors);
  if (a.format == "csv") {
    emit(format_regression_csv(fit), a.output, out);
  } else {
    std::ostringstream text;
    text << format_regression_table(fit) << "sigma = " << factor_risk::detail::format_g9(fit.sigma)
         << ", n = " << table.rows() << ", dof = " << fit.dof << '\n';
    emit(text.str(), a.output, out);
  }
  return kOk;
}

struct HeatmapArgs {
  DataOptions data;
  std::vector<double> p, q;
  std::string plain = "model";
  std::size_t draws = 1'000'000;
  std::uint64_t seed = kDefaultSeed;
  bool serial = false;
  std::string output;
};

inline int run_heatmap(const HeatmapArgs& a, std::ostream& out) {
  const CsvTable table = read_csv(a.data.data, a.data.skip);
  const JointSample sample = make_sample(table, a.data.target, a.data.factors);
  const RegressionFit fit = ols_fit(sample, a.data.factors);
  DiffOptions options;
  options.plain = a.plain == "empirical" ? PlainVarMode::empirical : PlainVarMode::model;
  options.draws = a.draws;
  options.seed = a.seed;
  options.parallel = !a.serial;
  std::ostringstream text;
  write_grid(text, diff_grid(fit, sample, a.p, a.q, options));
  emit(text.str(), a.output, out);
  return kOk;
}

struct SimulateArgs {
  std::size_t n = 1000;
  std::uint64_t seed = kDefaultSeed;
  double beta0 = 0.0, sigma = 1.0;
  std::vector<double> beta{1.0};
  std::string kind = "gaussian";
  std::size_t values = 50;
  std::vector<double> mean, cov;
  std::string output;
};

inline int run_simulate(const SimulateArgs& a, std::ostream& out) {
  const std::size_t dim = a.beta.size();
  FactorSpec spec;
  if (a.kind == "discrete") {
    if (dim != 1) throw UsageError("simulate --kind discrete supports one factor");
    if (a.values < 2) throw UsageError("--values must be at least 2");
    DiscreteFactors d;
    for (std::size_t k = 0; k < a.values; ++k)
      d.values.push_back({-1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(a.values - 1)});
    spec = d;
  } else {
    GaussianFactors g;
    g.mean = a.mean.empty() ? std::vector<double>(dim, 0.0) : a.mean;
    if (a.cov.empty()) {
      g.cov.assign(dim, std::vector<double>(dim, 0.0));
      for (std::size_t j = 0; j < dim; ++j) g.cov[j][j] = 1.0;
    } else {
      if (a.cov.size() != dim * dim) throw UsageError("--cov: expected " + std::to_string(dim * dim) + " values");
      for (std::size_t i = 0; i < dim; ++i) g.cov.emplace_back(a.cov.begin() + i * dim, a.cov.begin() + (i + 1) * dim);
    }
    spec = g;
  }
  const JointSample s = simulate(a.beta0, a.beta, a.sigma, spec, a.n, a.seed);
  std::ostringstream text;
  text << "X";
  for (std::size_t j = 0; j < dim; ++j) text << ",W" << j + 1;
  text << '\n';
  for (std::size_t t = 0; t < s.size(); ++t) {
    text << factor_risk::detail::format_g9(s.loss(t));
    for (std::size_t j = 0; j < dim; ++j) text << ',' << factor_risk::detail::format_g9(s.factor(t, j));
    text << '\n';
  }
  emit(text.str(), a.output, out);
  return kOk;
}

}  // namespace detail

/// Parses argv, dispatches, and maps exceptions to exit codes.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Factor risk measures on tabular data"};
  app.require_subcommand(1);

  detail::MeasureArgs m;
  auto* measure = app.add_subcommand("measure", "evaluate one factor risk measure");
  detail::add_data_options(measure, m.data);
  measure->add_option("--measure", m.measure, "measure name")->required();
  measure->add_option("--p", m.p, "inner level");
  measure->add_option("--q", m.q, "outer level");
  measure->add_option("--alpha", m.alpha, "factor levels, one per factor or one for all")->delimiter(',');
  measure->add_option("--beta", m.beta, "upper factor levels for es-box")->delimiter(',');
  measure->add_option("--bins", m.bins, "quantile bins per factor (0: group by distinct value)");
  measure->add_option("--weighting", m.weighting, "physical or comma-separated scenario weights");
  measure->add_option("--lambda", m.lambda, "identity | var:Q | es:Q | pl:u:l;u:l;...");
  measure->add_option("--owa", m.owa, "ordered weights for choquet-custom")->delimiter(',');
  measure->add_option("--seed", m.seed, "seed for the choquet-custom monotonicity spot check");
  measure->add_option("--output", m.output, "output file (default stdout)");
  measure->add_option("--format", m.format)->check(CLI::IsMember({"json", "csv"}));

  detail::ShareArgs s;
  auto* share = app.add_subcommand("share", "optimal comonotonic risk sharing");
  detail::add_data_options(share, s.data, false);
  share->add_option("--agent", s.agents, "kind[:key=value,...]@factor[+factor]")->required();
  share->add_option("--bins", s.bins, "quantile bins per factor (0: group by distinct value)");
  share->add_option("--output", s.output, "output file (default stdout)");

  detail::RegressArgs r;
  auto* regress = app.add_subcommand("regress", "OLS factor regression table");
  detail::add_data_options(regress, r.data);
  regress->add_option("--output", r.output, "output file (default stdout)");
  regress->add_option("--format", r.format)->check(CLI::IsMember({"text", "csv"}));

  detail::HeatmapArgs h;
  auto* heatmap = app.add_subcommand("heatmap", "Diff grid as long-format CSV");
  detail::add_data_options(heatmap, h.data);
  heatmap->add_option("--p", h.p, "p levels")->delimiter(',')->required();
  heatmap->add_option("--q", h.q, "q levels")->delimiter(',')->required();
  heatmap->add_option("--plain-var", h.plain)->check(CLI::IsMember({"model", "empirical"}));
  heatmap->add_option("--draws", h.draws, "Monte Carlo draws for model plain VaR");
  heatmap->add_option("--seed", h.seed, "master seed");
  heatmap->add_flag("--serial", h.serial, "evaluate rows on one thread");
  heatmap->add_option("--output", h.output, "output file (default stdout)");

  detail::SimulateArgs g;
  auto* sim = app.add_subcommand("simulate", "simulate X = beta0 + beta W + sigma eps");
  sim->add_option("--n", g.n, "rows");
  sim->add_option("--seed", g.seed, "seed");
  sim->add_option("--beta0", g.beta0);
  sim->add_option("--beta", g.beta)->delimiter(',');
  sim->add_option("--sigma", g.sigma);
  sim->add_option("--kind", g.kind)->check(CLI::IsMember({"gaussian", "discrete"}));
  sim->add_option("--values", g.values, "number of equally spaced factor values in [-1,1] (discrete)");
  sim->add_option("--mean", g.mean)->delimiter(',');
  sim->add_option("--cov", g.cov, "row-major covariance")->delimiter(',');
  sim->add_option("--output", g.output, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*measure) return detail::run_measure(m, out);
    if (*share) return detail::run_share(s, out);
    if (*regress) return detail::run_regress(r, out);
    if (*heatmap) return detail::run_heatmap(h, out);
    return detail::run_simulate(g, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kNumeric;
  }
}

}  // namespace factor_risk::cli

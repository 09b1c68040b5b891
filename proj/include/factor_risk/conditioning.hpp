#pragma once

// Scenario construction for the factor space: exact group-by on discrete
// factors, quantile boxes for continuous ones, and the quantile-box events
// {VaR_alpha(W) <= W <= VaR_beta(W)} used by CoVaR-type measures.

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "factor_risk/core.hpp"
#include "factor_risk/scalar_risk.hpp"

namespace factor_risk {

/// Index pair (alpha, beta) of the event VaR_alpha(W) <= W <= VaR_beta(W).
struct VarBox {
  std::vector<double> alpha;
  std::vector<double> beta;

  VarBox(std::vector<double> lower, std::vector<double> upper) : alpha(std::move(lower)), beta(std::move(upper)) {
    if (alpha.empty() || alpha.size() != beta.size())
      throw DomainError("VarBox: alpha and beta must be nonempty and of equal length");
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (!(alpha[j] > 0.0 && alpha[j] < 1.0)) throw DomainError("VarBox: alpha must lie in (0,1)");
      if (!(beta[j] > 0.0 && beta[j] <= 1.0)) throw DomainError("VarBox: beta must lie in (0,1]");
      if (alpha[j] > beta[j]) throw DomainError("VarBox: alpha must not exceed beta");
    }
  }

  /// The upper tail event W >= VaR_alpha(W).
  static VarBox tail(std::vector<double> alpha) {
    std::vector<double> ones(alpha.size(), 1.0);
    return VarBox(std::move(alpha), std::move(ones));
  }
};

/// Scenario-dependent level g_i (or one constant level for all scenarios).
class LevelMap {
 public:
  static LevelMap constant(double level) {
    check(level);
    LevelMap m;
    m.constant_ = level;
    return m;
  }

  static LevelMap per_scenario(std::vector<double> levels) {
    if (levels.empty()) throw DomainError("LevelMap: no levels");
    for (double g : levels) check(g);
    LevelMap m;
    m.levels_ = std::move(levels);
    return m;
  }

  bool is_constant() const noexcept { return levels_.empty(); }

  double at(std::size_t scenario) const {
    if (is_constant()) return constant_;
    if (scenario >= levels_.size()) throw DomainError("LevelMap: scenario not covered");
    return levels_[scenario];
  }

  /// Throws unless every one of n scenarios has a level.
  void check_covers(std::size_t n) const {
    if (!is_constant() && levels_.size() != n)
      throw DomainError("LevelMap: number of levels does not match number of scenarios");
  }

  double max_level() const {
    return is_constant() ? constant_ : *std::max_element(levels_.begin(), levels_.end());
  }
  double min_level() const {
    return is_constant() ? constant_ : *std::min_element(levels_.begin(), levels_.end());
  }

 private:
  // [0,1) admits ES at level zero; VaR consumers additionally require > 0.
  static void check(double g) {
    if (!(g >= 0.0 && g < 1.0)) throw DomainError("LevelMap: levels must lie in [0,1)");
  }

  LevelMap() = default;

  double constant_ = 0.0;
  std::vector<double> levels_;
};

namespace detail {

inline StepCdf factor_column_law(const JointSample& sample, std::size_t j) {
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(sample.size());
  for (std::size_t t = 0; t < sample.size(); ++t) atoms.emplace_back(sample.factor(t, j), sample.weight(t));
  return StepCdf::from_masses(std::move(atoms));
}

}  // namespace detail

/// Componentwise weighted left quantiles VaR_{alpha_j}(W_j).
inline std::vector<double> factor_quantiles(const JointSample& sample, std::span<const double> levels) {
  if (levels.size() != sample.factor_dim())
    throw DomainError("factor_quantiles: one level per factor column required");
  std::vector<double> out(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) out[j] = var(detail::factor_column_law(sample, j), levels[j]);
  return out;
}

/// One scenario per distinct factor vector, in lexicographic order.
inline ScenarioPartition partition_discrete(const JointSample& sample) {
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    if (sample.weight(t) == 0.0) continue;
    const auto row = sample.factor_row(t);
    groups[std::vector<double>(row.begin(), row.end())].push_back(t);
  }
  std::vector<Scenario> scenarios;
  scenarios.reserve(groups.size());
  for (auto& [key, rows] : groups) {
    std::vector<double> ws;
    for (std::size_t t : rows) ws.push_back(sample.weight(t));
    Scenario s;
    s.label = "w=" + detail::format_vector(key);
    s.weight = detail::sorted_sum(std::move(ws));
    s.key = key;
    s.rows = std::move(rows);
    scenarios.push_back(std::move(s));
  }
  return ScenarioPartition(std::move(scenarios));
}

/// Splits each factor column at its empirical quantiles k/bins into
/// intervals [min, c_1], (c_1, c_2], ..., (c_{bins-1}, max]; scenarios are
/// the nonempty Cartesian boxes. Scenario keys are the bin indices.
inline ScenarioPartition partition_quantile_boxes(const JointSample& sample, std::size_t bins_per_factor) {
  if (bins_per_factor == 0) throw DomainError("partition_quantile_boxes: need at least one bin");
  const std::size_t dim = sample.factor_dim();
  std::vector<std::vector<double>> cuts(dim);
  for (std::size_t j = 0; j < dim; ++j) {
    const StepCdf law = detail::factor_column_law(sample, j);
    for (std::size_t k = 1; k < bins_per_factor; ++k)
      cuts[j].push_back(var(law, static_cast<double>(k) / static_cast<double>(bins_per_factor)));
  }
  std::map<std::vector<double>, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    if (sample.weight(t) == 0.0) continue;
    std::vector<double> idx(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      // number of cuts strictly below w: the row sits in (c_{b}, c_{b+1}]
      const auto b = std::lower_bound(cuts[j].begin(), cuts[j].end(), sample.factor(t, j)) - cuts[j].begin();
      idx[j] = static_cast<double>(b);
    }
    groups[idx].push_back(t);
  }
  std::vector<Scenario> scenarios;
  for (auto& [key, rows] : groups) {
    std::vector<double> ws;
    for (std::size_t t : rows) ws.push_back(sample.weight(t));
    Scenario s;
    s.label = "box" + detail::format_vector(key);
    s.weight = detail::sorted_sum(std::move(ws));
    s.key = key;
    s.rows = std::move(rows);
    scenarios.push_back(std::move(s));
  }
  return ScenarioPartition(std::move(scenarios));
}

/// Row indices of the closed box VaR_alpha(W) <= W <= VaR_beta(W).
inline std::vector<std::size_t> var_box_rows(const JointSample& sample, const VarBox& box) {
  if (box.alpha.size() != sample.factor_dim())
    throw DomainError("var_box_event: box dimension does not match the factor dimension");
  const auto lo = factor_quantiles(sample, box.alpha);
  const auto hi = factor_quantiles(sample, box.beta);
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    if (sample.weight(t) == 0.0) continue;
    bool inside = true;
    for (std::size_t j = 0; j < lo.size() && inside; ++j) {
      const double w = sample.factor(t, j);
      inside = lo[j] <= w && w <= hi[j];
    }
    if (inside) rows.push_back(t);
  }
  return rows;
}

/// Subsample on the box event, weights renormalized.
inline JointSample var_box_event(const JointSample& sample, const VarBox& box) {
  const auto rows = var_box_rows(sample, box);
  if (rows.empty()) throw EmptyEventError("var_box_event: the conditioning event has zero probability");
  return sample.subsample(rows);
}

/// Subsample on {W = VaR_alpha(W)} (componentwise). Rejected with
/// NullEventError when that factor value carries no mass.
inline JointSample equal_event(const JointSample& sample, std::span<const double> alpha) {
  for (double a : alpha)
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("equal_event: levels must lie in (0,1]");
  const auto target = factor_quantiles(sample, alpha);
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < sample.size(); ++t) {
    if (sample.weight(t) == 0.0) continue;
    const auto row = sample.factor_row(t);
    if (std::equal(row.begin(), row.end(), target.begin())) rows.push_back(t);
  }
  if (rows.empty())
    throw NullEventError("equal_event: the factor quantile value " + detail::format_vector(target) +
                         " carries no mass");
  return sample.subsample(rows);
}

/// Subsample on the union of the selected scenarios.
inline JointSample scenario_event(const JointSample& sample, const ScenarioPartition& partition,
                                  std::span<const std::size_t> scenarios) {
  std::vector<std::size_t> rows;
  for (std::size_t i : scenarios) {
    if (i >= partition.size()) throw DomainError("scenario_event: scenario index out of range");
    rows.insert(rows.end(), partition[i].rows.begin(), partition[i].rows.end());
  }
  std::sort(rows.begin(), rows.end());
  std::erase_if(rows, [&](std::size_t t) { return t >= sample.size() || sample.weight(t) == 0.0; });
  if (rows.empty()) throw EmptyEventError("scenario_event: the selected scenarios carry no weight");
  return sample.subsample(rows);
}

}  // namespace factor_risk

#pragma once

// Domain types shared by every factor risk measure: step CDFs, exact
// discrete joint laws of (X, W), weighted empirical samples, scenario
// partitions of the factor space and the conditional law family
// {(pi_i, F_{X|scenario i})} that all measures consume.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "factor_risk/errors.hpp"

namespace factor_risk {

/// Total probability must be within this distance of one.
inline constexpr double kProbabilityTolerance = 1e-12;
/// Masses below this (relative to the total) are treated as null.
inline constexpr double kMassFloor = 1e-15;
/// Slack used whenever a cumulative probability is compared with a level.
/// Cumulative sums of masses carry rounding noise; comparisons of the form
/// F(x) >= alpha are evaluated as F(x) >= alpha - kLevelTolerance.
inline constexpr double kLevelTolerance = 1e-12;

/// Rounds to 12 significant digits. Factor values go through this on
/// ingestion so that group-by on floating values is deterministic.
inline double canonical_round(double value) {
  if (value == 0.0) return 0.0;  // folds -0.0
  if (!std::isfinite(value)) return value;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", value);
  return std::strtod(buf, nullptr);
}

namespace detail {

/// Order-independent sum: the result depends only on the multiset of terms.
inline double sorted_sum(std::vector<double> terms) {
  std::sort(terms.begin(), terms.end());
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

inline bool lex_less(std::span<const double> a, std::span<const double> b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline std::string format_vector(std::span<const double> v) {
  std::string out = "(";
  char buf[40];
  for (std::size_t j = 0; j < v.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.12g", v[j]);
    if (j) out += ",";
    out += buf;
  }
  return out + ")";
}

}  // namespace detail

/// Right-continuous CDF of a finitely supported law.
class StepCdf {
 public:
  /// Validating constructor from support points and cumulative probabilities.
  StepCdf(std::vector<double> support, std::vector<double> cum)
      : support_(std::move(support)), cum_(std::move(cum)) {
    if (support_.empty() || support_.size() != cum_.size())
      throw DataError("StepCdf: support and cum must be nonempty and of equal length");
    for (std::size_t k = 0; k < support_.size(); ++k) {
      if (!std::isfinite(support_[k]) || !std::isfinite(cum_[k]))
        throw DataError("StepCdf: non-finite entry");
      if (k > 0 && !(support_[k] > support_[k - 1]))
        throw DataError("StepCdf: support must be strictly increasing");
      const double prev = k ? cum_[k - 1] : 0.0;
      if (!(cum_[k] > prev)) throw DataError("StepCdf: cum must be strictly increasing");
    }
    if (std::abs(cum_.back() - 1.0) > kProbabilityTolerance)
      throw DataError("StepCdf: total mass must be one");
    masses_.resize(cum_.size());
    for (std::size_t k = 0; k < cum_.size(); ++k) masses_[k] = cum_[k] - (k ? cum_[k - 1] : 0.0);
  }

  /// Builds the CDF of sum_k mass_k * delta_{x_k}. Equal points are merged,
  /// null masses dropped and the total normalized to one.
  static StepCdf from_masses(std::vector<std::pair<double, double>> atoms) {
    double total = 0.0;
    {
      std::vector<double> ms;
      ms.reserve(atoms.size());
      for (const auto& [x, m] : atoms) {
        if (!std::isfinite(x) || !std::isfinite(m) || m < 0.0)
          throw DataError("StepCdf: masses must be finite and nonnegative");
        ms.push_back(m);
      }
      total = detail::sorted_sum(std::move(ms));
    }
    if (!(total > 0.0)) throw DataError("StepCdf: total mass must be positive");
    std::sort(atoms.begin(), atoms.end());

    StepCdf out;
    for (const auto& [x, m] : atoms) {
      if (m == 0.0) continue;
      if (!out.support_.empty() && out.support_.back() == x) {
        out.masses_.back() += m;
      } else {
        out.support_.push_back(x);
        out.masses_.push_back(m);
      }
    }
    // drop null masses, then normalize
    std::size_t kept = 0;
    for (std::size_t k = 0; k < out.support_.size(); ++k) {
      if (out.masses_[k] < kMassFloor * total) continue;
      out.support_[kept] = out.support_[k];
      out.masses_[kept] = out.masses_[k];
      ++kept;
    }
    out.support_.resize(kept);
    out.masses_.resize(kept);
    // extended-precision running sums keep cum within an ulp or so of the
    // exact partial sums even for very many atoms
    long double kept_total = 0.0L;
    for (double m : out.masses_) kept_total += m;
    out.cum_.resize(kept);
    long double running = 0.0L;
    for (std::size_t k = 0; k < kept; ++k) {
      running += out.masses_[k];
      out.masses_[k] = static_cast<double>(out.masses_[k] / kept_total);
      out.cum_[k] = static_cast<double>(running / kept_total);
    }
    out.cum_.back() = 1.0;
    return out;
  }

  static StepCdf point_mass(double x) { return StepCdf({x}, {1.0}); }

  /// F(x) = cum at the largest support point <= x, 0 below the first point.
  double operator()(double x) const {
    auto it = std::upper_bound(support_.begin(), support_.end(), x);
    if (it == support_.begin()) return 0.0;
    return cum_[static_cast<std::size_t>(it - support_.begin()) - 1];
  }

  std::span<const double> support() const noexcept { return support_; }
  std::span<const double> cum() const noexcept { return cum_; }
  std::span<const double> masses() const noexcept { return masses_; }
  std::size_t size() const noexcept { return support_.size(); }
  double min() const noexcept { return support_.front(); }
  double max() const noexcept { return support_.back(); }

  double mean() const {
    double acc = 0.0;
    for (std::size_t k = 0; k < support_.size(); ++k) acc += support_[k] * masses_[k];
    return acc;
  }

  /// Law of f(X). f need not be monotone; images are re-sorted and merged.
  template <class F>
  StepCdf map(F&& f) const {
    std::vector<std::pair<double, double>> atoms;
    atoms.reserve(support_.size());
    for (std::size_t k = 0; k < support_.size(); ++k) atoms.emplace_back(f(support_[k]), masses_[k]);
    return from_masses(std::move(atoms));
  }

  friend bool operator==(const StepCdf& a, const StepCdf& b) {
    return a.support_ == b.support_ && a.cum_ == b.cum_;
  }

 private:
  StepCdf() = default;

  std::vector<double> support_;
  std::vector<double> cum_;
  std::vector<double> masses_;
};

class JointSample;
class ConditionalLawFamily;

/// One atom (x, w, p) of a discrete joint law of the loss and the factors.
struct Atom {
  double x = 0.0;
  std::vector<double> w;
  double p = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// Exact finitely supported joint law of (X, W), stored in canonical form:
/// factor values rounded to 12 significant digits, atoms sorted by (w, x)
/// with duplicates merged.
class DiscreteJointDistribution {
 public:
  explicit DiscreteJointDistribution(std::vector<Atom> atoms) {
    if (atoms.empty()) throw DataError("DiscreteJointDistribution: no atoms");
    const std::size_t dim = atoms.front().w.size();
    if (dim == 0) throw DataError("DiscreteJointDistribution: factor dimension must be >= 1");
    std::vector<double> ps;
    ps.reserve(atoms.size());
    for (auto& a : atoms) {
      if (a.w.size() != dim) throw DataError("DiscreteJointDistribution: ragged factor vectors");
      if (!(a.p > 0.0) || !std::isfinite(a.p))
        throw DataError("DiscreteJointDistribution: every atom needs p > 0");
      if (!std::isfinite(a.x)) throw DataError("DiscreteJointDistribution: non-finite loss");
      for (double& v : a.w) {
        if (!std::isfinite(v)) throw DataError("DiscreteJointDistribution: non-finite factor");
        v = canonical_round(v);
      }
      ps.push_back(a.p);
    }
    if (std::abs(detail::sorted_sum(std::move(ps)) - 1.0) > kProbabilityTolerance)
      throw DataError("DiscreteJointDistribution: probabilities must sum to one");

    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
      if (a.w != b.w) return detail::lex_less(a.w, b.w);
      if (a.x != b.x) return a.x < b.x;
      return a.p < b.p;
    });
    for (auto& a : atoms) {
      if (!atoms_.empty() && atoms_.back().w == a.w && atoms_.back().x == a.x) {
        atoms_.back().p += a.p;
      } else {
        atoms_.push_back(std::move(a));
      }
    }
    const auto before = atoms_.size();
    std::erase_if(atoms_, [](const Atom& a) { return a.p < kMassFloor; });
    if (atoms_.empty()) throw DataError("DiscreteJointDistribution: all atoms are null");
    if (atoms_.size() != before) {
      double total = 0.0;
      for (const auto& a : atoms_) total += a.p;
      for (auto& a : atoms_) a.p /= total;
    }
  }

  std::span<const Atom> atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  std::size_t factor_dim() const noexcept { return atoms_.front().w.size(); }

  /// Law of (f(X), W).
  template <class F>
  DiscreteJointDistribution map_loss(F&& f) const {
    std::vector<Atom> out(atoms_.begin(), atoms_.end());
    for (auto& a : out) a.x = f(a.x);
    return DiscreteJointDistribution(std::move(out));
  }

  /// The atoms as weighted sample rows.
  JointSample to_sample() const;

  friend bool operator==(const DiscreteJointDistribution&, const DiscreteJointDistribution&) = default;

 private:
  std::vector<Atom> atoms_;
};

/// Weighted empirical rows (loss, factor vector). Weights are normalized to
/// sum one on construction; factor values are canonically rounded.
class JointSample {
 public:
  JointSample(std::vector<double> loss, const std::vector<std::vector<double>>& factor_rows,
              std::optional<std::vector<double>> weights = std::nullopt)
      : loss_(std::move(loss)) {
    if (loss_.empty()) throw DataError("JointSample: need at least one row");
    if (factor_rows.size() != loss_.size())
      throw DataError("JointSample: factor matrix and loss column differ in length");
    dim_ = factor_rows.front().size();
    if (dim_ == 0) throw DataError("JointSample: need at least one factor column");
    factors_.reserve(loss_.size() * dim_);
    for (const auto& row : factor_rows) {
      if (row.size() != dim_) throw DataError("JointSample: ragged factor rows");
      for (double v : row) factors_.push_back(v);
    }
    init_weights(std::move(weights));
  }

  /// Flat row-major factor matrix of loss.size() rows.
  JointSample(std::vector<double> loss, std::vector<double> factors_row_major, std::size_t dim,
              std::optional<std::vector<double>> weights = std::nullopt)
      : loss_(std::move(loss)), factors_(std::move(factors_row_major)), dim_(dim) {
    if (loss_.empty()) throw DataError("JointSample: need at least one row");
    if (dim_ == 0) throw DataError("JointSample: need at least one factor column");
    if (factors_.size() != loss_.size() * dim_)
      throw DataError("JointSample: factor matrix and loss column differ in length");
    init_weights(std::move(weights));
  }

  std::size_t size() const noexcept { return loss_.size(); }
  std::size_t factor_dim() const noexcept { return dim_; }

  double loss(std::size_t t) const { return loss_[t]; }
  double weight(std::size_t t) const { return weights_[t]; }
  double factor(std::size_t t, std::size_t j) const { return factors_[t * dim_ + j]; }
  std::span<const double> factor_row(std::size_t t) const {
    return std::span<const double>(factors_).subspan(t * dim_, dim_);
  }
  std::span<const double> losses() const noexcept { return loss_; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> factor_matrix() const noexcept { return factors_; }

  std::vector<double> factor_column(std::size_t j) const {
    std::vector<double> col(size());
    for (std::size_t t = 0; t < size(); ++t) col[t] = factor(t, j);
    return col;
  }

  bool uniform_weights() const noexcept { return uniform_; }

  /// Rows with index in `rows`, weights renormalized over the subset.
  JointSample subsample(std::span<const std::size_t> rows) const {
    std::vector<double> loss, factors, weights;
    loss.reserve(rows.size());
    weights.reserve(rows.size());
    for (std::size_t t : rows) {
      if (t >= size()) throw DomainError("JointSample::subsample: row index out of range");
      loss.push_back(loss_[t]);
      weights.push_back(weights_[t]);
      for (double v : factor_row(t)) factors.push_back(v);
    }
    return JointSample(std::move(loss), std::move(factors), dim_, std::move(weights));
  }

  /// Same factors and weights, different loss column.
  JointSample with_loss(std::vector<double> loss) const {
    if (loss.size() != size()) throw DataError("JointSample::with_loss: length mismatch");
    JointSample out = *this;
    out.loss_ = std::move(loss);
    return out;
  }

 private:
  void init_weights(std::optional<std::vector<double>> weights) {
    for (double v : loss_)
      if (!std::isfinite(v)) throw DataError("JointSample: non-finite loss value");
    for (double& v : factors_) {
      if (!std::isfinite(v)) throw DataError("JointSample: non-finite factor value");
      v = canonical_round(v);
    }
    const std::size_t n = loss_.size();
    if (!weights) {
      weights_.assign(n, 1.0 / static_cast<double>(n));
      uniform_ = true;
      return;
    }
    if (weights->size() != n) throw DataError("JointSample: weights length mismatch");
    for (double w : *weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw DataError("JointSample: weights must be nonnegative");
    const double total = detail::sorted_sum(*weights);
    if (!(total > 0.0)) throw DataError("JointSample: weights must have positive sum");
    weights_ = std::move(*weights);
    for (double& w : weights_) w /= total;
    uniform_ = std::all_of(weights_.begin(), weights_.end(),
                           [&](double w) { return w == weights_.front(); });
  }

  std::vector<double> loss_;
  std::vector<double> factors_;
  std::size_t dim_ = 0;
  std::vector<double> weights_;
  bool uniform_ = false;
};

inline JointSample DiscreteJointDistribution::to_sample() const {
  std::vector<double> loss, factors, weights;
  for (const auto& a : atoms_) {
    loss.push_back(a.x);
    factors.insert(factors.end(), a.w.begin(), a.w.end());
    weights.push_back(a.p);
  }
  return JointSample(std::move(loss), std::move(factors), factor_dim(), std::move(weights));
}

/// One cell of a partition of the factor space.
struct Scenario {
  /// Factor value for discrete scenarios; per-factor bin indices for boxes.
  std::vector<double> key;
  std::string label;
  std::vector<std::size_t> rows;
  double weight = 0.0;
};

/// Disjoint scenarios covering every positive-weight row of a sample.
class ScenarioPartition {
 public:
  explicit ScenarioPartition(std::vector<Scenario> scenarios) : scenarios_(std::move(scenarios)) {
    if (scenarios_.empty()) throw DataError("ScenarioPartition: no scenarios");
    std::vector<double> ws;
    for (const auto& s : scenarios_) {
      if (!(s.weight > 0.0)) throw DataError("ScenarioPartition: every scenario needs positive weight");
      if (s.rows.empty()) throw DataError("ScenarioPartition: empty scenario");
      ws.push_back(s.weight);
    }
    if (std::abs(detail::sorted_sum(std::move(ws)) - 1.0) > kProbabilityTolerance)
      throw DataError("ScenarioPartition: scenario weights must sum to one");
  }

  std::size_t size() const noexcept { return scenarios_.size(); }
  const Scenario& operator[](std::size_t i) const { return scenarios_[i]; }
  std::span<const Scenario> scenarios() const noexcept { return scenarios_; }

  /// Checks indices, disjointness and coverage of the positive-weight rows.
  void validate_for(const JointSample& sample) const {
    std::vector<char> seen(sample.size(), 0);
    for (const auto& s : scenarios_) {
      for (std::size_t t : s.rows) {
        if (t >= sample.size()) throw DataError("ScenarioPartition: row index out of range");
        if (seen[t]) throw DataError("ScenarioPartition: scenarios overlap");
        seen[t] = 1;
      }
    }
    for (std::size_t t = 0; t < sample.size(); ++t)
      if (!seen[t] && sample.weight(t) > 0.0)
        throw DataError("ScenarioPartition: a positive-weight row is not covered");
  }

 private:
  std::vector<Scenario> scenarios_;
};

/// Scenario weight together with the conditional law of X in that scenario.
struct ConditionalLaw {
  double weight;
  StepCdf law;
};

/// Scenario weights pi_i and the conditional CDFs F_{X|scenario i}.
class ConditionalLawFamily {
 public:
  explicit ConditionalLawFamily(std::vector<ConditionalLaw> scenarios) : scenarios_(std::move(scenarios)) {
    if (scenarios_.empty()) throw DataError("ConditionalLawFamily: no scenarios");
    weights_.reserve(scenarios_.size());
    for (const auto& s : scenarios_) {
      if (!(s.weight > 0.0) || !std::isfinite(s.weight))
        throw DataError("ConditionalLawFamily: scenario weights must be positive");
      weights_.push_back(s.weight);
    }
    if (std::abs(detail::sorted_sum(weights_) - 1.0) > kProbabilityTolerance)
      throw DataError("ConditionalLawFamily: scenario weights must sum to one");
  }

  std::size_t size() const noexcept { return scenarios_.size(); }
  double weight(std::size_t i) const { return scenarios_[i].weight; }
  const StepCdf& law(std::size_t i) const { return scenarios_[i].law; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const ConditionalLaw> scenarios() const noexcept { return scenarios_; }

  /// Sorted union of all conditional supports.
  std::vector<double> merged_support() const {
    std::vector<double> pts;
    for (const auto& s : scenarios_) pts.insert(pts.end(), s.law.support().begin(), s.law.support().end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  /// cdf[i][k] = F_i(points[k]) for sorted points.
  std::vector<std::vector<double>> cdf_table(std::span<const double> points) const {
    std::vector<std::vector<double>> table(size(), std::vector<double>(points.size()));
    for (std::size_t i = 0; i < size(); ++i) {
      const auto sup = law(i).support();
      const auto cum = law(i).cum();
      std::size_t k = 0;
      double current = 0.0;
      for (std::size_t j = 0; j < points.size(); ++j) {
        while (k < sup.size() && sup[k] <= points[j]) current = cum[k++];
        table[i][j] = current;
      }
    }
    return table;
  }

  /// Mixture sum_i pi_i F_i, i.e. the law of X.
  StepCdf marginal() const {
    std::vector<std::pair<double, double>> atoms;
    for (const auto& s : scenarios_) {
      const auto sup = s.law.support();
      const auto m = s.law.masses();
      for (std::size_t k = 0; k < sup.size(); ++k) atoms.emplace_back(sup[k], s.weight * m[k]);
    }
    return StepCdf::from_masses(std::move(atoms));
  }

  /// Throws DataError unless sum_i pi_i F_i agrees with `x_law` at every
  /// support point of either side.
  void check_mixture(const StepCdf& x_law, double tol = 1e-10) const {
    std::vector<double> pts = merged_support();
    pts.insert(pts.end(), x_law.support().begin(), x_law.support().end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    const auto table = cdf_table(pts);
    for (std::size_t k = 0; k < pts.size(); ++k) {
      double mix = 0.0;
      for (std::size_t i = 0; i < size(); ++i) mix += weight(i) * table[i][k];
      if (std::abs(mix - x_law(pts[k])) > tol)
        throw DataError("ConditionalLawFamily: mixture of conditional laws does not reproduce the law of X");
    }
  }

  /// True when both families carry the same scenario weights.
  bool same_partition(const ConditionalLawFamily& other, double tol = 1e-12) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i)
      if (std::abs(weight(i) - other.weight(i)) > tol) return false;
    return true;
  }

  /// Family of f(X) against the same scenarios.
  template <class F>
  ConditionalLawFamily map_loss(F&& f) const {
    std::vector<ConditionalLaw> out;
    out.reserve(size());
    for (const auto& s : scenarios_) out.push_back({s.weight, s.law.map(f)});
    return ConditionalLawFamily(std::move(out));
  }

 private:
  std::vector<ConditionalLaw> scenarios_;
  std::vector<double> weights_;
};

/// Per-scenario weighted empirical CDFs. pi_i is the summed normalized
/// weight of the scenario's rows.
inline ConditionalLawFamily from_sample(const JointSample& sample, const ScenarioPartition& partition) {
  partition.validate_for(sample);
  std::vector<ConditionalLaw> out;
  out.reserve(partition.size());
  for (const auto& s : partition.scenarios()) {
    std::vector<std::pair<double, double>> atoms;
    std::vector<double> ws;
    for (std::size_t t : s.rows) {
      if (sample.weight(t) == 0.0) continue;
      atoms.emplace_back(sample.loss(t), sample.weight(t));
      ws.push_back(sample.weight(t));
    }
    const double pi = detail::sorted_sum(std::move(ws));
    if (!(pi > 0.0)) throw DataError("from_sample: scenario '" + s.label + "' has zero weight");
    out.push_back({pi, StepCdf::from_masses(std::move(atoms))});
  }
  return ConditionalLawFamily(std::move(out));
}

/// Conditional laws of X given each distinct factor value of `dist`.
inline ConditionalLawFamily conditional_family(const DiscreteJointDistribution& dist) {
  std::vector<ConditionalLaw> out;
  const auto atoms = dist.atoms();
  std::size_t begin = 0;
  while (begin < atoms.size()) {
    std::size_t end = begin;
    std::vector<std::pair<double, double>> law;
    std::vector<double> ps;
    while (end < atoms.size() && atoms[end].w == atoms[begin].w) {
      law.emplace_back(atoms[end].x, atoms[end].p);
      ps.push_back(atoms[end].p);
      ++end;
    }
    out.push_back({detail::sorted_sum(std::move(ps)), StepCdf::from_masses(std::move(law))});
    begin = end;
  }
  return ConditionalLawFamily(std::move(out));
}

/// CDF of X ignoring W.
inline StepCdf marginal(const DiscreteJointDistribution& dist) {
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(dist.size());
  for (const auto& a : dist.atoms()) atoms.emplace_back(a.x, a.p);
  return StepCdf::from_masses(std::move(atoms));
}

/// Weighted empirical CDF of the loss column.
inline StepCdf marginal(const JointSample& sample) {
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(sample.size());
  for (std::size_t t = 0; t < sample.size(); ++t) atoms.emplace_back(sample.loss(t), sample.weight(t));
  return StepCdf::from_masses(std::move(atoms));
}

}  // namespace factor_risk

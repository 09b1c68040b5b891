#pragma once

// Distortion factor risk measures on a finite scenario family. A scenario
// distortion psi maps the vector of conditional survival probabilities
// (1 - F_i(x))_i to [0,1]; the measure is the generalized Choquet integral
//
//   rho(X, W) = int_0^inf psi(1 - F_.(x)) dx + int_-inf^0 (psi(1 - F_.(x)) - 1) dx,
//
// which for step CDFs is the exact finite sum evaluated by choquet_factor.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "factor_risk/conditioning.hpp"
#include "factor_risk/core.hpp"
#include "factor_risk/scalar_risk.hpp"

namespace factor_risk {

/// Monotone psi: [0,1]^n -> [0,1] with psi(0) = 0 and psi(1) = 1, evaluated
/// on a survival vector together with the scenario weights.
class ScenarioDistortion {
 public:
  enum class Kind { mean, lambda_of_var, mean_of_var, mean_of_es, es_on_box, indicator_var_var, custom };

  using Evaluator = std::function<double(std::span<const double> survival, std::span<const double> weights)>;

  /// psi(v) = sum_i pi_i v_i; yields E[X].
  static ScenarioDistortion mean() { return ScenarioDistortion(Kind::mean); }

  /// psi(v) = Lambda(sum_i pi_i 1{v_i > 1 - g_i}); yields rho_Lambda(VaR_g(X|W)).
  static ScenarioDistortion lambda_of_var(DistortionFunction lambda, LevelMap g) {
    require_var_levels(g);
    ScenarioDistortion d(Kind::lambda_of_var);
    d.lambda_ = std::move(lambda);
    d.levels_ = std::move(g);
    return d;
  }

  /// psi(v) = sum_i pi_i 1{v_i > 1 - g_i}; yields E[VaR_g(X|W)].
  static ScenarioDistortion mean_of_var(LevelMap g) {
    require_var_levels(g);
    ScenarioDistortion d(Kind::mean_of_var);
    d.levels_ = std::move(g);
    return d;
  }

  /// psi(v) = sum_i pi_i min(v_i, 1 - g_i) / (1 - g_i); yields E[ES_g(X|W)].
  static ScenarioDistortion mean_of_es(LevelMap g) {
    ScenarioDistortion d(Kind::mean_of_es);
    d.levels_ = std::move(g);
    return d;
  }

  /// The same average restricted to the scenario subset B (renormalized);
  /// yields ES_p(X | W in B).
  static ScenarioDistortion es_on_box(double p, std::vector<std::size_t> subset) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("es_on_box: level must lie in [0,1)");
    if (subset.empty()) throw DomainError("es_on_box: empty scenario subset");
    std::sort(subset.begin(), subset.end());
    subset.erase(std::unique(subset.begin(), subset.end()), subset.end());
    ScenarioDistortion d(Kind::es_on_box);
    d.levels_ = LevelMap::constant(p);
    d.subset_ = std::move(subset);
    return d;
  }

  /// lambda_of_var with Lambda = var_level(q) and g = p; yields VaR_q(VaR_p(X|W)).
  static ScenarioDistortion indicator_var_var(double p, double q) {
    ScenarioDistortion d = lambda_of_var(DistortionFunction::var_level(q), LevelMap::constant(p));
    d.kind_ = Kind::indicator_var_var;
    return d;
  }

  /// User-supplied psi. Boundary values and monotonicity are spot-checked on
  /// `pairs` random ordered pairs in [0,1]^n; a failure throws DomainError.
  /// Passing the check is evidence, not proof, of monotonicity.
  static ScenarioDistortion custom(Evaluator fn, std::span<const double> weights, std::size_t pairs = 1000,
                                   std::uint64_t seed = 0x5eed) {
    if (!fn) throw DomainError("custom distortion: empty evaluator");
    const std::size_t n = weights.size();
    const std::vector<double> zeros(n, 0.0), ones(n, 1.0);
    if (std::abs(fn(zeros, weights)) > 1e-12 || std::abs(fn(ones, weights) - 1.0) > 1e-12)
      throw DomainError("custom distortion: psi(0) must be 0 and psi(1) must be 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> lo(n), hi(n);
    for (std::size_t trial = 0; trial < pairs; ++trial) {
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = unit(rng);
        hi[i] = lo[i] + unit(rng) * (1.0 - lo[i]);
      }
      if (fn(lo, weights) > fn(hi, weights) + 1e-12)
        throw DomainError("custom distortion: monotonicity violated at " + detail::format_vector(lo) + " <= " +
                          detail::format_vector(hi));
    }
    ScenarioDistortion d(Kind::custom);
    d.custom_ = std::move(fn);
    return d;
  }

  Kind kind() const noexcept { return kind_; }

  double operator()(std::span<const double> v, std::span<const double> pi) const {
    switch (kind_) {
      case Kind::mean: {
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) acc += pi[i] * v[i];
        return acc;
      }
      case Kind::lambda_of_var:
      case Kind::indicator_var_var:
        return lambda_(exceedance_weight(v, pi));
      case Kind::mean_of_var:
        return exceedance_weight(v, pi);
      case Kind::mean_of_es: {
        levels_.check_covers(v.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) {
          const double cap = 1.0 - levels_.at(i);
          acc += pi[i] * std::min(v[i], cap) / cap;
        }
        return acc;
      }
      case Kind::es_on_box: {
        const double cap = 1.0 - levels_.at(0);
        double acc = 0.0, mass = 0.0;
        for (std::size_t i : subset_) {
          if (i >= v.size()) throw DomainError("es_on_box: scenario index out of range");
          acc += pi[i] * std::min(v[i], cap) / cap;
          mass += pi[i];
        }
        return acc / mass;
      }
      case Kind::custom:
        return custom_(v, pi);
    }
    return 0.0;
  }

 private:
  explicit ScenarioDistortion(Kind kind) : kind_(kind), levels_(LevelMap::constant(0.0)) {}

  static void require_var_levels(const LevelMap& g) {
    if (!(g.min_level() > 0.0)) throw DomainError("VaR-type distortion: levels must lie in (0,1)");
  }

  // sum of pi_i over scenarios whose survival exceeds 1 - g_i, i.e. F_i(x) < g_i
  double exceedance_weight(std::span<const double> v, std::span<const double> pi) const {
    levels_.check_covers(v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] > 1.0 - levels_.at(i) + kLevelTolerance) acc += pi[i];
    return acc;
  }

  Kind kind_;
  DistortionFunction lambda_ = DistortionFunction::identity();
  LevelMap levels_;
  std::vector<std::size_t> subset_;
  Evaluator custom_;
};

/// Exact Choquet sum over the merged conditional support:
/// x_(1) + sum_k psi(s_k, pi) (x_(k+1) - x_(k)), s_k = (1 - F_i(x_(k)))_i.
inline double choquet_factor(const ConditionalLawFamily& family, const ScenarioDistortion& psi) {
  const auto pts = family.merged_support();
  const auto table = family.cdf_table(pts);
  const auto pi = family.weights();
  std::vector<double> survival(family.size());
  double acc = pts[0];
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    for (std::size_t i = 0; i < family.size(); ++i) survival[i] = 1.0 - table[i][k];
    acc += psi(survival, pi) * (pts[k + 1] - pts[k]);
  }
  return acc;
}

/// rho_Lambda applied to the discrete law {(VaR_{g_i}(X | scenario i), pi_i)}.
inline double compose_var_distortion(const ConditionalLawFamily& family, const LevelMap& g,
                                     const DistortionFunction& lambda) {
  g.check_covers(family.size());
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(family.size());
  for (std::size_t i = 0; i < family.size(); ++i) atoms.emplace_back(var(family.law(i), g.at(i)), family.weight(i));
  return distortion_rho(StepCdf::from_masses(std::move(atoms)), lambda);
}

/// sum_i pi_i ES_{g_i}(X | scenario i).
inline double compose_es_mean(const ConditionalLawFamily& family, const LevelMap& g) {
  g.check_covers(family.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < family.size(); ++i) acc += family.weight(i) * es(family.law(i), g.at(i));
  return acc;
}

/// ES_p(X | W in box).
inline double es_on_event(const JointSample& sample, const VarBox& box, double p) {
  return es(marginal(var_box_event(sample, box)), p);
}

/// ES_p(X | W in union of the selected scenarios).
inline double es_on_event(const JointSample& sample, const ScenarioPartition& partition,
                          std::span<const std::size_t> scenarios, double p) {
  return es(marginal(scenario_event(sample, partition, scenarios)), p);
}

/// Counterexample to condition A: g1 <= f1, f2 <= g2, f1 + f2 = g1 + g2 and
/// psi(f1) + psi(f2) < psi(g1) + psi(g2).
struct ConditionAWitness {
  std::vector<double> f1, f2, g1, g2;
  double lhs = 0.0;  // psi(f1) + psi(f2)
  double rhs = 0.0;  // psi(g1) + psi(g2)
};

struct ConditionAResult {
  bool passed = true;
  std::size_t trials_run = 0;
  std::optional<ConditionAWitness> witness;
};

/// Randomized falsifier for condition A. A pass is evidence of coherence,
/// not a certificate.
inline ConditionAResult condition_a_check(const ScenarioDistortion& psi, std::span<const double> pi,
                                          std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw DomainError("condition_a_check: need at least one trial");
  const std::size_t n = pi.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // mix continuous draws with dyadic grid points so that indicator-type
  // distortions get hit exactly on and around their thresholds
  auto draw = [&] {
    const double u = unit(rng);
    if (u < 0.15) return 0.0;
    if (u < 0.30) return 1.0;
    if (u < 0.60) return std::floor(unit(rng) * 9.0) / 8.0;
    return unit(rng);
  };
  ConditionAResult result;
  std::vector<double> f1(n), f2(n), g1(n), g2(n);
  for (std::size_t trial = 0; trial < trials; ++trial) {
    for (std::size_t i = 0; i < n; ++i) {
      double a = draw(), b = draw();
      if (a > b) std::swap(a, b);
      g1[i] = a;
      g2[i] = b;
      const double u = unit(rng);
      const double t = u < 0.2 ? 0.5 : unit(rng);
      f1[i] = a + t * (b - a);
      f2[i] = std::clamp(a + b - f1[i], a, b);
    }
    ++result.trials_run;
    const double lhs = psi(f1, pi) + psi(f2, pi);
    const double rhs = psi(g1, pi) + psi(g2, pi);
    if (lhs < rhs - 1e-12) {
      result.passed = false;
      result.witness = ConditionAWitness{f1, f2, g1, g2, lhs, rhs};
      return result;
    }
  }
  return result;
}

}  // namespace factor_risk

#pragma once

// Quantile factor risk measures: the first loss level x at which the profile
// of conditional CDFs (F_i(x))_i enters an upward-closed set D.

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "factor_risk/conditioning.hpp"
#include "factor_risk/core.hpp"
#include "factor_risk/scalar_risk.hpp"

namespace factor_risk {

/// Membership test for an increasing set D of CDF profiles u in [0,1]^n.
class IncreasingSetPredicate {
 public:
  enum class Kind { var_of_var, esssup_var, single_scenario, custom };

  using Evaluator = std::function<bool(std::span<const double> cdf_values, std::span<const double> weights)>;

  /// sum_{i : u_i >= p} pi_i >= q; yields VaR_q(VaR_p(X|W)).
  static IncreasingSetPredicate var_of_var(double p, double q) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("var_of_var: p must lie in (0,1]");
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("var_of_var: q must lie in (0,1]");
    return IncreasingSetPredicate(Kind::var_of_var, p, q, 0);
  }

  /// u_i >= p for every scenario; yields esssup VaR_p(X|W).
  static IncreasingSetPredicate esssup_var(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("esssup_var: p must lie in (0,1]");
    return IncreasingSetPredicate(Kind::esssup_var, p, 1.0, 0);
  }

  /// u_{i0} >= p; yields VaR_p(X | scenario i0).
  static IncreasingSetPredicate single_scenario(std::size_t scenario, double p) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("single_scenario: p must lie in (0,1]");
    return IncreasingSetPredicate(Kind::single_scenario, p, 1.0, scenario);
  }

  /// User predicate; upward closure and the boundary conditions are
  /// spot-checked on `pairs` random ordered pairs.
  static IncreasingSetPredicate custom(Evaluator fn, std::span<const double> weights, std::size_t pairs = 1000,
                                       std::uint64_t seed = 0x5eed) {
    if (!fn) throw DomainError("custom predicate: empty evaluator");
    const std::size_t n = weights.size();
    const std::vector<double> zeros(n, 0.0), ones(n, 1.0);
    if (!fn(ones, weights) || fn(zeros, weights))
      throw DomainError("custom predicate: must contain the all-ones profile and exclude all-zeros");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> lo(n), hi(n);
    for (std::size_t trial = 0; trial < pairs; ++trial) {
      for (std::size_t i = 0; i < n; ++i) {
        lo[i] = unit(rng);
        hi[i] = lo[i] + unit(rng) * (1.0 - lo[i]);
      }
      if (fn(lo, weights) && !fn(hi, weights))
        throw DomainError("custom predicate: not upward closed at " + detail::format_vector(lo));
    }
    IncreasingSetPredicate pred(Kind::custom, 0.0, 0.0, 0);
    pred.custom_ = std::move(fn);
    return pred;
  }

  Kind kind() const noexcept { return kind_; }
  double p() const noexcept { return p_; }
  double q() const noexcept { return q_; }

  bool operator()(std::span<const double> u, std::span<const double> pi) const {
    switch (kind_) {
      case Kind::var_of_var: {
        double mass = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i)
          if (u[i] >= p_ - kLevelTolerance) mass += pi[i];
        return mass >= q_ - kLevelTolerance;
      }
      case Kind::esssup_var:
        return std::all_of(u.begin(), u.end(), [&](double v) { return v >= p_ - kLevelTolerance; });
      case Kind::single_scenario:
        if (scenario_ >= u.size()) throw DomainError("single_scenario: scenario index out of range");
        return u[scenario_] >= p_ - kLevelTolerance;
      case Kind::custom:
        return custom_(u, pi);
    }
    return false;
  }

 private:
  IncreasingSetPredicate(Kind kind, double p, double q, std::size_t scenario)
      : kind_(kind), p_(p), q_(q), scenario_(scenario) {}

  Kind kind_;
  double p_;
  double q_;
  std::size_t scenario_;
  Evaluator custom_;
};

/// Smallest merged-support point x with pred((F_i(x))_i, pi). Right
/// continuity of the F_i makes the infimum a support point; the largest
/// support point always qualifies.
inline double quantile_factor(const ConditionalLawFamily& family, const IncreasingSetPredicate& pred) {
  const auto pts = family.merged_support();
  const auto table = family.cdf_table(pts);
  std::vector<double> u(family.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    for (std::size_t i = 0; i < family.size(); ++i) u[i] = table[i][k];
    if (pred(u, family.weights())) return pts[k];
  }
  return pts.back();
}

/// Which conditioning event CoVaR/CoES use.
enum class CoMode {
  tail,   ///< W >= VaR_alpha(W)
  box,    ///< VaR_alpha(W) <= W <= VaR_beta(W)
  equal,  ///< W = VaR_alpha(W); only defined when that value carries mass
};

namespace detail {

inline JointSample co_event(const JointSample& sample, std::span<const double> alpha,
                            std::span<const double> beta, CoMode mode) {
  const std::vector<double> a(alpha.begin(), alpha.end());
  switch (mode) {
    case CoMode::tail:
      return var_box_event(sample, VarBox::tail(a));
    case CoMode::box:
      return var_box_event(sample, VarBox(a, std::vector<double>(beta.begin(), beta.end())));
    case CoMode::equal:
      return equal_event(sample, alpha);
  }
  throw DomainError("unknown conditioning mode");
}

}  // namespace detail

/// CoVaR: VaR_level of X on the conditioning event. `beta` is only read in
/// box mode.
inline double covar(const JointSample& sample, std::span<const double> alpha, double level, CoMode mode = CoMode::tail,
                    std::span<const double> beta = {}) {
  return var(marginal(detail::co_event(sample, alpha, beta, mode)), level);
}

/// CoES: ES_level of X on the conditioning event.
inline double coes(const JointSample& sample, std::span<const double> alpha, double level, CoMode mode = CoMode::tail,
                   std::span<const double> beta = {}) {
  return es(marginal(detail::co_event(sample, alpha, beta, mode)), level);
}

}  // namespace factor_risk

#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "factor_risk/core.hpp"

namespace factor_risk {

/// Left quantile VaR_alpha = inf{x : F(x) >= alpha}; alpha = 1 is the
/// essential supremum.
inline double var(const StepCdf& cdf, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("var: level must lie in (0,1]");
  const auto cum = cdf.cum();
  for (std::size_t k = 0; k < cum.size(); ++k)
    if (cum[k] >= alpha - kLevelTolerance) return cdf.support()[k];
  return cdf.max();
}

/// Expected shortfall (1/(1-alpha)) * int_alpha^1 VaR_t dt, integrated
/// exactly over the step quantile function. An atom straddling alpha
/// contributes its mass above alpha.
inline double es(const StepCdf& cdf, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("es: level must lie in [0,1)");
  const auto sup = cdf.support();
  const auto cum = cdf.cum();
  double acc = 0.0;
  double lower = 0.0;
  for (std::size_t k = 0; k < sup.size(); ++k) {
    const double piece = cum[k] - std::max(lower, alpha);
    if (piece > 0.0) acc += piece * sup[k];
    lower = cum[k];
  }
  return acc / (1.0 - alpha);
}

inline double esssup(const StepCdf& cdf) { return cdf.max(); }

/// Nondecreasing Lambda: [0,1] -> [0,1] with Lambda(0) = 0 and Lambda(1) = 1.
class DistortionFunction {
 public:
  enum class Kind { identity, var_level, es_level, piecewise_linear };

  static DistortionFunction identity() { return DistortionFunction(Kind::identity, 0.0); }

  /// Lambda(u) = 1{u > 1 - p}; rho_Lambda is then VaR_p.
  static DistortionFunction var_level(double p) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("var_level: level must lie in (0,1]");
    return DistortionFunction(Kind::var_level, p);
  }

  /// Lambda(u) = min(u / (1 - p), 1); rho_Lambda is then ES_p.
  static DistortionFunction es_level(double p) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("es_level: level must lie in [0,1)");
    return DistortionFunction(Kind::es_level, p);
  }

  /// Linear interpolation between knots (u, Lambda(u)); the knots must start
  /// at (0,0), end at (1,1), and be nondecreasing in both coordinates.
  static DistortionFunction piecewise_linear(std::vector<std::pair<double, double>> knots) {
    if (knots.size() < 2) throw DomainError("piecewise_linear: need at least two knots");
    if (knots.front() != std::pair{0.0, 0.0} || knots.back() != std::pair{1.0, 1.0})
      throw DomainError("piecewise_linear: knots must start at (0,0) and end at (1,1)");
    for (std::size_t k = 1; k < knots.size(); ++k) {
      if (!(knots[k].first > knots[k - 1].first))
        throw DomainError("piecewise_linear: knot abscissae must be strictly increasing");
      if (knots[k].second < knots[k - 1].second)
        throw DomainError("piecewise_linear: distortion must be nondecreasing");
    }
    DistortionFunction d(Kind::piecewise_linear, 0.0);
    d.knots_ = std::move(knots);
    return d;
  }

  Kind kind() const noexcept { return kind_; }
  double level() const noexcept { return level_; }
  const std::vector<std::pair<double, double>>& knots() const noexcept { return knots_; }

  double operator()(double u) const {
    switch (kind_) {
      case Kind::identity:
        return std::clamp(u, 0.0, 1.0);
      case Kind::var_level:
        return u > 1.0 - level_ + kLevelTolerance ? 1.0 : 0.0;
      case Kind::es_level:
        return std::min(std::max(u, 0.0) / (1.0 - level_), 1.0);
      case Kind::piecewise_linear: {
        u = std::clamp(u, 0.0, 1.0);
        auto it = std::lower_bound(knots_.begin(), knots_.end(), u,
                                   [](const auto& knot, double v) { return knot.first < v; });
        if (it == knots_.begin()) return it->second;
        const auto& [u1, l1] = *it;
        const auto& [u0, l0] = *(it - 1);
        return l0 + (l1 - l0) * (u - u0) / (u1 - u0);
      }
    }
    return 0.0;
  }

 private:
  DistortionFunction(Kind kind, double level) : kind_(kind), level_(level) {}

  Kind kind_;
  double level_;
  std::vector<std::pair<double, double>> knots_;
};

/// Choquet integral of a step CDF:
/// x_(1) + sum_k Lambda(1 - F(x_(k))) (x_(k+1) - x_(k)).
inline double distortion_rho(const StepCdf& cdf, const DistortionFunction& lambda) {
  const auto sup = cdf.support();
  const auto cum = cdf.cum();
  double acc = sup[0];
  for (std::size_t k = 0; k + 1 < sup.size(); ++k) acc += lambda(1.0 - cum[k]) * (sup[k + 1] - sup[k]);
  return acc;
}

}  // namespace factor_risk

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "factor_risk/conditioning.hpp"
#include "factor_risk/core.hpp"

namespace factor_risk {

/// Probability q on the scenarios, absolutely continuous w.r.t. pi.
/// `physical()` means q = pi.
class ScenarioWeighting {
 public:
  static ScenarioWeighting physical() { return ScenarioWeighting(); }

  static ScenarioWeighting explicit_weights(std::vector<double> q) {
    if (q.empty()) throw DomainError("ScenarioWeighting: no weights");
    for (double v : q)
      if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("ScenarioWeighting: weights must be nonnegative");
    if (std::abs(detail::sorted_sum(q) - 1.0) > kProbabilityTolerance)
      throw DomainError("ScenarioWeighting: weights must sum to one");
    ScenarioWeighting w;
    w.q_ = std::move(q);
    return w;
  }

  bool is_physical() const noexcept { return !q_.has_value(); }
  std::span<const double> weights() const { return q_ ? std::span<const double>(*q_) : std::span<const double>(); }

 private:
  ScenarioWeighting() = default;
  std::optional<std::vector<double>> q_;
};

/// sum_i q_i E[X | scenario i].
inline double linear_factor(const ConditionalLawFamily& family, const ScenarioWeighting& q) {
  if (q.is_physical()) {
    double acc = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) acc += family.weight(i) * family.law(i).mean();
    return acc;
  }
  const auto w = q.weights();
  if (w.size() != family.size())
    throw DomainError("linear_factor: number of weights does not match number of scenarios");
  double acc = 0.0;
  // families hold positive-probability scenarios only, so q << pi reduces
  // to the length check above
  for (std::size_t i = 0; i < family.size(); ++i) acc += w[i] * family.law(i).mean();
  return acc;
}

/// MES: E[X | W >= VaR_alpha(W)].
inline double mes(const JointSample& sample, std::span<const double> alpha) {
  return marginal(var_box_event(sample, VarBox::tail(std::vector<double>(alpha.begin(), alpha.end())))).mean();
}

}  // namespace factor_risk

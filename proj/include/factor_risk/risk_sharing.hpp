#pragma once

// Comonotonic risk sharing among agents whose preferences are distortion
// factor risk measures, each agent conditioning on its own factor. The
// optimum integrates the pointwise minimum of the agents' distortions of
// their conditional survival vectors; the loss is split on each interval
// of the support among the agents attaining that minimum.

#include <span>
#include <vector>

#include "factor_risk/core.hpp"
#include "factor_risk/distortion_factor.hpp"

namespace factor_risk {

/// One agent: its scenario distortion and the conditional law of the shared
/// loss X given the agent's own factor.
struct SharingAgent {
  ScenarioDistortion psi;
  ConditionalLawFamily family;
};

/// Allocation X_i = h_i(X) with h_i(x) = int_0^x r_i(t) dt and piecewise
/// constant marginal shares r_i. With breakpoints b_0 < ... < b_{m-1}, region
/// 0 is (-inf, b_0), region k is (b_{k-1}, b_k) and region m is (b_{m-1}, inf).
class PiecewiseLinearAllocation {
 public:
  PiecewiseLinearAllocation(std::vector<double> breakpoints, std::vector<std::vector<double>> slopes)
      : breakpoints_(std::move(breakpoints)), slopes_(std::move(slopes)) {
    if (breakpoints_.empty()) throw DomainError("allocation: need at least one breakpoint");
    for (std::size_t k = 1; k < breakpoints_.size(); ++k)
      if (!(breakpoints_[k] > breakpoints_[k - 1])) throw DomainError("allocation: breakpoints must increase");
    if (slopes_.empty()) throw DomainError("allocation: need at least one agent");
    const std::size_t regions = breakpoints_.size() + 1;
    for (const auto& r : slopes_) {
      if (r.size() != regions) throw DomainError("allocation: one slope per region and agent required");
      for (double v : r)
        if (!(v >= 0.0 && v <= 1.0)) throw DomainError("allocation: slopes must lie in [0,1]");
    }
    for (std::size_t k = 0; k < regions; ++k) {
      double total = 0.0;
      for (const auto& r : slopes_) total += r[k];
      if (std::abs(total - 1.0) > 1e-12) throw DomainError("allocation: slopes must sum to one on every region");
    }
    anchored_.assign(slopes_.size(), std::vector<double>(breakpoints_.size(), 0.0));
    offset_.assign(slopes_.size(), 0.0);
    for (std::size_t i = 0; i < slopes_.size(); ++i) {
      for (std::size_t k = 1; k < breakpoints_.size(); ++k)
        anchored_[i][k] = anchored_[i][k - 1] + slopes_[i][k] * (breakpoints_[k] - breakpoints_[k - 1]);
      offset_[i] = anchored(i, 0.0);
    }
  }

  std::size_t agents() const noexcept { return slopes_.size(); }
  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  double slope(std::size_t agent, std::size_t region) const { return slopes_[agent][region]; }
  const std::vector<std::vector<double>>& slopes() const noexcept { return slopes_; }

  /// h_i(x) = int_0^x r_i(t) dt.
  double operator()(std::size_t agent, double x) const { return anchored(agent, x) - offset_[agent]; }

 private:
  // int_{b_0}^x r_i(t) dt
  double anchored(std::size_t i, double x) const {
    const auto& b = breakpoints_;
    if (x <= b.front()) return slopes_[i][0] * (x - b.front());
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(b.begin(), b.end(), x) - b.begin());
    return anchored_[i][k - 1] + slopes_[i][k] * (x - b[k - 1]);
  }

  std::vector<double> breakpoints_;
  std::vector<std::vector<double>> slopes_;
  std::vector<std::vector<double>> anchored_;
  std::vector<double> offset_;
};

struct SharingResult {
  double value;
  PiecewiseLinearAllocation allocation;
};

/// Distortion values psi_i(1 - F_{X|W_i}(x_k)) for every agent i and every
/// support interval k of x_law.
inline std::vector<std::vector<double>> agent_distortions(const StepCdf& x_law, std::span<const SharingAgent> agents) {
  const auto pts = x_law.support();
  std::vector<std::vector<double>> out(agents.size(), std::vector<double>(pts.size() - 1));
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto& fam = agents[i].family;
    const auto table = fam.cdf_table(pts);
    std::vector<double> survival(fam.size());
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
      for (std::size_t s = 0; s < fam.size(); ++s) survival[s] = 1.0 - table[s][k];
      out[i][k] = agents[i].psi(survival, fam.weights());
    }
  }
  return out;
}

/// Inf-convolution over comonotonic allocations and an optimal allocation.
/// Ties in the pointwise minimum split the slope equally.
inline SharingResult inf_convolution(const StepCdf& x_law, std::span<const SharingAgent> agents) {
  if (agents.empty()) throw DomainError("inf_convolution: no agents");
  for (const auto& a : agents) a.family.check_mixture(x_law);
  const auto pts = x_law.support();
  const auto g = agent_distortions(x_law, agents);
  const std::size_t n = agents.size();
  std::vector<std::vector<double>> slopes(n, std::vector<double>(pts.size() + 1, 1.0 / static_cast<double>(n)));

  double value = pts[0];
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    double lowest = g[0][k];
    for (std::size_t i = 1; i < n; ++i) lowest = std::min(lowest, g[i][k]);
    value += lowest * (pts[k + 1] - pts[k]);
    std::size_t ties = 0;
    for (std::size_t i = 0; i < n; ++i) ties += g[i][k] <= lowest + 1e-12 ? 1 : 0;
    for (std::size_t i = 0; i < n; ++i)
      slopes[i][k + 1] = g[i][k] <= lowest + 1e-12 ? 1.0 / static_cast<double>(ties) : 0.0;
  }
  return {value, PiecewiseLinearAllocation(std::vector<double>(pts.begin(), pts.end()), std::move(slopes))};
}

/// Total risk sum_i rho_i(h_i(X), W_i) of a comonotonic allocation.
inline double allocation_value_check(const PiecewiseLinearAllocation& allocation, std::span<const SharingAgent> agents,
                                     const StepCdf& x_law) {
  if (allocation.agents() != agents.size())
    throw DomainError("allocation_value_check: allocation and agent list differ in size");
  const auto bp = allocation.breakpoints();
  const auto sup = x_law.support();
  if (!std::equal(bp.begin(), bp.end(), sup.begin(), sup.end()))
    throw DomainError("allocation_value_check: allocation breakpoints must be the support of X");
  double total = 0.0;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto share = agents[i].family.map_loss([&](double x) { return allocation(i, x); });
    total += choquet_factor(share, agents[i].psi);
  }
  return total;
}

}  // namespace factor_risk

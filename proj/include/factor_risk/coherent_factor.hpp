#pragma once

// Coherent factor risk measures. The building block is the conditional
// Hardy-Littlewood bound: over all Z with (Z, W) equal in law to (X, W),
// E[ZY] is maximized by pairing the conditional quantile functions of X
// and Y comonotonically inside every scenario, and minimized by pairing
// them antitonically.

#include <algorithm>
#include <vector>

#include "factor_risk/core.hpp"
#include "factor_risk/scalar_risk.hpp"

namespace factor_risk {

enum class Direction { sup, inf };

/// Finite set of scenario-conditional densities dQ/dP. Each member is a
/// conditional law family on the shared partition whose values are
/// nonnegative and whose total mean is one.
class DensityFamily {
 public:
  explicit DensityFamily(std::vector<ConditionalLawFamily> members) : members_(std::move(members)) {
    for (const auto& m : members_) {
      double total = 0.0;
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m.law(i).min() < 0.0) throw DataError("DensityFamily: density values must be nonnegative");
        total += m.weight(i) * m.law(i).mean();
      }
      if (std::abs(total - 1.0) > 1e-10) throw DataError("DensityFamily: every density must have mean one");
    }
  }

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const ConditionalLawFamily& operator[](std::size_t k) const { return members_[k]; }
  std::span<const ConditionalLawFamily> members() const noexcept { return members_; }

 private:
  std::vector<ConditionalLawFamily> members_;
};

namespace detail {

/// int_0^1 q_a(t) q_b(t) dt for step quantile functions, merging the two
/// grids of cumulative masses. With `reverse_a` the first quantile function
/// is read as q_a(1 - t).
inline double quantile_product_integral(const StepCdf& a, const StepCdf& b, bool reverse_a) {
  auto pieces = [](const StepCdf& cdf, bool reverse) {
    std::vector<std::pair<double, double>> out;  // (right end of the t-interval, value)
    const auto xs = cdf.support();
    const auto ms = cdf.masses();
    double running = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
      const std::size_t j = reverse ? xs.size() - 1 - k : k;
      running += ms[j];
      out.emplace_back(running, xs[j]);
    }
    out.back().first = 1.0;
    return out;
  };
  const auto pa = pieces(a, reverse_a);
  const auto pb = pieces(b, false);
  std::size_t ia = 0, ib = 0;
  double t = 0.0;
  double acc = 0.0;
  while (ia < pa.size() && ib < pb.size()) {
    const double next = std::min(pa[ia].first, pb[ib].first);
    acc += (next - t) * pa[ia].second * pb[ib].second;
    t = next;
    if (pa[ia].first == next) ++ia;
    if (pb[ib].first == next) ++ib;
  }
  return acc;
}

}  // namespace detail

/// sum_i pi_i int_0^1 VaR_t(X|i) VaR_t(Y|i) dt (sup), or with VaR_{1-t}(X|i)
/// in place of VaR_t(X|i) (inf). Both families must share the partition.
inline double hl_bound(const ConditionalLawFamily& x_family, const ConditionalLawFamily& y_family,
                       Direction direction) {
  if (!x_family.same_partition(y_family))
    throw DomainError("hl_bound: the two families must share the scenario partition");
  double acc = 0.0;
  for (std::size_t i = 0; i < x_family.size(); ++i)
    acc += x_family.weight(i) *
           detail::quantile_product_integral(x_family.law(i), y_family.law(i), direction == Direction::inf);
  return acc;
}

/// max over the density family of hl_bound(X, density, sup).
inline double coherent_sup(const ConditionalLawFamily& x_family, const DensityFamily& densities) {
  if (densities.empty()) throw DomainError("coherent_sup: empty density family");
  double best = hl_bound(x_family, densities[0], Direction::sup);
  for (std::size_t k = 1; k < densities.size(); ++k)
    best = std::max(best, hl_bound(x_family, densities[k], Direction::sup));
  return best;
}

/// Density that realizes E[ES_p(X|W)]: value 1/(1-p) on the top (1-p)
/// conditional tail of every scenario, zero elsewhere.
inline ConditionalLawFamily es_tail_density(std::span<const double> scenario_weights, double p) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("es_tail_density: level must lie in [0,1)");
  std::vector<ConditionalLaw> laws;
  for (double pi : scenario_weights) {
    if (p == 0.0) {
      laws.push_back({pi, StepCdf::point_mass(1.0)});
    } else {
      laws.push_back({pi, StepCdf::from_masses({{0.0, p}, {1.0 / (1.0 - p), 1.0 - p}})});
    }
  }
  return ConditionalLawFamily(std::move(laws));
}

/// Outer measure applied to the scenario ES values.
struct OuterMeasure {
  enum class Kind { es, esssup };
  Kind kind = Kind::esssup;
  double level = 0.0;

  static OuterMeasure expected_shortfall(double q) { return {Kind::es, q}; }
  static OuterMeasure essential_sup() { return {Kind::esssup, 0.0}; }
};

/// outer applied to the discrete law {(ES_p(X | i), pi_i)}: ES_q(ES_p(X|W))
/// or esssup ES_p(X|W).
inline double es_composition(const ConditionalLawFamily& family, double p, OuterMeasure outer) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("es_composition: inner level must lie in [0,1)");
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t i = 0; i < family.size(); ++i) atoms.emplace_back(es(family.law(i), p), family.weight(i));
  const StepCdf inner = StepCdf::from_masses(std::move(atoms));
  if (outer.kind == OuterMeasure::Kind::esssup) return esssup(inner);
  if (!(outer.level >= 0.0 && outer.level < 1.0))
    throw DomainError("es_composition: outer level must lie in [0,1)");
  return es(inner, outer.level);
}

}  // namespace factor_risk

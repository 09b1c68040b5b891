#pragma once

// Brute-force reference implementations for the test suite. They read the
// library types only through public constructors and accessors and redo
// every computation on plain atom lists.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "factor_risk/core.hpp"
#include "factor_risk/distortion_factor.hpp"
#include "factor_risk/risk_sharing.hpp"

namespace oracle {

struct Point {
  double x;
  double p;
};

using Atoms = std::vector<Point>;

// one scenario: weight and its conditional atoms (masses sum to one)
struct Group {
  double weight;
  Atoms atoms;
};

inline Atoms atoms_of(const factor_risk::StepCdf& cdf) {
  Atoms out;
  const auto s = cdf.support();
  const auto c = cdf.cum();
  for (std::size_t k = 0; k < s.size(); ++k) out.push_back({s[k], c[k] - (k ? c[k - 1] : 0.0)});
  return out;
}

inline std::vector<Group> groups_of(const factor_risk::ConditionalLawFamily& family) {
  std::vector<Group> out;
  for (std::size_t i = 0; i < family.size(); ++i) out.push_back({family.weight(i), atoms_of(family.law(i))});
  return out;
}

inline double total(const Atoms& a) {
  double t = 0.0;
  for (const auto& v : a) t += v.p;
  return t;
}

inline double survival(const Atoms& a, double x) {
  double s = 0.0;
  for (const auto& v : a)
    if (v.x > x) s += v.p;
  return s / total(a);
}

inline double mean(const Atoms& a) {
  double m = 0.0;
  for (const auto& v : a) m += v.x * v.p;
  return m / total(a);
}

/// Left quantile by sorting and accumulating.
inline double var(Atoms a, double alpha) {
  std::sort(a.begin(), a.end(), [](const Point& l, const Point& r) { return l.x < r.x; });
  const double t = total(a);
  double cum = 0.0;
  for (const auto& v : a) {
    cum += v.p / t;
    if (cum >= alpha - 1e-12) return v.x;
  }
  return a.back().x;
}

/// Mean of the top 1 - alpha probability mass, taking atoms from the top.
inline double es(Atoms a, double alpha) {
  std::sort(a.begin(), a.end(), [](const Point& l, const Point& r) { return l.x > r.x; });
  const double t = total(a);
  double left = 1.0 - alpha, acc = 0.0;
  for (const auto& v : a) {
    const double take = std::min(left, v.p / t);
    acc += take * v.x;
    left -= take;
    if (left <= 0.0) break;
  }
  return acc / (1.0 - alpha);
}

/// Midpoint Riemann sum of a + int_a^b psi(S(x)) dx over the merged support
/// range [a, b]; equals the Choquet form split at zero.
inline double choquet_riemann_oracle(const factor_risk::ConditionalLawFamily& family,
                                     const factor_risk::ScenarioDistortion& psi, double step = 0.0) {
  const auto groups = groups_of(family);
  double lo = groups[0].atoms[0].x, hi = lo;
  for (const auto& g : groups)
    for (const auto& v : g.atoms) {
      lo = std::min(lo, v.x);
      hi = std::max(hi, v.x);
    }
  if (hi == lo) return lo;
  if (step <= 0.0) step = (hi - lo) / 1e5;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step));
  const double h = (hi - lo) / static_cast<double>(n);
  std::vector<double> pi, s(groups.size());
  for (const auto& g : groups) pi.push_back(g.weight);
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = lo + (static_cast<double>(k) + 0.5) * h;
    for (std::size_t i = 0; i < groups.size(); ++i) s[i] = survival(groups[i].atoms, x);
    acc += psi(s, pi) * h;
  }
  return lo + acc;
}

/// Tolerance the tests allow the Riemann oracle.
inline double riemann_tolerance(const factor_risk::ConditionalLawFamily& family) {
  const auto pts = family.merged_support();
  const double range = pts.back() - pts.front();
  const double step = range / 1e5;
  return std::max(10.0 * step * range, 1e-12);
}

/// Per-scenario equal-probability grids for the rearrangement oracle.
struct GridScenario {
  double weight;
  std::vector<double> x;
  std::vector<double> y;
};

/// Exact max and min of sum_i pi_i (1/m_i) sum_j x_j y_sigma(j) over all
/// within-scenario permutations sigma.
inline std::pair<double, double> hl_bruteforce_oracle(const std::vector<GridScenario>& scenarios) {
  double sup = 0.0, inf = 0.0;
  for (const auto& s : scenarios) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("hl oracle: grids differ in size");
    if (s.x.size() > 6) throw std::invalid_argument("hl oracle: more than 6 atoms per scenario");
    std::vector<std::size_t> perm(s.y.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = -INFINITY, worst = INFINITY;
    do {
      double v = 0.0;
      for (std::size_t j = 0; j < perm.size(); ++j) v += s.x[j] * s.y[perm[j]];
      v /= static_cast<double>(s.x.size());
      best = std::max(best, v);
      worst = std::min(worst, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    sup += s.weight * best;
    inf += s.weight * worst;
  }
  return {sup, inf};
}

/// Exact Choquet sum of psi over an atom-level family, recomputed here from
/// scratch: lowest value plus psi of the survival vector times each gap.
inline double choquet_exact(const std::vector<Group>& groups, const factor_risk::ScenarioDistortion& psi) {
  std::vector<double> xs, pi, s(groups.size());
  for (const auto& g : groups) {
    pi.push_back(g.weight);
    for (const auto& v : g.atoms) xs.push_back(v.x);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  double acc = xs.front();
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    for (std::size_t i = 0; i < groups.size(); ++i) s[i] = survival(groups[i].atoms, xs[k]);
    acc += psi(s, pi) * (xs[k + 1] - xs[k]);
  }
  return acc;
}

/// Total risk of the allocation defined by per-interval slopes[i][k] on the
/// support intervals of X (anchored so the shares sum to x at the first
/// support point).
inline double allocation_risk(const std::vector<double>& support, const std::vector<std::vector<double>>& slopes,
                              std::span<const factor_risk::SharingAgent> agents) {
  const std::size_t n = agents.size();
  double totalrisk = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::map<double, double> share;  // support point -> h_i
    double h = support.front() / static_cast<double>(n);
    share[support.front()] = h;
    for (std::size_t k = 0; k + 1 < support.size(); ++k) {
      h += slopes[i][k] * (support[k + 1] - support[k]);
      share[support[k + 1]] = h;
    }
    auto groups = groups_of(agents[i].family);
    for (auto& g : groups)
      for (auto& v : g.atoms) v.x = share.at(v.x);
    totalrisk += choquet_exact(groups, agents[i].psi);
  }
  return totalrisk;
}

/// Minimum total risk over random comonotone allocations. Trial 0 is the
/// profile that gives each interval to the agents with the lowest psi value.
inline double sharing_sweep_oracle(const factor_risk::StepCdf& x_law, std::span<const factor_risk::SharingAgent> agents,
                                   std::size_t trials, std::uint64_t seed) {
  std::vector<double> support;
  for (const auto& a : atoms_of(x_law)) support.push_back(a.x);
  const std::size_t n = agents.size(), m = support.size() - 1;
  std::vector<std::vector<double>> slopes(n, std::vector<double>(m, 0.0));

  // argmin profile
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> g(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto groups = groups_of(agents[i].family);
      std::vector<double> pi, s;
      for (const auto& grp : groups) {
        pi.push_back(grp.weight);
        s.push_back(survival(grp.atoms, support[k]));
      }
      g[i] = agents[i].psi(s, pi);
    }
    const double low = *std::min_element(g.begin(), g.end());
    std::size_t ties = 0;
    for (double v : g) ties += v <= low + 1e-12;
    for (std::size_t i = 0; i < n; ++i) slopes[i][k] = g[i] <= low + 1e-12 ? 1.0 / static_cast<double>(ties) : 0.0;
  }
  double best = allocation_risk(support, slopes, agents);

  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> expo(1.0);
  std::bernoulli_distribution corner(0.3);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t t = 1; t < trials; ++t) {
    for (std::size_t k = 0; k < m; ++k) {
      if (corner(rng)) {
        const std::size_t who = pick(rng);
        for (std::size_t i = 0; i < n; ++i) slopes[i][k] = i == who ? 1.0 : 0.0;
        continue;
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) sum += slopes[i][k] = expo(rng);
      for (std::size_t i = 0; i < n; ++i) slopes[i][k] /= sum;
    }
    best = std::min(best, allocation_risk(support, slopes, agents));
  }
  return best;
}

/// Standard normal quantile by bisection on the erfc-based CDF.
/// Above 1/2 the bisection runs on the upper tail 1 - p, which is exact in
/// double there, so the answer keeps its accuracy near p = 1.
inline double norm_inv_bisection(double p) {
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::sqrt(2.0)) < target)
      lo = mid;
    else
      hi = mid;
  }
  const double x = 0.5 * (lo + hi);
  return upper ? -x : x;
}

/// OLS via normal equations and Gauss-Jordan in long double.
inline std::vector<double> ols_normal_equations(const std::vector<double>& y, const std::vector<std::vector<double>>& x) {
  const std::size_t k = x.empty() ? 1 : x[0].size() + 1;
  std::vector<std::vector<long double>> a(k, std::vector<long double>(k + 1, 0.0L));
  for (std::size_t t = 0; t < y.size(); ++t) {
    std::vector<long double> row{1.0L};
    for (double v : x[t]) row.push_back(v);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] += row[i] * row[j];
      a[i][k] += row[i] * y[t];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) out[i] = static_cast<double>(a[i][k] / a[i][i]);
  return out;
}

/// Raw (x, w, p) triple for atom-level oracles on a joint law.
struct JointAtom {
  double x;
  double w;
  double p;
};

/// Conditional atoms of X given the scalar factor equals w.
inline Atoms given(const std::vector<JointAtom>& joint, double w) {
  Atoms out;
  for (const auto& a : joint)
    if (a.w == w) out.push_back({a.x, a.p});
  return out;
}

inline Atoms factor_atoms(const std::vector<JointAtom>& joint) {
  Atoms out;
  for (const auto& a : joint) out.push_back({a.w, a.p});
  return out;
}

inline Atoms loss_atoms(const std::vector<JointAtom>& joint) {
  Atoms out;
  for (const auto& a : joint) out.push_back({a.x, a.p});
  return out;
}

/// Distinct factor values with their probabilities.
inline std::map<double, double> factor_masses(const std::vector<JointAtom>& joint) {
  std::map<double, double> out;
  for (const auto& a : joint) out[a.w] += a.p;
  return out;
}

/// X atoms on the event W >= VaR_alpha(W).
inline Atoms tail_event(const std::vector<JointAtom>& joint, double alpha) {
  const double cut = var(factor_atoms(joint), alpha);
  Atoms out;
  for (const auto& a : joint)
    if (a.w >= cut) out.push_back({a.x, a.p});
  return out;
}

/// Outer measure applied to per-scenario inner values.
template <class Inner>
inline Atoms per_scenario(const std::vector<JointAtom>& joint, Inner inner) {
  Atoms out;
  for (const auto& [w, mass] : factor_masses(joint)) out.push_back({inner(given(joint, w)), mass});
  return out;
}

}  // namespace oracle

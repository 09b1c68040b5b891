#pragma once

#include <random>
#include <vector>

#include "factor_risk/factor_risk.hpp"
#include "oracles.hpp"

namespace fixtures {

namespace fr = factor_risk;

// 8 equally likely atoms of (X, W): X|W=0 uniform{1,2,3,4}, X|W=1 uniform{2,4,6,8}
inline std::vector<oracle::JointAtom> two_state_joint() {
  return {{1, 0, 0.125}, {2, 0, 0.125}, {3, 0, 0.125}, {4, 0, 0.125},
          {2, 1, 0.125}, {4, 1, 0.125}, {6, 1, 0.125}, {8, 1, 0.125}};
}

inline std::vector<fr::Atom> to_atoms(const std::vector<oracle::JointAtom>& joint) {
  std::vector<fr::Atom> out;
  for (const auto& a : joint) out.push_back({a.x, {a.w}, a.p});
  return out;
}

inline fr::DiscreteJointDistribution two_state() { return fr::DiscreteJointDistribution(to_atoms(two_state_joint())); }

/// Random discrete joint law with a scalar factor: up to max_atoms atoms over
/// up to max_scenarios factor values. Losses sit on a quarter grid when
/// `grid` is set (keeps ties and exact arithmetic likely), else continuous.
inline std::vector<oracle::JointAtom> random_joint(std::mt19937_64& rng, std::size_t max_atoms = 8,
                                                   std::size_t max_scenarios = 3, bool grid = true) {
  std::uniform_int_distribution<std::size_t> n_atoms(1, max_atoms), n_scen(1, max_scenarios);
  std::uniform_int_distribution<int> cell(-8, 24);
  std::uniform_real_distribution<double> cont(-3.0, 7.0), mass(0.05, 1.0);
  const std::size_t scenarios = n_scen(rng);
  const std::size_t atoms = std::max(scenarios, n_atoms(rng));
  std::vector<oracle::JointAtom> out;
  double total = 0.0;
  for (std::size_t k = 0; k < atoms; ++k) {
    const double w = static_cast<double>(k < scenarios ? k : std::uniform_int_distribution<std::size_t>(0, scenarios - 1)(rng));
    const double x = grid ? 0.25 * cell(rng) : cont(rng);
    const double p = mass(rng);
    total += p;
    out.push_back({x, w, p});
  }
  for (auto& a : out) a.p /= total;
  double rest = 1.0;
  for (std::size_t k = 0; k + 1 < out.size(); ++k) rest -= out[k].p;
  out.back().p = rest;
  return out;
}

inline fr::DiscreteJointDistribution dist(const std::vector<oracle::JointAtom>& joint) {
  return fr::DiscreteJointDistribution(to_atoms(joint));
}

inline fr::ConditionalLawFamily family(const std::vector<oracle::JointAtom>& joint) {
  return fr::conditional_family(dist(joint));
}

/// Uniform random level in [lo, hi].
inline double random_level(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return u(rng);
}

/// Every built-in psi kind, parametrized for a family of n scenarios.
inline std::vector<std::pair<std::string, fr::ScenarioDistortion>> builtin_psis(std::size_t n, std::mt19937_64& rng) {
  std::vector<double> g(n);
  for (auto& v : g) v = random_level(rng, 0.05, 0.95);
  std::vector<std::size_t> subset{0};
  if (n > 1) subset.push_back(n - 1);
  return {
      {"mean", fr::ScenarioDistortion::mean()},
      {"lambda_of_var", fr::ScenarioDistortion::lambda_of_var(fr::DistortionFunction::es_level(0.3),
                                                              fr::LevelMap::per_scenario(g))},
      {"mean_of_var", fr::ScenarioDistortion::mean_of_var(fr::LevelMap::per_scenario(g))},
      {"mean_of_es", fr::ScenarioDistortion::mean_of_es(fr::LevelMap::per_scenario(g))},
      {"es_on_box", fr::ScenarioDistortion::es_on_box(0.4, subset)},
      {"indicator_var_var", fr::ScenarioDistortion::indicator_var_var(0.6, 0.5)},
  };
}

}  // namespace fixtures

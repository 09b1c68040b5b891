#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"

using namespace factor_risk;

TEST(LinearFactor, TwoStateExamples) {
  const auto j = fixtures::two_state_joint();
  const auto fam = fixtures::family(j);
  const double m0 = oracle::mean(oracle::given(j, 0)), m1 = oracle::mean(oracle::given(j, 1));
  EXPECT_NEAR(linear_factor(fam, ScenarioWeighting::physical()), 3.75, 1e-12);
  EXPECT_NEAR(linear_factor(fam, ScenarioWeighting::explicit_weights({0.0, 1.0})), m1, 1e-12);
  EXPECT_NEAR(m1, 5.0, 1e-12);
  EXPECT_NEAR(linear_factor(fam, ScenarioWeighting::explicit_weights({0.25, 0.75})), 0.25 * m0 + 0.75 * m1, 1e-12);
  EXPECT_NEAR(0.25 * m0 + 0.75 * m1, 4.375, 1e-12);
}

TEST(LinearFactor, Validation) {
  EXPECT_THROW(ScenarioWeighting::explicit_weights({}), DomainError);
  EXPECT_THROW(ScenarioWeighting::explicit_weights({0.5, 0.6}), DomainError);
  EXPECT_THROW(ScenarioWeighting::explicit_weights({-0.5, 1.5}), DomainError);
  const auto fam = fixtures::family(fixtures::two_state_joint());
  // a third weight would sit on a scenario of zero probability
  EXPECT_THROW(linear_factor(fam, ScenarioWeighting::explicit_weights({0.2, 0.3, 0.5})), DomainError);
}

TEST(Mes, TwoStateExamples) {
  const auto j = fixtures::two_state_joint();
  const auto s = fixtures::two_state().to_sample();
  const std::vector<double> a{0.75}, tiny{1e-9};
  EXPECT_NEAR(mes(s, a), oracle::mean(oracle::tail_event(j, 0.75)), 1e-12);
  EXPECT_NEAR(mes(s, a), 5.0, 1e-12);
  EXPECT_NEAR(mes(s, tiny), 3.75, 1e-12);
}

TEST(Mes, IndependentFactor) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> z(0.0, 1.0);
  const std::size_t n = 100000;
  std::vector<double> loss(n), w(n);
  for (std::size_t t = 0; t < n; ++t) {
    loss[t] = 1.0 + z(rng);
    w[t] = z(rng);
  }
  const JointSample s(loss, std::vector<double>(w), 1);
  const std::vector<double> a{0.9};
  // the tail event holds n/10 rows
  EXPECT_NEAR(mes(s, a), marginal(s).mean(), 3.0 / std::sqrt(n / 10.0));
}

TEST(LinearFactor, Additivity) {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> x(-3, 5), m(0.1, 1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Atom> ax, ay, as;
    double total = 0;
    std::vector<std::tuple<double, double, double, double>> rows;
    const int n = 1 + trial % 3;
    for (int w = 0; w < n; ++w)
      for (int k = 0; k < 1 + (trial + w) % 3; ++k) {
        rows.emplace_back(x(rng), x(rng), w, m(rng));
        total += std::get<3>(rows.back());
      }
    for (const auto& [xv, yv, w, p] : rows) {
      ax.push_back({xv, {w}, p / total});
      ay.push_back({yv, {w}, p / total});
      as.push_back({xv + yv, {w}, p / total});
    }
    for (auto* v : {&ax, &ay, &as}) {
      double rest = 1.0;
      for (std::size_t k = 0; k + 1 < v->size(); ++k) rest -= (*v)[k].p;
      v->back().p = rest;
    }
    std::vector<double> q(n);
    double qs = 0;
    for (auto& v : q) qs += v = m(rng);
    for (auto& v : q) v /= qs;
    double rest = 1.0;
    for (int k = 0; k + 1 < n; ++k) rest -= q[k];
    q.back() = rest;
    for (const auto& weighting : {ScenarioWeighting::physical(), ScenarioWeighting::explicit_weights(q)}) {
      const double lhs = linear_factor(conditional_family(DiscreteJointDistribution(as)), weighting);
      const double rhs = linear_factor(conditional_family(DiscreteJointDistribution(ax)), weighting) +
                         linear_factor(conditional_family(DiscreteJointDistribution(ay)), weighting);
      EXPECT_NEAR(lhs, rhs, 1e-12);
    }
  }
}

TEST(LinearFactor, PhysicalEqualsMeanEngine) {
  std::mt19937_64 rng(65);
  for (int trial = 0; trial < 500; ++trial) {
    const auto fam = fixtures::family(fixtures::random_joint(rng, 8, 3, trial % 2 == 0));
    EXPECT_NEAR(linear_factor(fam, ScenarioWeighting::physical()), choquet_factor(fam, ScenarioDistortion::mean()),
                1e-12);
  }
}

TEST(Mes, EqualsTailWeightedLinearFactor) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 300; ++trial) {
    const auto d = fixtures::dist(fixtures::random_joint(rng, 8, 3, trial % 2 == 0));
    const auto s = d.to_sample();
    const auto fam = conditional_family(d);
    const auto part = partition_discrete(s);
    const double alpha = fixtures::random_level(rng, 0.01, 0.99);
    const double cut = var(detail::factor_column_law(s, 0), alpha);
    std::vector<double> q(part.size(), 0.0);
    double tail = 0.0;
    for (std::size_t i = 0; i < part.size(); ++i)
      if (part[i].key[0] >= cut) tail += q[i] = fam.weight(i);
    for (auto& v : q) v /= tail;
    double rest = 1.0;
    std::size_t last = 0;
    for (std::size_t i = 0; i < q.size(); ++i)
      if (q[i] > 0) last = i;
    for (std::size_t i = 0; i < q.size(); ++i)
      if (i != last) rest -= q[i];
    q[last] = rest;
    const std::vector<double> a{alpha};
    EXPECT_NEAR(mes(s, a), linear_factor(fam, ScenarioWeighting::explicit_weights(q)), 1e-12);
  }
}

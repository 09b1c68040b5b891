#pragma once

// Linear factor model X = beta0 + beta W + sigma eps with eps ~ N(0,1):
// OLS fit with the usual inference columns, the closed form
//   VaR_q(VaR_p(X|W)) = beta0 + VaR_q(beta W) + sigma N^{-1}(p),
// the Diff statistic against VaR_p(X), and a seeded simulator.

#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "factor_risk/core.hpp"
#include "factor_risk/normal.hpp"
#include "factor_risk/scalar_risk.hpp"

namespace factor_risk {

struct RegressionFit {
  double beta0 = 0.0;
  std::vector<double> beta;
  double sigma = 0.0;
  std::size_t dof = 0;  // T - N - 1
  /// Inference columns, intercept first.
  std::vector<double> std_err;
  std::vector<double> tstat;
  std::vector<double> pvalue;
  std::vector<std::pair<double, double>> ci95;
  std::vector<double> residuals;
  /// Row labels for reports: "const" followed by the factor names.
  std::vector<std::string> names;

  double coef(std::size_t k) const { return k == 0 ? beta0 : beta[k - 1]; }
};

/// OLS of the loss column on a constant and the factor columns, solved by
/// column-pivoted Householder QR. sigma uses the T - N - 1 divisor; p-values
/// are two-sided Student-t with T - N - 1 degrees of freedom. Every row
/// counts once, so samples must carry uniform weights.
inline RegressionFit ols_fit(const JointSample& data, std::vector<std::string> factor_names = {}) {
  const std::size_t rows = data.size();
  const std::size_t dim = data.factor_dim();
  const std::size_t cols = dim + 1;
  if (!data.uniform_weights()) throw DomainError("ols_fit: weighted samples are not supported");
  if (rows <= cols) throw DomainError("ols_fit: need more observations than regressors plus one");
  if (factor_names.empty())
    for (std::size_t j = 0; j < dim; ++j) factor_names.push_back("x" + std::to_string(j + 1));
  if (factor_names.size() != dim) throw DomainError("ols_fit: one name per factor column required");

  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd target(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    design(t, 0) = 1.0;
    for (std::size_t j = 0; j < dim; ++j) design(t, j + 1) = data.factor(t, j);
    target(t) = data.loss(t);
  }

  RegressionFit fit;
  fit.names.push_back("const");
  fit.names.insert(fit.names.end(), factor_names.begin(), factor_names.end());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (static_cast<std::size_t>(qr.rank()) < cols) {
    std::vector<std::string> offending;
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t k = static_cast<std::size_t>(qr.rank()); k < cols; ++k)
      offending.push_back(fit.names[static_cast<std::size_t>(perm(static_cast<Eigen::Index>(k)))]);
    std::string list;
    for (const auto& name : offending) list += (list.empty() ? "" : ", ") + name;
    throw RankDeficientError("ols_fit: design matrix is rank deficient (dependent columns: " + list + ")",
                             std::move(offending));
  }
  const Eigen::VectorXd coef = qr.solve(target);
  const Eigen::VectorXd resid = target - design * coef;

  fit.dof = rows - cols;
  fit.beta0 = coef(0);
  for (std::size_t j = 0; j < dim; ++j) fit.beta.push_back(coef(static_cast<Eigen::Index>(j + 1)));
  fit.residuals.assign(resid.data(), resid.data() + resid.size());
  const double sse = resid.squaredNorm();
  fit.sigma = std::sqrt(sse / static_cast<double>(fit.dof));

  // (X'X)^{-1} = P R^{-1} R^{-T} P^T
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(cols, cols).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(cols),
                                                                                 static_cast<Eigen::Index>(cols)));
  const Eigen::MatrixXd cov_perm = r_inv * r_inv.transpose();
  const auto& perm = qr.colsPermutation();
  const Eigen::MatrixXd cov = perm * cov_perm * perm.transpose();

  const boost::math::students_t dist(static_cast<double>(fit.dof));
  const double t_crit = boost::math::quantile(boost::math::complement(dist, 0.025));
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < cols; ++k) {
    const double se = fit.sigma * std::sqrt(cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)));
    const double c = coef(static_cast<Eigen::Index>(k));
    fit.std_err.push_back(se);
    if (se > 0.0) {
      const double t = c / se;
      fit.tstat.push_back(t);
      fit.pvalue.push_back(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
    } else {
      fit.tstat.push_back(nan);
      fit.pvalue.push_back(nan);
    }
    fit.ci95.emplace_back(c - t_crit * se, c + t_crit * se);
  }
  return fit;
}

/// Weighted empirical law of the factor index beta W.
inline StepCdf factor_index_law(const RegressionFit& fit, const JointSample& factors) {
  if (fit.beta.size() != factors.factor_dim())
    throw DomainError("factor index: coefficient and factor dimensions differ");
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(factors.size());
  for (std::size_t t = 0; t < factors.size(); ++t) {
    double index = 0.0;
    for (std::size_t j = 0; j < fit.beta.size(); ++j) index += fit.beta[j] * factors.factor(t, j);
    atoms.emplace_back(index, factors.weight(t));
  }
  return StepCdf::from_masses(std::move(atoms));
}

/// beta0 + VaR_q(beta W) + sigma N^{-1}(p), with VaR_q taken over the
/// empirical factor sample.
inline double gaussian_rho(const RegressionFit& fit, const JointSample& factors, double p, double q) {
  if (!(p > 0.0 && p < 1.0) || !(q > 0.0 && q < 1.0)) throw DomainError("gaussian_rho: levels must lie in (0,1)");
  return fit.beta0 + var(factor_index_law(fit, factors), q) + fit.sigma * norm_inv(p);
}

/// How VaR_p(X), the denominator of Diff, is obtained.
enum class PlainVarMode {
  model,      ///< seeded Monte Carlo of beta0 + beta W + sigma eps over the factor rows
  empirical,  ///< empirical quantile of the observed target column
};

inline constexpr std::uint64_t kDefaultSeed = 20240917;

struct DiffOptions {
  PlainVarMode plain = PlainVarMode::model;
  std::size_t draws = 1'000'000;
  std::uint64_t seed = kDefaultSeed;
  bool parallel = true;
};

struct DiffCell {
  double p;
  double q;
  double rho_factor;
  double rho_plain;
  double diff;  // NaN when rho_plain == 0
};

struct DiffGrid {
  std::vector<DiffCell> rows;  // p-major, then q
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for a grid coordinate; independent of evaluation order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t row, std::uint64_t col = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ row) ^ (col * 0x632be59bd9b4e019ULL));
}

/// Left quantile of equally weighted values.
inline double equal_weight_var(std::vector<double> values, double p) {
  const double n = static_cast<double>(values.size());
  const double rank = std::ceil(p * n - kLevelTolerance * n);
  const std::size_t k = rank < 1.0 ? 0 : static_cast<std::size_t>(rank) - 1;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k), values.end());
  return values[k];
}

}  // namespace detail

/// VaR_p(X) for the Diff denominator. In model mode the factor rows are
/// resampled by weight and Gaussian noise added; the stream is seeded by
/// `seed` alone.
inline double plain_var(const RegressionFit& fit, const JointSample& data, double p, const DiffOptions& options,
                        std::uint64_t seed) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("plain_var: level must lie in (0,1)");
  if (options.plain == PlainVarMode::empirical) return var(marginal(data), p);
  if (options.draws == 0) throw DomainError("plain_var: need at least one draw");
  if (fit.beta.size() != data.factor_dim()) throw DomainError("plain_var: coefficient and factor dimensions differ");

  std::vector<double> fitted(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    double v = fit.beta0;
    for (std::size_t j = 0; j < fit.beta.size(); ++j) v += fit.beta[j] * data.factor(t, j);
    fitted[t] = v;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::discrete_distribution<std::size_t> pick(data.weights().begin(), data.weights().end());
  std::vector<double> draws(options.draws);
  for (double& x : draws) {
    const std::size_t t = pick(rng);
    x = fitted[t] + fit.sigma * noise(rng);
  }
  return detail::equal_weight_var(std::move(draws), p);
}

/// Diff = rho(X, W) / rho(X) - 1 over the Cartesian grid of levels. The
/// denominator of row i is drawn from the stream derive_seed(seed, i), so it
/// is shared across the row and serial and parallel runs agree bit for bit.
inline DiffGrid diff_grid(const RegressionFit& fit, const JointSample& data, std::span<const double> p_values,
                          std::span<const double> q_values, const DiffOptions& options = {}) {
  if (p_values.empty() || q_values.empty()) throw DomainError("diff_grid: level lists must be nonempty");
  for (double v : p_values)
    if (!(v > 0.0 && v < 1.0)) throw DomainError("diff_grid: p levels must lie in (0,1)");
  for (double v : q_values)
    if (!(v > 0.0 && v < 1.0)) throw DomainError("diff_grid: q levels must lie in (0,1)");

  const StepCdf index_law = factor_index_law(fit, data);
  auto row = [&](std::size_t i) {
    const double p = p_values[i];
    const double plain = plain_var(fit, data, p, options, detail::derive_seed(options.seed, i));
    const double shift = fit.beta0 + fit.sigma * norm_inv(p);
    std::vector<DiffCell> cells;
    cells.reserve(q_values.size());
    for (double q : q_values) {
      const double factor = shift + var(index_law, q);
      const double diff = plain == 0.0 ? std::numeric_limits<double>::quiet_NaN() : factor / plain - 1.0;
      cells.push_back({p, q, factor, plain, diff});
    }
    return cells;
  };

  std::vector<std::vector<DiffCell>> per_row(p_values.size());
  if (options.parallel && p_values.size() > 1) {
    std::vector<std::future<std::vector<DiffCell>>> jobs;
    for (std::size_t i = 0; i < p_values.size(); ++i) jobs.push_back(std::async(std::launch::async, row, i));
    for (std::size_t i = 0; i < jobs.size(); ++i) per_row[i] = jobs[i].get();
  } else {
    for (std::size_t i = 0; i < p_values.size(); ++i) per_row[i] = row(i);
  }
  DiffGrid grid;
  for (auto& cells : per_row) grid.rows.insert(grid.rows.end(), cells.begin(), cells.end());
  return grid;
}

/// Level q0 with VaR_{q0}(VaR_p(X|W)) = VaR_p(X), found by bisection on
/// Diff(q) (nondecreasing in q) until |Diff| <= 1e-6 or 60 halvings.
inline double find_matching_q(const RegressionFit& fit, const JointSample& data, double p,
                              const DiffOptions& options = {}) {
  const double plain = plain_var(fit, data, p, options, detail::derive_seed(options.seed, 0));
  if (plain == 0.0) throw DomainError("find_matching_q: VaR_p(X) is zero, Diff is undefined");
  const StepCdf index_law = factor_index_law(fit, data);
  const double shift = fit.beta0 + fit.sigma * norm_inv(p);
  auto diff = [&](double q) { return (shift + var(index_law, q)) / plain - 1.0; };

  double lo = 1e-9, hi = 1.0 - 1e-9;
  const double d_lo = diff(lo), d_hi = diff(hi);
  if (!(d_lo < 0.0 && d_hi > 0.0))
    throw NoSignChangeError("find_matching_q: Diff does not change sign over q in (0,1)", d_lo, d_hi);
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 60; ++it) {
    mid = 0.5 * (lo + hi);
    const double d = diff(mid);
    if (std::abs(d) <= 1e-6) break;
    (d < 0.0 ? lo : hi) = mid;
  }
  return mid;
}

struct GaussianFactors {
  std::vector<double> mean;
  std::vector<std::vector<double>> cov;
};

/// Factor vectors drawn uniformly from a finite value set.
struct DiscreteFactors {
  std::vector<std::vector<double>> values;
};

using FactorSpec = std::variant<GaussianFactors, DiscreteFactors>;

/// n rows of W drawn per the factor specification, eps ~ N(0,1), X = beta0 + beta W + sigma eps.
/// Identical arguments give bit-identical samples.
inline JointSample simulate(double beta0, const std::vector<double>& beta, double sigma, const FactorSpec& spec,
                            std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("simulate: need at least one row");
  if (!(sigma >= 0.0)) throw DomainError("simulate: sigma must be nonnegative");
  const std::size_t dim = beta.size();
  if (dim == 0) throw DomainError("simulate: need at least one factor");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> loss(n), factors(n * dim);

  if (const auto* g = std::get_if<GaussianFactors>(&spec)) {
    if (g->mean.size() != dim || g->cov.size() != dim) throw DomainError("simulate: mean/cov dimension mismatch");
    Eigen::MatrixXd cov(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (g->cov[i].size() != dim) throw DomainError("simulate: covariance must be square");
      for (std::size_t j = 0; j < dim; ++j) cov(i, j) = g->cov[i][j];
    }
    if (!cov.isApprox(cov.transpose(), 1e-12)) throw DomainError("simulate: covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const double scale = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-12 * scale)
      throw DomainError("simulate: covariance is not positive semidefinite");
    const Eigen::MatrixXd root =
        eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
    Eigen::VectorXd z(dim);
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t j = 0; j < dim; ++j) z(static_cast<Eigen::Index>(j)) = normal(rng);
      const Eigen::VectorXd w = root * z;
      double x = beta0;
      for (std::size_t j = 0; j < dim; ++j) {
        factors[t * dim + j] = g->mean[j] + w(static_cast<Eigen::Index>(j));
        x += beta[j] * factors[t * dim + j];
      }
      loss[t] = x + sigma * normal(rng);
    }
  } else {
    const auto& d = std::get<DiscreteFactors>(spec);
    if (d.values.empty()) throw DomainError("simulate: empty value set");
    for (const auto& v : d.values)
      if (v.size() != dim) throw DomainError("simulate: factor value dimension mismatch");
    std::uniform_int_distribution<std::size_t> pick(0, d.values.size() - 1);
    for (std::size_t t = 0; t < n; ++t) {
      const auto& w = d.values[pick(rng)];
      double x = beta0;
      for (std::size_t j = 0; j < dim; ++j) {
        factors[t * dim + j] = w[j];
        x += beta[j] * w[j];
      }
      loss[t] = x + sigma * normal(rng);
    }
  }
  return JointSample(std::move(loss), std::move(factors), dim);
}

}  // namespace factor_risk

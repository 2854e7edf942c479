#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/errors.hpp"
#include "pceuq/marginals.hpp"

// Error measures: MAE, relative MAE, relative moment errors, and the
// Kullback-Leibler divergence between density estimates on a shared grid.

namespace pceuq {

struct ErrorReport {
  std::optional<double> mae;
  std::optional<double> rmae;
  std::optional<double> rel_mean_err;
  std::optional<double> rel_std_err;
  std::optional<double> kl_div;
};

inline double mae(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size()) throw LengthMismatch("mae: unequal lengths");
  if (pred.size() == 0) throw LengthMismatch("mae: empty input");
  return (truth - pred).cwiseAbs().mean();
}

inline double rmae(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (pred.size() != truth.size()) throw LengthMismatch("rmae: unequal lengths");
  if (pred.size() == 0) throw LengthMismatch("rmae: empty input");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    if (truth[i] == 0.0) throw ZeroReference("rmae undefined when a reference value is 0");
    acc += std::fabs(1.0 - pred[i] / truth[i]);
  }
  return acc / double(pred.size());
}

inline std::pair<double, double> rel_moment_errors(double est_mean, double est_std,
                                                   double ref_mean, double ref_std) {
  if (ref_mean == 0.0 || ref_std == 0.0)
    throw ZeroReference("relative moment errors need nonzero references");
  return {std::fabs(1.0 - est_mean / ref_mean), std::fabs(1.0 - est_std / ref_std)};
}

using DensityFn = std::function<double(double)>;

// |KL(f_ref || f_est)| by the trapezoid rule on the given grid; densities
// floored at 1e-300. The magnitude is reported since the sign depends only
// on the argument order convention.
inline double kl_divergence(const DensityFn& f_est, const DensityFn& f_ref,
                            const std::vector<double>& grid) {
  if (grid.size() < 128) throw GridTooCoarse("KL grid needs at least 128 nodes");
  std::vector<double> integrand(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double fr = std::max(f_ref(grid[i]), 1e-300);
    double fe = std::max(f_est(grid[i]), 1e-300);
    integrand[i] = std::log(fr / fe) * fr;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    acc += 0.5 * (integrand[i] + integrand[i + 1]) * (grid[i + 1] - grid[i]);
  return std::fabs(acc);
}

// 4096-node uniform grid spanning the union of the two marginals'
// [1e-6, 1-1e-6] quantile ranges.
inline std::vector<double> make_kl_grid(const Marginal& est, const Marginal& ref,
                                        std::size_t nodes = 4096) {
  double lo = std::min(marginal_quantile(est, 1e-6), marginal_quantile(ref, 1e-6));
  double hi = std::max(marginal_quantile(est, 1.0 - 1e-6), marginal_quantile(ref, 1.0 - 1e-6));
  std::vector<double> grid(nodes);
  for (std::size_t i = 0; i < nodes; ++i)
    grid[i] = lo + (hi - lo) * double(i) / double(nodes - 1);
  return grid;
}

inline double kl_divergence(const Marginal& est, const Marginal& ref) {
  std::vector<double> grid = make_kl_grid(est, ref);
  return kl_divergence([&](double x) { return marginal_pdf(est, x); },
                       [&](double x) { return marginal_pdf(ref, x); }, grid);
}

}  // namespace pceuq

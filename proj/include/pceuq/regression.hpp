#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/errors.hpp"
#include "pceuq/multi_index.hpp"

// PCE coefficient estimation: ordinary least squares, least angle regression
// with OLS refits along the path (hybrid LAR), analytic leave-one-out error,
// and the (p, r) hyperparameter sweep with early stopping.

namespace pceuq {

struct DesignMatrix {
  Eigen::MatrixXd A;
  Eigen::VectorXd y;
};

struct SparseSolution {
  Eigen::VectorXd coefficients;  // zeros off support
  std::vector<int> support;      // ascending column indices
  double loo_error = std::numeric_limits<double>::infinity();
};

namespace detail {

inline double population_variance(const Eigen::VectorXd& y) {
  double mean = y.mean();
  return (y.array() - mean).square().mean();
}

// Relative leave-one-out error from residuals and leverages of an OLS fit.
// Residuals at the rounding floor of the response count as exact fits.
inline double loo_from_parts(const Eigen::VectorXd& residual, const Eigen::VectorXd& leverage,
                             double var_y, double ms_y) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < residual.size(); ++j) {
    if (leverage[j] >= 1.0 - 1e-10) throw LeverageOne("leverage reached 1; model interpolates");
    double e = residual[j] / (1.0 - leverage[j]);
    acc += e * e;
  }
  double num = acc / double(residual.size());
  double floor = 1e-28 * ms_y;
  if (num <= floor) return 0.0;
  if (var_y <= floor) return std::numeric_limits<double>::infinity();
  return num / var_y;
}

}  // namespace detail

// Relative LOO of the OLS fit restricted to the given columns:
// mean(((y - yhat)/(1 - h))^2) / var(y).
inline double loo_error(const DesignMatrix& dm, const std::vector<int>& support) {
  Eigen::Index n = dm.A.rows();
  Eigen::Index k = Eigen::Index(support.size());
  if (k == 0) {
    double var_y = detail::population_variance(dm.y);
    double num = dm.y.squaredNorm() / double(n);
    return num == 0.0 ? 0.0 : (var_y > 0.0 ? num / var_y : std::numeric_limits<double>::infinity());
  }
  if (k > n) throw RankDeficient("more active columns than observations");
  Eigen::MatrixXd sub(n, k);
  for (Eigen::Index c = 0; c < k; ++c) sub.col(c) = dm.A.col(support[std::size_t(c)]);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sub);
  Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
  Eigen::VectorXd leverage = thin_q.array().square().rowwise().sum();
  Eigen::VectorXd residual = dm.y - thin_q * (thin_q.transpose() * dm.y);
  return detail::loo_from_parts(residual, leverage, detail::population_variance(dm.y),
                                dm.y.array().square().mean());
}

// OLS through a (rank-revealing) QR decomposition of A itself.
inline SparseSolution ols_solve(const DesignMatrix& dm) {
  Eigen::Index n = dm.A.rows(), m = dm.A.cols();
  if (n <= m) throw RankDeficient("OLS needs n > number of regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.A);
  Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
  double rmax = rdiag.maxCoeff(), rmin = rdiag.minCoeff();
  if (!(rmin > 0.0) || rmax / rmin > 1e12)
    throw RankDeficient("design matrix condition number exceeds 1e12");
  SparseSolution sol;
  sol.coefficients = qr.solve(dm.y);
  sol.support.resize(std::size_t(m));
  for (Eigen::Index j = 0; j < m; ++j) sol.support[std::size_t(j)] = int(j);
  try {
    sol.loo_error = loo_error(dm, sol.support);
  } catch (const LeverageOne&) {
    sol.loo_error = std::numeric_limits<double>::infinity();
  }
  return sol;
}

// Least angle regression (Efron et al.) on unit-normalized columns. At every
// path step the active set is refit by OLS and scored by analytic LOO; the
// best-scoring step is returned (hybrid LAR).
inline SparseSolution lar_select(const DesignMatrix& dm, int max_steps) {
  Eigen::Index n = dm.A.rows(), m = dm.A.cols();
  if (n < 2) throw InsufficientData("LAR needs at least 2 observations");
  max_steps = std::min<int>(max_steps, int(std::min<Eigen::Index>(n - 1, m)));
  if (max_steps < 1) throw InsufficientData("LAR step budget is empty");

  Eigen::VectorXd norms(m);
  std::vector<bool> eligible(std::size_t(m), true);
  Eigen::MatrixXd an(n, m);  // normalized columns
  for (Eigen::Index j = 0; j < m; ++j) {
    double nj = dm.A.col(j).norm();
    norms[j] = nj;
    if (nj > 0.0) {
      an.col(j) = dm.A.col(j) / nj;
    } else {
      an.col(j).setZero();
      eligible[std::size_t(j)] = false;
    }
  }

  double var_y = detail::population_variance(dm.y);
  double ms_y = dm.y.array().square().mean();

  // incremental thin QR of the active columns (modified Gram-Schmidt,
  // re-orthogonalized), OLS residual and leverages updated per step
  Eigen::MatrixXd q_mat(n, max_steps);
  Eigen::MatrixXd r_mat = Eigen::MatrixXd::Zero(max_steps, max_steps);
  Eigen::VectorXd qty(max_steps);
  Eigen::VectorXd leverage = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ols_residual = dm.y;

  Eigen::VectorXd lars_residual = dm.y;
  std::vector<int> active;
  std::vector<double> loo_per_step;

  Eigen::VectorXd c = an.transpose() * lars_residual;
  if (!c.allFinite()) throw NumericalBreakdown("correlations are not finite");
  int next_col = -1;
  double cmax = -1.0;
  for (Eigen::Index j = 0; j < m; ++j)
    if (eligible[std::size_t(j)] && std::fabs(c[j]) > cmax) {
      cmax = std::fabs(c[j]);
      next_col = int(j);
    }
  if (next_col < 0) throw NumericalBreakdown("no usable columns");

  bool path_alive = true;
  while (int(active.size()) < max_steps && next_col >= 0) {
    int k = int(active.size());
    // append the column to the QR factors
    Eigen::VectorXd v = an.col(next_col);
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < k; ++i) {
        double rij = q_mat.col(i).dot(v);
        if (pass == 0)
          r_mat(i, k) = rij;
        else
          r_mat(i, k) += rij;
        v -= rij * q_mat.col(i);
      }
    double rkk = v.norm();
    if (rkk < 1e-10) break;  // collinear with the active set; stop the path
    r_mat(k, k) = rkk;
    q_mat.col(k) = v / rkk;
    active.push_back(next_col);
    eligible[std::size_t(next_col)] = false;

    double t = q_mat.col(k).dot(dm.y);
    qty[k] = t;
    ols_residual -= t * q_mat.col(k);
    leverage += q_mat.col(k).array().square().matrix();

    try {
      loo_per_step.push_back(detail::loo_from_parts(ols_residual, leverage, var_y, ms_y));
    } catch (const LeverageOne&) {
      loo_per_step.push_back(std::numeric_limits<double>::infinity());
    }

    if (int(active.size()) == max_steps || !path_alive) break;

    // LARS move to the next breakpoint
    c = an.transpose() * lars_residual;
    if (!c.allFinite()) throw NumericalBreakdown("correlations are not finite");
    double big_c = 0.0;
    for (int j : active) big_c = std::max(big_c, std::fabs(c[j]));

    int ka = int(active.size());
    Eigen::VectorXd s(ka);
    for (int i = 0; i < ka; ++i) s[i] = c[active[std::size_t(i)]] >= 0.0 ? 1.0 : -1.0;
    auto r_view = r_mat.topLeftCorner(ka, ka).triangularView<Eigen::Upper>();
    Eigen::VectorXd z = r_view.transpose().solve(s);
    Eigen::VectorXd w = r_view.solve(z);
    double sw = s.dot(w);
    if (!(sw > 0.0)) throw NumericalBreakdown("equiangular normalization failed");
    double aa = 1.0 / std::sqrt(sw);
    Eigen::VectorXd u = q_mat.leftCols(ka) * (r_mat.topLeftCorner(ka, ka) * (aa * w));
    Eigen::VectorXd a = an.transpose() * u;

    double gamma = big_c / aa;  // full move if nothing joins earlier
    next_col = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!eligible[std::size_t(j)]) continue;
      for (double cand : {(big_c - c[j]) / (aa - a[j]), (big_c + c[j]) / (aa + a[j])}) {
        if (cand > 1e-12 && cand < gamma) {
          gamma = cand;
          next_col = int(j);
        }
      }
    }
    if (!std::isfinite(gamma)) throw NumericalBreakdown("step length is not finite");
    lars_residual -= gamma * u;
    if (next_col < 0) path_alive = false;
  }

  if (active.empty()) throw NumericalBreakdown("LAR selected no columns");

  // sparser steps win ties within 1e-12 (relative LOO differences below that
  // are numerical noise)
  int best = 0;
  for (int k = 1; k < int(loo_per_step.size()); ++k)
    if (loo_per_step[std::size_t(k)] < loo_per_step[std::size_t(best)] - 1e-12) best = k;
  if (!std::isfinite(loo_per_step[std::size_t(best)]) && loo_per_step.size() > 1)
    throw LeverageOne("every path step interpolates the data");

  int kb = best + 1;
  Eigen::VectorXd beta_norm =
      r_mat.topLeftCorner(kb, kb).triangularView<Eigen::Upper>().solve(qty.head(kb));
  SparseSolution sol;
  sol.coefficients = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < kb; ++i) {
    int col = active[std::size_t(i)];
    sol.coefficients[col] = beta_norm[i] / norms[col];
  }
  sol.support.assign(active.begin(), active.begin() + kb);
  std::sort(sol.support.begin(), sol.support.end());
  sol.loo_error = loo_per_step[std::size_t(best)];
  return sol;
}

struct HyperparamResult {
  int p = 0;
  int r = 0;
  MultiIndexSet index_set;
  SparseSolution solution;
};

// Sweeps r (outer) and p (inner) in ascending order, fitting each candidate
// basis by hybrid LAR and scoring by relative LOO. A loop dimension stops
// after two consecutive steps without improvement. Ties within 1e-12 prefer
// the smaller (p, r).
inline HyperparamResult select_hyperparams(const std::vector<Eigen::MatrixXd>& uni_values,
                                           const Eigen::VectorXd& y,
                                           const std::vector<int>& p_range,
                                           const std::vector<int>& r_range, double q) {
  if (p_range.empty() || r_range.empty())
    throw OutOfRange("hyperparameter ranges must be nonempty");
  if (!std::is_sorted(p_range.begin(), p_range.end()) ||
      !std::is_sorted(r_range.begin(), r_range.end()))
    throw OutOfRange("hyperparameter ranges must be ascending");
  int d = int(uni_values.size());
  Eigen::Index n = y.size();

  constexpr double tie_eps = 1e-12;
  HyperparamResult best;
  bool have_best = false;
  auto better = [&](double loo, int p, int r) {
    if (!have_best) return true;
    if (loo < best.solution.loo_error - tie_eps) return true;
    if (loo <= best.solution.loo_error + tie_eps)
      return std::pair(p, r) < std::pair(best.p, best.r);
    return false;
  };

  double best_overall = std::numeric_limits<double>::infinity();
  int r_stall = 0;
  for (int r : r_range) {
    double best_this_r = std::numeric_limits<double>::infinity();
    int p_stall = 0;
    for (int p : p_range) {
      MultiIndexSet set = interaction_filter(hyperbolic_filter(total_degree_set(d, p), q),
                                             std::min(r, d));
      double loo = std::numeric_limits<double>::infinity();
      SparseSolution sol;
      bool ok = false;
      try {
        Eigen::MatrixXd a = assemble_design(uni_values, set);
        sol = lar_select({std::move(a), y}, int(std::min<Eigen::Index>(n - 1, Eigen::Index(set.size()))));
        loo = sol.loo_error;
        ok = true;
      } catch (const NumericalError&) {
        // candidate failed; keep sweeping
      }
      if (ok && better(loo, p, r)) {
        best = HyperparamResult{p, r, std::move(set), std::move(sol)};
        have_best = true;
      }
      if (ok && loo < best_this_r - tie_eps) {
        best_this_r = loo;
        p_stall = 0;
      } else {
        ++p_stall;
      }
      if (p_stall >= 2) break;
    }
    if (best_this_r < best_overall - tie_eps) {
      best_overall = best_this_r;
      r_stall = 0;
    } else {
      ++r_stall;
    }
    if (r_stall >= 2) break;
  }
  if (!have_best) throw NoFeasibleModel("no (p, r) candidate produced a fit");
  return best;
}

}  // namespace pceuq

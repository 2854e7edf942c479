#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/copula/pair_fit.hpp"
#include "pceuq/errors.hpp"
#include "pceuq/math/rng.hpp"

// Canonical vine (C-vine) models: greedy tau-based ordering, sequential
// AIC fitting tree by tree, Rosenblatt and inverse Rosenblatt transforms,
// and sampling. Tree t (0-based) is rooted at order[t]; its pair copulas
// couple order[t] with order[t+1+i] given order[0..t-1].

namespace pceuq {

struct CvineModel {
  std::vector<int> order;                      // 0-based variable indices
  std::vector<std::vector<PairCopula>> pairs;  // pairs[t][i], i = 0..d-2-t
  double loglik = 0.0;

  int dim() const { return int(order.size()); }

  const PairCopula& pair(int tree, int position) const {
    return pairs[std::size_t(tree)][std::size_t(position)];
  }
};

// Greedy C-vine ordering: each root maximizes the sum of |tau| to the
// remaining variables. Exact ties (the final two variables always tie) break
// on the |tau| sum to roots already chosen, which keeps the ordering
// equivariant under column permutations; the lowest index is the last resort.
inline std::vector<int> select_cvine_order(const Eigen::MatrixXd& pseudo_obs) {
  int d = int(pseudo_obs.cols());
  if (d < 2) throw InputError("vine ordering needs d >= 2");
  Eigen::MatrixXd tau = kendall_tau_matrix(pseudo_obs).cwiseAbs();
  std::vector<int> remaining(d);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> order;
  while (remaining.size() > 1) {
    int best = remaining.front();
    double best_sum = -1.0, best_chosen = -1.0;
    for (int i : remaining) {
      double s = 0.0;
      for (int j : remaining)
        if (j != i) s += tau(i, j);
      double sc = 0.0;
      for (int j : order) sc += tau(i, j);
      if (s > best_sum + 1e-15 ||
          (std::fabs(s - best_sum) <= 1e-15 && sc > best_chosen + 1e-15)) {
        best_sum = s;
        best_chosen = sc;
        best = i;
      }
    }
    order.push_back(best);
    remaining.erase(std::find(remaining.begin(), remaining.end(), best));
  }
  order.push_back(remaining.front());
  return order;
}

// D-vine ordering: maximize the path sum of |tau|. Exact over all open paths
// for d <= 8, greedy nearest-neighbour extension beyond.
inline std::vector<int> select_dvine_order(const Eigen::MatrixXd& pseudo_obs) {
  int d = int(pseudo_obs.cols());
  if (d < 2) throw InputError("vine ordering needs d >= 2");
  Eigen::MatrixXd tau = kendall_tau_matrix(pseudo_obs).cwiseAbs();
  if (d <= 8) {
    std::vector<int> perm(d), best;
    std::iota(perm.begin(), perm.end(), 0);
    double best_sum = -1.0;
    do {
      if (perm.front() > perm.back()) continue;  // a path equals its reverse
      double s = 0.0;
      for (int k = 0; k + 1 < d; ++k) s += tau(perm[std::size_t(k)], perm[std::size_t(k) + 1]);
      if (s > best_sum + 1e-15) {
        best_sum = s;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  // greedy: start from the strongest edge, extend the cheaper end
  int a = 0, b = 1;
  double best_edge = -1.0;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j)
      if (tau(i, j) > best_edge + 1e-15) {
        best_edge = tau(i, j);
        a = i;
        b = j;
      }
  std::vector<int> path{a, b};
  std::vector<bool> used(std::size_t(d), false);
  used[std::size_t(a)] = used[std::size_t(b)] = true;
  while (int(path.size()) < d) {
    int front = path.front(), back = path.back();
    int best_v = -1;
    bool at_front = true;
    double best_gain = -1.0;
    for (int v = 0; v < d; ++v) {
      if (used[std::size_t(v)]) continue;
      if (tau(front, v) > best_gain + 1e-15) {
        best_gain = tau(front, v);
        best_v = v;
        at_front = true;
      }
      if (tau(back, v) > best_gain + 1e-15) {
        best_gain = tau(back, v);
        best_v = v;
        at_front = false;
      }
    }
    used[std::size_t(best_v)] = true;
    if (at_front)
      path.insert(path.begin(), best_v);
    else
      path.push_back(best_v);
  }
  return path;
}

// Sequential C-vine fit: tree-1 pairs on raw pseudo-observations, deeper
// trees on h-function transforms of the already fitted pairs. Every pair is
// selected by AIC. No final joint-likelihood refinement is performed.
inline CvineModel fit_cvine(const Eigen::MatrixXd& pseudo_obs) {
  int d = int(pseudo_obs.cols());
  Eigen::Index n = pseudo_obs.rows();
  if (d < 2) throw InputError("fit_cvine needs d >= 2");
  if (n < 10) throw FitFailure("vine fit needs at least 10 observations");

  CvineModel model;
  model.order = select_cvine_order(pseudo_obs);

  // V holds conditional pseudo-observations, columns in vine order
  Eigen::MatrixXd v(n, d);
  for (int j = 0; j < d; ++j) v.col(j) = pseudo_obs.col(model.order[std::size_t(j)]);

  model.pairs.resize(std::size_t(d) - 1);
  for (int t = 0; t < d - 1; ++t) {
    model.pairs[std::size_t(t)].resize(std::size_t(d - 1 - t));
    for (int i = 0; i < d - 1 - t; ++i) {
      Eigen::MatrixXd uv(n, 2);
      uv.col(0) = v.col(t + 1 + i);
      uv.col(1) = v.col(t);
      PairFitResult res = fit_pair_full(uv);
      model.pairs[std::size_t(t)][std::size_t(i)] = res.copula;
      model.loglik += res.loglik;
    }
    // condition the remaining columns on the root of this tree
    for (int i = 0; i < d - 1 - t; ++i) {
      const PairCopula& pc = model.pair(t, i);
      for (Eigen::Index row = 0; row < n; ++row)
        v(row, t + 1 + i) = h_function(pc, v(row, t + 1 + i), v(row, t));
    }
  }
  return model;
}

// Rosenblatt transform: u (original variable positions) to independent
// uniforms z. Component z[order[j]] is the conditional cdf of variable
// order[j] given the earlier ones in the vine order.
inline Eigen::VectorXd rosenblatt(const CvineModel& model, const Eigen::VectorXd& u) {
  int d = model.dim();
  if (u.size() != d) throw LengthMismatch("rosenblatt: dimension mismatch");
  Eigen::VectorXd a(d);
  for (int j = 0; j < d; ++j)
    a[j] = copula_detail::clamp_u(u[model.order[std::size_t(j)]]);
  Eigen::VectorXd z(d);
  z[model.order[0]] = a[0];
  for (int t = 0; t < d - 1; ++t) {
    double cond = a[t];
    for (int j = d - 1; j >= t + 1; --j)
      a[j] = h_function(model.pair(t, j - t - 1), a[j], cond);
    z[model.order[std::size_t(t) + 1]] = a[t + 1];
  }
  return z;
}

// Inverse Rosenblatt: independent uniforms z to dependent uniforms u with
// the model's copula.
inline Eigen::VectorXd inverse_rosenblatt(const CvineModel& model, const Eigen::VectorXd& z) {
  int d = model.dim();
  if (z.size() != d) throw LengthMismatch("inverse_rosenblatt: dimension mismatch");
  Eigen::VectorXd zv(d);
  for (int j = 0; j < d; ++j)
    zv[j] = copula_detail::clamp_u(z[model.order[std::size_t(j)]]);
  // cond[t] = F(w_t | w_0..w_{t-1}) equals zv[t] by construction
  Eigen::VectorXd u(d);
  u[model.order[0]] = zv[0];
  for (int i = 1; i < d; ++i) {
    double val = zv[i];
    for (int t = i - 1; t >= 0; --t) val = inv_h(model.pair(t, i - t - 1), val, zv[t]);
    u[model.order[std::size_t(i)]] = val;
  }
  return u;
}

inline Eigen::MatrixXd rosenblatt(const CvineModel& model, const Eigen::MatrixXd& u) {
  Eigen::MatrixXd z(u.rows(), u.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    z.row(i) = rosenblatt(model, u.row(i).transpose().eval()).transpose();
  return z;
}

inline Eigen::MatrixXd inverse_rosenblatt(const CvineModel& model, const Eigen::MatrixXd& z) {
  Eigen::MatrixXd u(z.rows(), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    u.row(i) = inverse_rosenblatt(model, z.row(i).transpose().eval()).transpose();
  return u;
}

// n draws from the vine copula.
inline Eigen::MatrixXd sample_cvine(const CvineModel& model, Eigen::Index n, Rng& rng) {
  int d = model.dim();
  Eigen::MatrixXd u(n, d);
  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) z[j] = rng.uniform();
    u.row(i) = inverse_rosenblatt(model, z).transpose();
  }
  return u;
}

// Independence vine of dimension d (identity Rosenblatt transform).
inline CvineModel independence_cvine(int d) {
  CvineModel model;
  model.order.resize(std::size_t(d));
  std::iota(model.order.begin(), model.order.end(), 0);
  model.pairs.resize(std::size_t(d) - 1);
  for (int t = 0; t < d - 1; ++t)
    model.pairs[std::size_t(t)].assign(std::size_t(d - 1 - t), PairCopula{});
  return model;
}

}  // namespace pceuq

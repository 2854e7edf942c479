#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/errors.hpp"
#include "pceuq/orthopoly.hpp"

// Truncated multi-index sets A^{d,p,q,r} and evaluation of the
// tensor-product basis Psi_alpha(x) = prod_i phi_{alpha_i}(x_i).

namespace pceuq {

struct MultiIndex {
  std::vector<int> alpha;

  int total_degree() const {
    int s = 0;
    for (int a : alpha) s += a;
    return s;
  }

  double q_norm(double q) const {
    double s = 0.0;
    for (int a : alpha)
      if (a > 0) s += std::pow(double(a), q);
    return std::pow(s, 1.0 / q);
  }

  int rank() const {
    int s = 0;
    for (int a : alpha) s += (a > 0) ? 1 : 0;
    return s;
  }
};

struct MultiIndexSet {
  int dim = 0;
  int degree = 0;      // p
  double q = 1.0;      // hyperbolic exponent applied (1 = none)
  int max_rank = 0;    // r cap applied (dim = none)
  std::vector<MultiIndex> indices;

  std::size_t size() const { return indices.size(); }

  // largest per-dimension degree, for sizing univariate bases
  int max_component_degree() const {
    int m = 0;
    for (const auto& mi : indices)
      for (int a : mi.alpha) m = std::max(m, a);
    return m;
  }
};

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= double(n - k + i) / double(i);
  return r < 9e15 ? std::round(r) : r;
}

// All alpha with |alpha| <= p, sorted by (total degree, lexicographic).
inline MultiIndexSet total_degree_set(int d, int p) {
  if (d < 1 || p < 0) throw OutOfRange("total_degree_set needs d >= 1, p >= 0");
  if (binomial(d + p, p) > 1e7) throw SizeOverflow("basis would exceed 10^7 terms");
  MultiIndexSet set;
  set.dim = d;
  set.degree = p;
  set.q = 1.0;
  set.max_rank = d;
  std::vector<int> alpha(d, 0);
  // enumerate compositions of s into d parts, for s = 0..p
  for (int s = 0; s <= p; ++s) {
    std::fill(alpha.begin(), alpha.end(), 0);
    alpha[d - 1] = s;
    while (true) {
      MultiIndex mi;
      mi.alpha.assign(alpha.rbegin(), alpha.rend());
      set.indices.push_back(std::move(mi));
      // next composition (colex on reversed storage)
      int i = d - 1;
      while (i > 0 && alpha[i] == 0) --i;
      if (i == 0) break;
      int v = alpha[i];
      alpha[i] = 0;
      alpha[i - 1] += 1;
      alpha[d - 1] = v - 1;
    }
  }
  std::sort(set.indices.begin(), set.indices.end(), [](const MultiIndex& a, const MultiIndex& b) {
    int da = a.total_degree(), db = b.total_degree();
    if (da != db) return da < db;
    return a.alpha < b.alpha;
  });
  return set;
}

// Keeps alpha with ||alpha||_q <= p. q = 1 leaves a total-degree set
// unchanged.
inline MultiIndexSet hyperbolic_filter(const MultiIndexSet& s, double q) {
  if (!(q > 0.0 && q <= 1.0)) throw OutOfRange("hyperbolic exponent must lie in (0,1]");
  MultiIndexSet out = s;
  out.q = std::min(s.q, q);
  out.indices.clear();
  double cap = double(s.degree) * (1.0 + 1e-12);
  for (const auto& mi : s.indices)
    if (mi.q_norm(q) <= cap) out.indices.push_back(mi);
  return out;
}

// Keeps alpha with at most r nonzero components.
inline MultiIndexSet interaction_filter(const MultiIndexSet& s, int r) {
  if (r < 1) throw OutOfRange("interaction cap must be >= 1");
  MultiIndexSet out = s;
  out.max_rank = std::min(s.max_rank, r);
  out.indices.clear();
  for (const auto& mi : s.indices)
    if (mi.rank() <= r) out.indices.push_back(mi);
  return out;
}

// Values of each univariate basis at x_i, stacked; scratch layout for design
// rows.
inline void eval_design_row(const std::vector<OrthonormalBasis1D>& bases, const MultiIndexSet& s,
                            const Eigen::VectorXd& x, double* out) {
  int d = s.dim;
  if (int(bases.size()) != d || x.size() != d)
    throw DegreeMismatch("eval_design_row: dimension mismatch");
  int need = s.max_component_degree();
  for (int i = 0; i < d; ++i)
    if (bases[std::size_t(i)].degree_max < need)
      throw DegreeMismatch("univariate basis shorter than the index set needs");
  thread_local std::vector<double> uni, phi;
  int stride = need + 1;
  uni.assign(std::size_t(d) * std::size_t(stride), 0.0);
  for (int i = 0; i < d; ++i) {
    const OrthonormalBasis1D& b = bases[std::size_t(i)];
    phi.assign(std::size_t(b.degree_max) + 1, 0.0);
    eval_basis_into(b, x[i], phi.data());
    std::copy(phi.begin(), phi.begin() + stride, uni.begin() + std::size_t(i) * stride);
  }
  for (std::size_t k = 0; k < s.indices.size(); ++k) {
    double prod = 1.0;
    const auto& alpha = s.indices[k].alpha;
    for (int i = 0; i < d; ++i) prod *= uni[std::size_t(i) * stride + alpha[std::size_t(i)]];
    out[k] = prod;
  }
}

inline Eigen::VectorXd eval_design_row(const std::vector<OrthonormalBasis1D>& bases,
                                       const MultiIndexSet& s, const Eigen::VectorXd& x) {
  Eigen::VectorXd row(s.size());
  eval_design_row(bases, s, x, row.data());
  return row;
}

// n x |A| design matrix from per-dimension univariate basis values.
// uni_values[i] is an n x (p_i+1) matrix of phi-degree values for dimension i.
inline Eigen::MatrixXd assemble_design(const std::vector<Eigen::MatrixXd>& uni_values,
                                       const MultiIndexSet& s) {
  int d = s.dim;
  if (int(uni_values.size()) != d) throw DegreeMismatch("assemble_design: dimension mismatch");
  Eigen::Index n = uni_values.front().rows();
  for (const auto& u : uni_values)
    if (u.cols() < s.max_component_degree() + 1)
      throw DegreeMismatch("univariate basis values shorter than the index set needs");
  Eigen::MatrixXd a = Eigen::MatrixXd::Ones(n, Eigen::Index(s.size()));
  for (std::size_t k = 0; k < s.indices.size(); ++k) {
    const auto& alpha = s.indices[k].alpha;
    for (int i = 0; i < d; ++i) {
      int deg = alpha[std::size_t(i)];
      if (deg > 0) a.col(Eigen::Index(k)).array() *= uni_values[std::size_t(i)].col(deg).array();
    }
  }
  return a;
}

}  // namespace pceuq

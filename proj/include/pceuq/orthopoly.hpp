#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/errors.hpp"
#include "pceuq/marginals.hpp"
#include "pceuq/math/gauss_legendre.hpp"

// Univariate polynomials orthonormal with respect to a marginal, stored as
// the three-term recurrence of the underlying monic family:
//   pi_{k+1}(x) = (x - a_k) pi_k(x) - b_k pi_{k-1}(x),   b_0 = 1,
// with ||pi_k||^2 = b_0 b_1 ... b_k under the (normalized) measure. The
// orthonormal family is phi_k = pi_k / ||pi_k||.

namespace pceuq {

// Orthonormality from an empirical measure is unreliable past this degree.
constexpr int max_basis_degree = 15;

struct OrthonormalBasis1D {
  int degree_max = 0;
  std::vector<double> recurrence_a;  // a_0 .. a_p
  std::vector<double> recurrence_b;  // b_0 .. b_p, all positive, b_0 = 1
  std::vector<double> normalizers;   // ||pi_0|| .. ||pi_p||

  static OrthonormalBasis1D from_recurrence(std::vector<double> a, std::vector<double> b) {
    OrthonormalBasis1D basis;
    if (a.empty() || a.size() != b.size())
      throw DegreeMismatch("recurrence arrays must be nonempty and equally sized");
    basis.degree_max = int(a.size()) - 1;
    basis.recurrence_a = std::move(a);
    basis.recurrence_b = std::move(b);
    basis.normalizers.resize(basis.recurrence_b.size());
    double prod = 1.0;
    for (std::size_t k = 0; k < basis.recurrence_b.size(); ++k) {
      if (!(basis.recurrence_b[k] > 0.0))
        throw QuadratureFailure("nonpositive recurrence coefficient b");
      prod *= basis.recurrence_b[k];
      basis.normalizers[k] = std::sqrt(prod);
    }
    return basis;
  }
};

// phi_0(x) .. phi_p(x) by the forward orthonormal recurrence, written to out
// (length p+1).
inline void eval_basis_into(const OrthonormalBasis1D& b, double x, double* out) {
  int p = b.degree_max;
  out[0] = 1.0;
  if (p == 0) return;
  double sqb1 = std::sqrt(b.recurrence_b[1]);
  out[1] = (x - b.recurrence_a[0]) / sqb1;
  for (int k = 1; k < p; ++k) {
    double sqbk = std::sqrt(b.recurrence_b[k]);
    double sqbk1 = std::sqrt(b.recurrence_b[k + 1]);
    out[k + 1] = ((x - b.recurrence_a[k]) * out[k] - sqbk * out[k - 1]) / sqbk1;
  }
}

inline Eigen::VectorXd eval_basis(const OrthonormalBasis1D& b, double x) {
  Eigen::VectorXd v(b.degree_max + 1);
  eval_basis_into(b, x, v.data());
  return v;
}

// Shifted Legendre family, orthonormal w.r.t. the uniform density on
// [lo, hi]: a_k = (lo+hi)/2, b_k = (hi-lo)^2 k^2 / (4 (4k^2 - 1)).
inline OrthonormalBasis1D legendre_basis(double lo, double hi, int p) {
  if (!(lo < hi)) throw InvalidInterval("legendre_basis needs lo < hi");
  if (p < 0 || p > max_basis_degree) throw OutOfRange("basis degree must lie in [0, 15]");
  double w2 = (hi - lo) * (hi - lo);
  std::vector<double> a(p + 1, 0.5 * (lo + hi));
  std::vector<double> b(p + 1, 1.0);
  for (int k = 1; k <= p; ++k) b[k] = w2 * double(k) * double(k) / (4.0 * (4.0 * k * k - 1.0));
  return OrthonormalBasis1D::from_recurrence(std::move(a), std::move(b));
}

namespace detail {

struct DiscreteMeasure {
  std::vector<double> nodes;
  std::vector<double> weights;  // include the density factor, normalized to sum 1
};

// Composite Gauss-Legendre discretization of a marginal density. Panel
// boundaries follow the kernel centers (merged below h/4, split above 2h) so
// every panel resolves the Gaussian-mixture scale.
inline DiscreteMeasure discretize_marginal(const Marginal& marginal, int nodes_per_panel) {
  std::vector<double> boundaries;
  if (const auto* kde = std::get_if<KdeMarginal>(&marginal)) {
    double h = kde->bandwidth();
    boundaries.push_back(kde->support_lo());
    for (double c : kde->centers())
      if (c - boundaries.back() >= 0.25 * h) boundaries.push_back(c);
    if (kde->support_hi() - boundaries.back() < 0.25 * h) boundaries.pop_back();
    boundaries.push_back(kde->support_hi());
    // Split panels wider than 2h; stretches farther than 12h from both
    // bounding centers carry no kernel mass and stay a single panel.
    std::vector<double> refined;
    refined.push_back(boundaries.front());
    auto split_uniform = [&](double a, double b) {
      int pieces = std::max(1, int(std::ceil((b - a) / (2.0 * h))));
      for (int k = 1; k <= pieces; ++k) refined.push_back(a + (b - a) * k / pieces);
    };
    for (std::size_t i = 1; i < boundaries.size(); ++i) {
      double a = boundaries[i - 1], b = boundaries[i];
      if (b - a <= 24.0 * h) {
        split_uniform(a, b);
      } else {
        split_uniform(a, a + 12.0 * h);
        refined.push_back(b - 12.0 * h);
        split_uniform(b - 12.0 * h, b);
      }
    }
    boundaries = std::move(refined);
  } else {
    const auto& u = std::get<BoundedUniformMarginal>(marginal);
    int pieces = 8;
    for (int k = 0; k <= pieces; ++k)
      boundaries.push_back(u.lo + (u.hi - u.lo) * k / pieces);
  }

  const QuadratureRule& rule = gauss_legendre(nodes_per_panel);
  DiscreteMeasure measure;
  measure.nodes.reserve((boundaries.size() - 1) * rule.nodes.size());
  measure.weights.reserve(measure.nodes.capacity());
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    double a = boundaries[i - 1], b = boundaries[i];
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      double x = mid + half * rule.nodes[q];
      double w = half * rule.weights[q] * marginal_pdf(marginal, x);
      measure.nodes.push_back(x);
      measure.weights.push_back(w);
    }
  }
  double mass = 0.0;
  for (double w : measure.weights) mass += w;
  if (!(mass > 0.0)) throw QuadratureFailure("marginal density has no quadrature mass");
  for (double& w : measure.weights) w /= mass;
  return measure;
}

}  // namespace detail

// Discretized Stieltjes procedure: recurrence coefficients from quadrature
// inner products against the marginal density. The resulting basis is
// verified to be orthonormal on an independent, finer rule; deviations above
// 1e-4 signal that the requested degree exceeds what the measure resolves.
inline OrthonormalBasis1D stieltjes_basis(const Marginal& marginal, int p) {
  if (p < 0 || p > max_basis_degree) throw OutOfRange("basis degree must lie in [0, 15]");
  detail::DiscreteMeasure measure = detail::discretize_marginal(marginal, 64);
  std::size_t m = measure.nodes.size();

  std::vector<double> a(p + 1, 0.0), b(p + 1, 1.0);
  std::vector<double> pi_prev(m, 0.0), pi_cur(m, 1.0), pi_next(m);
  double norm_cur = 1.0;  // <pi_k, pi_k>
  for (int k = 0; k <= p; ++k) {
    double xss = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      xss += measure.weights[i] * measure.nodes[i] * pi_cur[i] * pi_cur[i];
    a[k] = xss / norm_cur;
    if (k == p) break;
    double norm_next = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      pi_next[i] = (measure.nodes[i] - a[k]) * pi_cur[i] - b[k] * pi_prev[i];
      norm_next += measure.weights[i] * pi_next[i] * pi_next[i];
    }
    b[k + 1] = norm_next / norm_cur;
    // b collapsing relative to the variance scale b_1 means the measure has
    // effectively exhausted its distinct support
    if (!(b[k + 1] > 1e-12 * b[1]))
      throw QuadratureFailure("measure does not support the requested degree");
    std::swap(pi_prev, pi_cur);
    std::swap(pi_cur, pi_next);
    norm_cur = norm_next;
  }

  OrthonormalBasis1D basis = OrthonormalBasis1D::from_recurrence(std::move(a), std::move(b));

  // orthonormality self-check on a finer rule
  detail::DiscreteMeasure check = detail::discretize_marginal(marginal, 80);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p + 1, p + 1);
  std::vector<double> phi(p + 1);
  for (std::size_t i = 0; i < check.nodes.size(); ++i) {
    eval_basis_into(basis, check.nodes[i], phi.data());
    for (int r = 0; r <= p; ++r)
      for (int c = r; c <= p; ++c) gram(r, c) += check.weights[i] * phi[r] * phi[c];
  }
  double err = 0.0;
  for (int r = 0; r <= p; ++r)
    for (int c = r; c <= p; ++c)
      err = std::max(err, std::fabs(gram(r, c) - (r == c ? 1.0 : 0.0)));
  if (err > 1e-4)
    throw QuadratureFailure("orthonormality check failed; degree too high for this measure");
  return basis;
}

}  // namespace pceuq

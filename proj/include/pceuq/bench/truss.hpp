#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "pceuq/bench/ishigami.hpp"  // Dataset
#include "pceuq/copula/vine.hpp"
#include "pceuq/errors.hpp"
#include "pceuq/math/rng.hpp"

// 23-bar planar truss, 24 m long and 2 m high: lower chord nodes at
// x = 0,4,...,24 (y = 0), upper nodes at x = 2,6,...,22 (y = 2), chords plus
// diagonals connecting each upper node to its two adjacent lower nodes.
// Pinned at (0,0), roller at (24,0); vertical loads P1..P6 act downward on
// the upper nodes; the response is the downward midspan displacement at
// (12,0). Horizontal bars carry (E1,A1), diagonals (E2,A2).

namespace pceuq::bench {

struct TrussGeometry {
  std::array<std::array<double, 2>, 13> nodes;
  // bar = {node a, node b, group}, group 0 horizontal / 1 diagonal
  std::array<std::array<int, 3>, 23> bars;

  TrussGeometry() {
    for (int i = 0; i < 7; ++i) nodes[std::size_t(i)] = {4.0 * i, 0.0};
    for (int i = 0; i < 6; ++i) nodes[std::size_t(7 + i)] = {2.0 + 4.0 * i, 2.0};
    int b = 0;
    for (int i = 0; i < 6; ++i) bars[std::size_t(b++)] = {i, i + 1, 0};          // lower chord
    for (int i = 0; i < 5; ++i) bars[std::size_t(b++)] = {7 + i, 8 + i, 0};      // upper chord
    for (int i = 0; i < 6; ++i) {
      bars[std::size_t(b++)] = {7 + i, i, 1};      // up-left diagonal
      bars[std::size_t(b++)] = {7 + i, i + 1, 1};  // up-right diagonal
    }
  }
};

inline const TrussGeometry& truss_geometry() {
  static const TrussGeometry geometry;
  return geometry;
}

// Direct-stiffness solve; returns the downward displacement (m) at midspan.
inline double truss_solve(double e1, double e2, double a1, double a2,
                          const Eigen::VectorXd& loads) {
  if (!(e1 > 0 && e2 > 0 && a1 > 0 && a2 > 0))
    throw InputError("truss_solve needs positive moduli and sections");
  if (loads.size() != 6) throw LengthMismatch("truss_solve expects 6 loads");
  const TrussGeometry& geom = truss_geometry();
  constexpr int n_dof = 26;
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n_dof, n_dof);
  for (const auto& bar : geom.bars) {
    const auto& pa = geom.nodes[std::size_t(bar[0])];
    const auto& pb = geom.nodes[std::size_t(bar[1])];
    double dx = pb[0] - pa[0], dy = pb[1] - pa[1];
    double length = std::hypot(dx, dy);
    double c = dx / length, s = dy / length;
    double ea = (bar[2] == 0 ? e1 * a1 : e2 * a2) / length;
    int dofs[4] = {2 * bar[0], 2 * bar[0] + 1, 2 * bar[1], 2 * bar[1] + 1};
    double t[4] = {c, s, -c, -s};
    for (int r = 0; r < 4; ++r)
      for (int cidx = 0; cidx < 4; ++cidx) k(dofs[r], dofs[cidx]) += ea * t[r] * t[cidx];
  }

  Eigen::VectorXd f = Eigen::VectorXd::Zero(n_dof);
  for (int i = 0; i < 6; ++i) f[2 * (7 + i) + 1] = -loads[i];

  // pinned at node 0 (both dofs), roller at node 6 (vertical dof)
  std::vector<int> free_dofs;
  for (int dof = 0; dof < n_dof; ++dof)
    if (dof != 0 && dof != 1 && dof != 13) free_dofs.push_back(dof);
  Eigen::Index m = Eigen::Index(free_dofs.size());
  Eigen::MatrixXd kf(m, m);
  Eigen::VectorXd ff(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    ff[r] = f[free_dofs[std::size_t(r)]];
    for (Eigen::Index c = 0; c < m; ++c)
      kf(r, c) = k(free_dofs[std::size_t(r)], free_dofs[std::size_t(c)]);
  }
  Eigen::LDLT<Eigen::MatrixXd> solver(kf);
  if (solver.info() != Eigen::Success)
    throw SingularStiffness("stiffness factorization failed");
  Eigen::VectorXd u = solver.solve(ff);
  if (!u.allFinite()) throw SingularStiffness("assembled system is rank-deficient");
  // vertical dof of the midspan node (x = 12, lower chord node 3) is global
  // dof 7; it sits at free-dof position 5 (after removing dofs 0 and 1)
  double uy = u[5];
  return -uy;
}

// Input model: independent lognormal structure variables, Gumbel-marginal
// loads coupled by a C-vine of Gumbel(1.1) pairs rooted at P1.
struct TrussInputModel {
  double e_mean = 2.1e11, e_std = 2.1e10;
  double a1_mean = 2.0e-3, a1_std = 2.0e-4;
  double a2_mean = 1.0e-3, a2_std = 1.0e-4;
  double p_mean = 5.0e4, p_std = 7.5e3;
  double vine_theta = 1.1;
};

inline double lognormal_quantile(double mean, double sd, double p) {
  double s2 = std::log(1.0 + (sd / mean) * (sd / mean));
  double mu = std::log(mean) - 0.5 * s2;
  return std::exp(mu + std::sqrt(s2) * normal_quantile(p));
}

inline double gumbel_beta(double sd) { return std::sqrt(6.0) * sd / std::numbers::pi; }

inline double gumbel_alpha(double mean, double sd) {
  constexpr double euler_gamma = 0.57721566490153286;
  return mean - euler_gamma * gumbel_beta(sd);
}

inline double gumbel_quantile(double mean, double sd, double p) {
  return gumbel_alpha(mean, sd) - gumbel_beta(sd) * std::log(-std::log(p));
}

inline CvineModel truss_load_vine(double theta = 1.1) {
  CvineModel vine = independence_cvine(6);
  for (int i = 0; i < 5; ++i)
    vine.pairs[0][std::size_t(i)] = PairCopula{CopulaFamily::gumbel, Rotation::r0, {theta}};
  return vine;
}

// n draws of (E1, E2, A1, A2, P1..P6) with the midspan displacement.
inline Dataset truss_sample(Eigen::Index n, std::uint64_t seed,
                            const TrussInputModel& input = TrussInputModel{}) {
  const CvineModel vine = truss_load_vine(input.vine_theta);
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, 10);
  data.y.resize(n);
  Eigen::VectorXd z(6), loads(6);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.x(i, 0) = lognormal_quantile(input.e_mean, input.e_std, rng.uniform());
    data.x(i, 1) = lognormal_quantile(input.e_mean, input.e_std, rng.uniform());
    data.x(i, 2) = lognormal_quantile(input.a1_mean, input.a1_std, rng.uniform());
    data.x(i, 3) = lognormal_quantile(input.a2_mean, input.a2_std, rng.uniform());
    for (int j = 0; j < 6; ++j) z[j] = rng.uniform();
    Eigen::VectorXd u = inverse_rosenblatt(vine, z);
    for (int j = 0; j < 6; ++j) {
      loads[j] = gumbel_quantile(input.p_mean, input.p_std, u[j]);
      data.x(i, 4 + j) = loads[j];
    }
    data.y[i] = truss_solve(data.x(i, 0), data.x(i, 1), data.x(i, 2), data.x(i, 3), loads);
  }
  return data;
}

}  // namespace pceuq::bench

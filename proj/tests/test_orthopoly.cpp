#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "pceuq/marginals.hpp"
#include "pceuq/math/rng.hpp"
#include "pceuq/orthopoly.hpp"

using namespace pceuq;

namespace {

// Quadrature Gram matrix oracle: integrates phi_i phi_j f over the support
// with a composite rule independent of the one used by stieltjes_basis.
Eigen::MatrixXd gram_oracle(const OrthonormalBasis1D& basis, const Marginal& marginal,
                            int panels = 800, int nodes = 24) {
  double lo = marginal_support_lo(marginal), hi = marginal_support_hi(marginal);
  int p = basis.degree_max;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(p + 1, p + 1);
  std::vector<double> phi(p + 1);
  const QuadratureRule& rule = gauss_legendre(nodes);
  for (int k = 0; k < panels; ++k) {
    double a = lo + (hi - lo) * k / panels;
    double b = lo + (hi - lo) * (k + 1) / panels;
    double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      double x = mid + half * rule.nodes[q];
      double w = half * rule.weights[q] * marginal_pdf(marginal, x);
      eval_basis_into(basis, x, phi.data());
      for (int r = 0; r <= p; ++r)
        for (int c = 0; c <= p; ++c) g(r, c) += w * phi[r] * phi[c];
    }
  }
  return g;
}

}  // namespace

TEST_CASE("shifted legendre on [0,1] closed forms") {
  OrthonormalBasis1D b = legendre_basis(0.0, 1.0, 3);
  // phi_1(z) = sqrt(3) (2z - 1)
  CHECK(eval_basis(b, 0.5)[1] == Catch::Approx(0.0).margin(1e-14));
  CHECK(eval_basis(b, 1.0)[1] == Catch::Approx(std::sqrt(3.0)).epsilon(1e-13));
  CHECK(eval_basis(b, 0.0)[1] == Catch::Approx(-std::sqrt(3.0)).epsilon(1e-13));
  for (double x : {0.1, 0.33, 0.9}) CHECK(eval_basis(b, x)[0] == 1.0);
}

TEST_CASE("legendre normalization by quadrature") {
  OrthonormalBasis1D b = legendre_basis(0.0, 1.0, 4);
  double ip = integrate_gl([&](double z) { return eval_basis(b, z)[2] * eval_basis(b, z)[2]; },
                           0.0, 1.0, 64);
  CHECK(ip == Catch::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("legendre orthogonality on a symmetric interval") {
  double pi = std::numbers::pi;
  OrthonormalBasis1D b = legendre_basis(-pi, pi, 2);
  double ip = integrate_gl(
      [&](double x) {
        Eigen::VectorXd v = eval_basis(b, x);
        return v[1] * v[2] / (2.0 * pi);
      },
      -pi, pi, 64);
  CHECK(ip == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("legendre rejects bad input") {
  CHECK_THROWS_AS(legendre_basis(1.0, 0.0, 3), InvalidInterval);
  CHECK_THROWS_AS(legendre_basis(0.0, 1.0, 16), OutOfRange);
}

TEST_CASE("stieltjes on the uniform measure reproduces legendre") {
  OrthonormalBasis1D ref = legendre_basis(0.0, 1.0, 6);
  OrthonormalBasis1D got = stieltjes_basis(BoundedUniformMarginal(0.0, 1.0), 6);
  for (int k = 0; k <= 6; ++k) {
    CHECK(got.recurrence_a[k] == Catch::Approx(ref.recurrence_a[k]).margin(1e-8));
    CHECK(got.recurrence_b[k] == Catch::Approx(ref.recurrence_b[k]).margin(1e-8));
  }
}

TEST_CASE("stieltjes on a single gaussian kernel reproduces hermite") {
  // probabilists' Hermite: a_k = 0, b_k = k
  KdeMarginal kernel = KdeMarginal::from_parts({0.0}, 1.0);
  OrthonormalBasis1D b = stieltjes_basis(kernel, 6);
  for (int k = 0; k <= 6; ++k) {
    CHECK(b.recurrence_a[k] == Catch::Approx(0.0).margin(1e-6));
    if (k >= 1) CHECK(b.recurrence_b[k] == Catch::Approx(double(k)).epsilon(1e-6));
  }
}

TEST_CASE("stieltjes gram matrix is the identity") {
  Rng rng(77);
  std::vector<double> sample(150);
  for (double& v : sample) v = rng.uniform(-1.0, 1.0) + 0.3 * rng.normal();
  KdeMarginal kde = fit_kde(sample);
  OrthonormalBasis1D basis = stieltjes_basis(kde, 5);
  Eigen::MatrixXd g = gram_oracle(basis, kde);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(6, 6);
  CHECK((g - eye).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("stieltjes gram identity up to degree 10") {
  Rng rng(78);
  std::vector<double> sample(400);
  for (double& v : sample) v = rng.normal(0.0, 1.0);
  KdeMarginal kde = fit_kde(sample);
  OrthonormalBasis1D basis = stieltjes_basis(kde, 10);
  Eigen::MatrixXd g = gram_oracle(basis, kde, 1600, 24);
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(11, 11);
  CHECK((g - eye).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("stieltjes detects unresolvable degrees") {
  // two narrow spikes carry only two effective support points
  KdeMarginal spikes = KdeMarginal::from_parts({0.0, 1.0}, 1e-7);
  CHECK_THROWS_AS(stieltjes_basis(spikes, 5), QuadratureFailure);
}

TEST_CASE("recurrence evaluation matches explicit monomial expansion") {
  // shifted Legendre [0,1]: phi_2(z) = sqrt(5)(6z^2 - 6z + 1),
  // phi_3(z) = sqrt(7)(20z^3 - 30z^2 + 12z - 1)
  OrthonormalBasis1D b = legendre_basis(0.0, 1.0, 3);
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    double z = rng.uniform();
    Eigen::VectorXd v = eval_basis(b, z);
    double p2 = std::sqrt(5.0) * (6 * z * z - 6 * z + 1);
    double p3 = std::sqrt(7.0) * (20 * z * z * z - 30 * z * z + 12 * z - 1);
    CHECK(v[2] == Catch::Approx(p2).margin(1e-10));
    CHECK(v[3] == Catch::Approx(p3).margin(1e-10));
  }
}

TEST_CASE("basis polynomials kill lower-degree monomials") {
  Rng rng(79);
  std::vector<double> sample(120);
  for (double& v : sample) v = rng.uniform(0.0, 2.0);
  KdeMarginal kde = fit_kde(sample);
  OrthonormalBasis1D basis = stieltjes_basis(kde, 4);
  double lo = kde.support_lo(), hi = kde.support_hi();
  for (int alpha = 1; alpha <= 4; ++alpha) {
    for (int k = 0; k < alpha; ++k) {
      double ip = 0.0;
      int panels = 600;
      for (int piece = 0; piece < panels; ++piece) {
        double a = lo + (hi - lo) * piece / panels;
        double bb = lo + (hi - lo) * (piece + 1) / panels;
        ip += integrate_gl(
            [&](double x) {
              return eval_basis(basis, x)[alpha] * std::pow(x, k) * kde.pdf(x);
            },
            a, bb, 16);
      }
      CHECK(std::fabs(ip) < 1e-6);
    }
  }
}

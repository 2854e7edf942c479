#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "pceuq/copula/vine.hpp"
#include "pceuq/math/rng.hpp"

// Rescaled Ishigami benchmark: three U([-pi,pi]) inputs coupled by a C-vine
// rooted at X1 (Gumbel(2) to X2, t(0.5, 3) to X3; X2 and X3 conditionally
// independent given X1). The response is scaled into [1,2] so relative
// errors stay well defined.

namespace pceuq::bench {

inline double ishigami_raw(double x1, double x2, double x3) {
  double s1 = std::sin(x1);
  double s2 = std::sin(x2);
  return s1 + 7.0 * s2 * s2 + 0.1 * x3 * x3 * x3 * x3 * s1;
}

inline double ishigami_eval(const Eigen::VectorXd& x) {
  double pi4 = std::pow(std::numbers::pi, 4);
  return 1.0 + (ishigami_raw(x[0], x[1], x[2]) + 1.0 + pi4 / 10.0) / (9.0 + pi4 / 5.0);
}

inline CvineModel ishigami_vine() {
  CvineModel vine = independence_cvine(3);
  vine.pairs[0][0] = PairCopula{CopulaFamily::gumbel, Rotation::r0, {2.0}};
  vine.pairs[0][1] = PairCopula{CopulaFamily::student_t, Rotation::r0, {0.5, 3.0}};
  return vine;
}

struct Dataset {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
};

inline Dataset ishigami_sample(Eigen::Index n, std::uint64_t seed) {
  const CvineModel vine = ishigami_vine();
  Rng rng(seed);
  Dataset data;
  data.x.resize(n, 3);
  data.y.resize(n);
  Eigen::VectorXd z(3);
  double pi = std::numbers::pi;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j < 3; ++j) z[j] = rng.uniform();
    Eigen::VectorXd u = inverse_rosenblatt(vine, z);
    for (int j = 0; j < 3; ++j) data.x(i, j) = -pi + 2.0 * pi * u[j];
    data.y[i] = ishigami_eval(data.x.row(i).transpose());
  }
  return data;
}

}  // namespace pceuq::bench

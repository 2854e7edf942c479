#pragma once

#include <cmath>
#include <limits>
#include <numbers>

#include "pceuq/errors.hpp"

// Scalar special functions: standard normal, Student t, regularized
// incomplete beta, first Debye function.

namespace pceuq {

inline double normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

// Acklam's rational approximation refined by one Halley step; accurate to
// ~1e-15 over (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw OutOfRange("normal_quantile: p must lie in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = normal_cdf(x) - p;
  double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  x = x - u / (1.0 + 0.5 * x * u);
  return x;
}

namespace detail {

// Continued fraction for the regularized incomplete beta (Lentz's method).
inline double betacf(double a, double b, double x) {
  constexpr int max_iter = 300;
  constexpr double eps = 3e-16;
  constexpr double fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= max_iter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) return h;
  }
  throw ConvergenceFailure("incomplete beta continued fraction did not converge");
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0))
    return front * detail::betacf(a, b, x) / a;
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

inline double student_t_pdf(double x, double nu) {
  double ln = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
              0.5 * std::log(nu * std::numbers::pi) -
              0.5 * (nu + 1.0) * std::log1p(x * x / nu);
  return std::exp(ln);
}

inline double student_t_cdf(double x, double nu) {
  if (x == 0.0) return 0.5;
  double p = 0.5 * incomplete_beta(0.5 * nu, 0.5, nu / (nu + x * x));
  return x > 0.0 ? 1.0 - p : p;
}

// Quantile by Newton on the cdf with a bisection safeguard.
inline double student_t_quantile(double p, double nu) {
  if (!(p > 0.0 && p < 1.0)) throw OutOfRange("student_t_quantile: p must lie in (0,1)");
  if (p == 0.5) return 0.0;
  // Initial guess: scale the normal quantile by the t/normal tail ratio.
  double z = normal_quantile(p);
  double g = z * z * z;
  double x = z + (g + z) / (4.0 * nu) +
             (5.0 * g * z * z + 16.0 * g + 3.0 * z) / (96.0 * nu * nu);
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    double f = student_t_cdf(x, nu) - p;
    if (f > 0.0)
      hi = x;
    else
      lo = x;
    double dfdx = student_t_pdf(x, nu);
    double step = f / dfdx;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) {
      if (std::isinf(lo))
        xn = hi - std::max(1.0, std::fabs(hi));
      else if (std::isinf(hi))
        xn = lo + std::max(1.0, std::fabs(lo));
      else
        xn = 0.5 * (lo + hi);
    }
    if (std::fabs(xn - x) <= 1e-14 * (1.0 + std::fabs(xn))) return xn;
    x = xn;
  }
  return x;
}

}  // namespace pceuq

#include "pceuq/math/gauss_legendre.hpp"

namespace pceuq {

// First Debye function D1(x) = (1/x) * int_0^x t/(e^t - 1) dt, x != 0.
// The integrand extended by continuity (value 1 at t=0) is smooth.
inline double debye1(double x) {
  auto integrand = [](double t) {
    if (std::fabs(t) < 1e-8) return 1.0 - 0.5 * t;
    return t / std::expm1(t);
  };
  return integrate_gl(integrand, 0.0, x, 128) / x;
}

}  // namespace pceuq

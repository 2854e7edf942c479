#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/copula/pair_copula.hpp"
#include "pceuq/errors.hpp"
#include "pceuq/math/kendall.hpp"

// Pair-copula selection: for every supported family (and, for the asymmetric
// Archimedean families, every rotation) the parameter is fit by maximum
// likelihood and the candidate with the smallest AIC = 2(k - logL) wins.

namespace pceuq {

namespace copula_detail {

// Golden-section/parabolic maximizer on [lo, hi]; deterministic.
template <typename F>
double brent_maximize(F&& f, double lo, double hi, double tol = 1e-8, int max_iter = 120) {
  const double golden = 0.3819660112501051;
  double a = lo, b = hi;
  double x = a + golden * (b - a), w = x, v = x;
  double fx = f(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    double m = 0.5 * (a + b);
    double tol1 = tol * (std::fabs(x) + 1e-10), tol2 = 2.0 * tol1;
    if (std::fabs(x - m) <= tol2 - 0.5 * (b - a)) break;
    double p = 0, q = 0, r = 0;
    bool parabolic = false;
    if (std::fabs(e) > tol1) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::fabs(q);
      double etemp = e;
      e = d;
      if (!(std::fabs(p) >= std::fabs(0.5 * q * etemp) || p <= q * (a - x) || p >= q * (b - x))) {
        parabolic = true;
        d = p / q;
        double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (m > x) ? tol1 : -tol1;
      }
    }
    if (!parabolic) {
      e = (x < m) ? b - x : a - x;
      d = golden * e;
    }
    double u = (std::fabs(d) >= tol1) ? x + d : x + (d > 0 ? tol1 : -tol1);
    double fu = f(u);
    if (fu >= fx) {
      if (u < x)
        b = x;
      else
        a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu >= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu >= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

inline double pair_loglik(const PairCopula& pc, const Eigen::MatrixXd& uv) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < uv.rows(); ++i) {
    double lp = pair_log_pdf(pc, uv(i, 0), uv(i, 1));
    if (!std::isfinite(lp)) return -std::numeric_limits<double>::infinity();
    ll += lp;
  }
  return ll;
}

}  // namespace copula_detail

inline double kendall_tau_empirical(const Eigen::MatrixXd& uv) {
  if (uv.cols() != 2) throw LengthMismatch("kendall_tau_empirical expects an n x 2 sample");
  return kendall_tau(uv.col(0).eval(), uv.col(1).eval());
}

struct PairFitResult {
  PairCopula copula;
  double loglik = 0.0;
  double aic = 0.0;
};

// Fit a single family/rotation by 1-D maximum likelihood (theta), with the
// Student t handled by profiling theta over a nu grid.
namespace copula_detail {

struct Candidate {
  CopulaFamily family;
  Rotation rotation;
};

inline PairFitResult fit_candidate(const Candidate& cand, const Eigen::MatrixXd& uv) {
  PairFitResult out;
  out.copula.family = cand.family;
  out.copula.rotation = cand.rotation;
  Eigen::Index n = uv.rows();

  // fitting the rotated family equals fitting the base family on rotated data
  Eigen::ArrayXd u(n), v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto [ur, vr] = rotate_args(cand.rotation, uv(i, 0), uv(i, 1));
    u[i] = clamp_u(ur);
    v[i] = clamp_u(vr);
  }

  switch (cand.family) {
    case CopulaFamily::independence: {
      out.copula.params = {};
      out.loglik = 0.0;
      break;
    }
    case CopulaFamily::gaussian: {
      Eigen::ArrayXd x(n), y(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        x[i] = normal_quantile(u[i]);
        y[i] = normal_quantile(v[i]);
      }
      double sxx = (x * x + y * y).sum(), sxy = (x * y).sum();
      auto ll = [&](double th) {
        double om = 1.0 - th * th;
        return -0.5 * double(n) * std::log(om) - (th * th * sxx - 2.0 * th * sxy) / (2.0 * om);
      };
      double theta = brent_maximize(ll, -0.9999, 0.9999);
      out.copula.params = {theta};
      out.loglik = ll(theta);
      break;
    }
    case CopulaFamily::frank: {
      auto ll = [&](double th) {
        if (std::fabs(th) < 1e-6) return 0.0;
        double dd = -std::expm1(-th);
        double acc = double(n) * std::log(th * dd) - th * (u.sum() + v.sum());
        for (Eigen::Index i = 0; i < n; ++i) {
          double gu = -std::expm1(-th * u[i]), gv = -std::expm1(-th * v[i]);
          acc -= 2.0 * std::log(std::fabs(dd - gu * gv));
        }
        return acc;
      };
      double theta = brent_maximize(ll, -35.0, 35.0);
      if (std::fabs(theta) < 1e-6) theta = theta < 0 ? -1e-6 : 1e-6;
      out.copula.params = {theta};
      out.loglik = ll(theta);
      break;
    }
    case CopulaFamily::clayton: {
      Eigen::ArrayXd lu = u.log(), lv = v.log();
      double sl = lu.sum() + lv.sum();
      auto ll = [&](double logth) {
        double th = std::exp(logth);
        double acc = double(n) * std::log1p(th) - (th + 1.0) * sl;
        for (Eigen::Index i = 0; i < n; ++i) {
          double s = std::exp(-th * lu[i]) + std::exp(-th * lv[i]) - 1.0;
          acc -= (1.0 / th + 2.0) * std::log(s);
        }
        return acc;
      };
      double logth = brent_maximize(ll, std::log(1e-3), std::log(28.0));
      out.copula.params = {std::exp(logth)};
      out.loglik = ll(logth);
      break;
    }
    case CopulaFamily::gumbel: {
      Eigen::ArrayXd tu = -u.log(), tv = -v.log();
      Eigen::ArrayXd ltu = tu.log(), ltv = tv.log();
      double slt = ltu.sum() + ltv.sum();
      double st = tu.sum() + tv.sum();
      auto ll = [&](double l) {
        double th = 1.0 + std::exp(l);
        double acc = (th - 1.0) * slt + st;
        for (Eigen::Index i = 0; i < n; ++i) {
          double s = std::exp(th * ltu[i]) + std::exp(th * ltv[i]);
          double s1t = std::pow(s, 1.0 / th);
          acc += -s1t + (2.0 / th - 2.0) * std::log(s) + std::log1p((th - 1.0) / s1t);
        }
        return acc;
      };
      double l = brent_maximize(ll, std::log(1e-6), std::log(16.0));
      out.copula.params = {1.0 + std::exp(l)};
      out.loglik = ll(l);
      break;
    }
    case CopulaFamily::student_t: {
      static const double nu_grid[] = {2.0, 3.0, 4.0, 6.0, 10.0, 20.0, 50.0};
      double best_ll = -std::numeric_limits<double>::infinity();
      for (double nu : nu_grid) {
        Eigen::ArrayXd x(n), y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
          x[i] = student_t_quantile(u[i], nu);
          y[i] = student_t_quantile(v[i], nu);
        }
        Eigen::ArrayXd xx = x * x, yy = y * y, xy = x * y;
        double tail = ((1.0 + xx / nu).log() + (1.0 + yy / nu).log()).sum();
        double cst = std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
                     2.0 * std::lgamma(0.5 * (nu + 1.0));
        auto ll = [&](double th) {
          double om = 1.0 - th * th;
          double acc = double(n) * (cst - 0.5 * std::log(om)) + 0.5 * (nu + 1.0) * tail;
          for (Eigen::Index i = 0; i < n; ++i)
            acc -= 0.5 * (nu + 2.0) * std::log1p((xx[i] - 2.0 * th * xy[i] + yy[i]) / (nu * om));
          return acc;
        };
        double theta = brent_maximize(ll, -0.9999, 0.9999);
        double cur = ll(theta);
        if (cur > best_ll) {
          best_ll = cur;
          out.copula.params = {theta, nu};
        }
      }
      out.loglik = best_ll;
      break;
    }
  }
  out.aic = 2.0 * (family_param_count(cand.family) - out.loglik);
  return out;
}

}  // namespace copula_detail

// AIC-driven family selection across the supported families and rotations.
inline PairFitResult fit_pair_full(const Eigen::MatrixXd& uv) {
  if (uv.cols() != 2) throw LengthMismatch("fit_pair expects an n x 2 sample");
  if (uv.rows() < 10) throw FitFailure("pair copula fit needs at least 10 observations");
  Eigen::MatrixXd data = uv;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    data(i, 0) = copula_detail::clamp_u(data(i, 0));
    data(i, 1) = copula_detail::clamp_u(data(i, 1));
  }

  using copula_detail::Candidate;
  std::vector<Candidate> candidates = {
      {CopulaFamily::independence, Rotation::r0},
      {CopulaFamily::gaussian, Rotation::r0},
      {CopulaFamily::frank, Rotation::r0},
      {CopulaFamily::student_t, Rotation::r0},
      {CopulaFamily::clayton, Rotation::r0},
      {CopulaFamily::clayton, Rotation::r90},
      {CopulaFamily::clayton, Rotation::r180},
      {CopulaFamily::clayton, Rotation::r270},
      {CopulaFamily::gumbel, Rotation::r0},
      {CopulaFamily::gumbel, Rotation::r90},
      {CopulaFamily::gumbel, Rotation::r180},
      {CopulaFamily::gumbel, Rotation::r270},
  };

  PairFitResult best;
  bool have = false;
  for (const auto& cand : candidates) {
    PairFitResult res;
    try {
      res = copula_detail::fit_candidate(cand, data);
    } catch (const Error&) {
      continue;
    }
    if (!std::isfinite(res.aic)) continue;
    if (!have || res.aic < best.aic) {
      best = res;
      have = true;
    }
  }
  if (!have) throw FitFailure("no copula family could be fit to the data");
  return best;
}

inline PairCopula fit_pair(const Eigen::MatrixXd& uv) { return fit_pair_full(uv).copula; }

}  // namespace pceuq

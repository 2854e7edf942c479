#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pceuq/errors.hpp"
#include "pceuq/math/gauss_legendre.hpp"
#include "pceuq/math/special.hpp"

// Bivariate copula families (Independence, Gaussian, Clayton, Frank, Gumbel,
// Student t) with 90/180/270-degree rotations, cdf/pdf, conditional
// h-functions C(u|v) = dC/dv and their inverses, and model Kendall taus.
// Rotations follow C90(u,v) = v - C(1-u,v), C180 = u+v-1+C(1-u,1-v),
// C270 = u - C(u,1-v).

namespace pceuq {

enum class CopulaFamily { independence, gaussian, clayton, frank, gumbel, student_t };

enum class Rotation { r0 = 0, r90 = 90, r180 = 180, r270 = 270 };

struct PairCopula {
  CopulaFamily family = CopulaFamily::independence;
  Rotation rotation = Rotation::r0;
  std::vector<double> params;  // theta (+ nu for student_t)
};

inline const char* family_name(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::gaussian: return "gaussian";
    case CopulaFamily::clayton: return "clayton";
    case CopulaFamily::frank: return "frank";
    case CopulaFamily::gumbel: return "gumbel";
    case CopulaFamily::student_t: return "student_t";
  }
  return "?";
}

inline CopulaFamily family_from_name(const std::string& name) {
  for (CopulaFamily f : {CopulaFamily::independence, CopulaFamily::gaussian,
                         CopulaFamily::clayton, CopulaFamily::frank, CopulaFamily::gumbel,
                         CopulaFamily::student_t})
    if (name == family_name(f)) return f;
  throw UnsupportedFamily(name);
}

inline int family_param_count(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::independence: return 0;
    case CopulaFamily::student_t: return 2;
    default: return 1;
  }
}

inline void validate_pair_copula(const PairCopula& pc) {
  if (int(pc.params.size()) != family_param_count(pc.family))
    throw ParamOutOfRange("wrong parameter count for family");
  switch (pc.family) {
    case CopulaFamily::independence:
      break;
    case CopulaFamily::gaussian:
      if (!(std::fabs(pc.params[0]) < 1.0)) throw ParamOutOfRange("gaussian theta in (-1,1)");
      break;
    case CopulaFamily::clayton:
      if (!(pc.params[0] > 0.0)) throw ParamOutOfRange("clayton theta > 0");
      break;
    case CopulaFamily::frank:
      if (pc.params[0] == 0.0) throw ParamOutOfRange("frank theta != 0");
      break;
    case CopulaFamily::gumbel:
      if (!(pc.params[0] >= 1.0)) throw ParamOutOfRange("gumbel theta >= 1");
      break;
    case CopulaFamily::student_t:
      if (!(std::fabs(pc.params[0]) < 1.0)) throw ParamOutOfRange("t theta in (-1,1)");
      if (!(pc.params[1] > 1.0)) throw ParamOutOfRange("t nu > 1");
      break;
  }
}

namespace copula_detail {

constexpr double u_clamp = 1e-10;

inline double clamp_u(double u) { return std::clamp(u, u_clamp, 1.0 - u_clamp); }

// ---- unrotated h-functions h(u|v) = dC(u,v)/dv ----

inline double h_base(const PairCopula& pc, double u, double v) {
  u = clamp_u(u);
  v = clamp_u(v);
  switch (pc.family) {
    case CopulaFamily::independence:
      return u;
    case CopulaFamily::gaussian: {
      double th = pc.params[0];
      double x = normal_quantile(u), y = normal_quantile(v);
      return normal_cdf((x - th * y) / std::sqrt(1.0 - th * th));
    }
    case CopulaFamily::student_t: {
      double th = pc.params[0], nu = pc.params[1];
      double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
      double scale = std::sqrt((nu + y * y) * (1.0 - th * th) / (nu + 1.0));
      return student_t_cdf((x - th * y) / scale, nu + 1.0);
    }
    case CopulaFamily::clayton: {
      double th = pc.params[0];
      double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
      return std::pow(v, -th - 1.0) * std::pow(s, -1.0 / th - 1.0);
    }
    case CopulaFamily::frank: {
      double th = pc.params[0];
      double gu = -std::expm1(-th * u), gv = -std::expm1(-th * v);
      double dd = -std::expm1(-th);
      return gu * std::exp(-th * v) / (dd - gu * gv);
    }
    case CopulaFamily::gumbel: {
      double th = pc.params[0];
      double tu = -std::log(u), tv = -std::log(v);
      double s = std::pow(tu, th) + std::pow(tv, th);
      double logh = -std::pow(s, 1.0 / th) + (th - 1.0) * std::log(tv) +
                    (1.0 / th - 1.0) * std::log(s) + tv;
      return std::exp(logh);
    }
  }
  return u;
}

inline double inv_h_base(const PairCopula& pc, double z, double v) {
  z = clamp_u(z);
  v = clamp_u(v);
  switch (pc.family) {
    case CopulaFamily::independence:
      return z;
    case CopulaFamily::gaussian: {
      double th = pc.params[0];
      double y = normal_quantile(v);
      return normal_cdf(normal_quantile(z) * std::sqrt(1.0 - th * th) + th * y);
    }
    case CopulaFamily::student_t: {
      double th = pc.params[0], nu = pc.params[1];
      double y = student_t_quantile(v, nu);
      double scale = std::sqrt((nu + y * y) * (1.0 - th * th) / (nu + 1.0));
      return student_t_cdf(student_t_quantile(z, nu + 1.0) * scale + th * y, nu);
    }
    case CopulaFamily::clayton: {
      double th = pc.params[0];
      // u^-th = (z v^(th+1))^(-th/(th+1)) + 1 - v^-th, evaluated in logs
      double a_minus_b = -(th / (th + 1.0)) * std::log(z);
      double b = -th * std::log(v);
      double log_d;
      if (b > 30.0)
        log_d = b + std::log(std::expm1(std::min(a_minus_b, 700.0)));
      else
        log_d = std::log(std::exp(b) * std::expm1(a_minus_b) + 1.0);
      return clamp_u(std::exp(-log_d / th));
    }
    case CopulaFamily::frank: {
      double th = pc.params[0];
      double gv = -std::expm1(-th * v);
      double dd = -std::expm1(-th);
      double gu = z * dd / (std::exp(-th * v) + z * gv);
      return clamp_u(-std::log1p(-gu) / th);
    }
    case CopulaFamily::gumbel: {
      // monotone in u; bisection tightened by Newton with the pair density
      double lo = u_clamp, hi = 1.0 - u_clamp;
      double u = z;
      for (int it = 0; it < 200; ++it) {
        double f = h_base(pc, u, v) - z;
        if (std::fabs(f) < 1e-12) return u;
        if (f > 0.0)
          hi = u;
        else
          lo = u;
        double un = 0.5 * (lo + hi);
        // Newton once the bracket is tight
        if (hi - lo < 1e-3) {
          double th = pc.params[0];
          double tu = -std::log(u), tv = -std::log(v);
          double s = std::pow(tu, th) + std::pow(tv, th);
          double logc = -std::pow(s, 1.0 / th) + (th - 1.0) * (std::log(tu) + std::log(tv)) +
                        tu + tv + (2.0 / th - 2.0) * std::log(s) +
                        std::log1p((th - 1.0) * std::pow(s, -1.0 / th));
          double dens = std::exp(logc);
          if (dens > 0.0 && std::isfinite(dens)) {
            double cand = u - f / dens;
            if (cand > lo && cand < hi) un = cand;
          }
        }
        if (std::fabs(un - u) < 1e-16 && std::fabs(f) < 1e-10) return un;
        u = un;
      }
      throw ConvergenceFailure("gumbel h-function inversion did not converge");
    }
  }
  return z;
}

// ---- unrotated log densities ----

inline double log_pdf_base(const PairCopula& pc, double u, double v) {
  u = clamp_u(u);
  v = clamp_u(v);
  switch (pc.family) {
    case CopulaFamily::independence:
      return 0.0;
    case CopulaFamily::gaussian: {
      double th = pc.params[0];
      double x = normal_quantile(u), y = normal_quantile(v);
      double om = 1.0 - th * th;
      return -0.5 * std::log(om) - (th * th * (x * x + y * y) - 2.0 * th * x * y) / (2.0 * om);
    }
    case CopulaFamily::student_t: {
      double th = pc.params[0], nu = pc.params[1];
      double x = student_t_quantile(u, nu), y = student_t_quantile(v, nu);
      double om = 1.0 - th * th;
      double quad = (x * x - 2.0 * th * x * y + y * y) / (nu * om);
      return std::lgamma(0.5 * (nu + 2.0)) + std::lgamma(0.5 * nu) -
             2.0 * std::lgamma(0.5 * (nu + 1.0)) - 0.5 * std::log(om) -
             0.5 * (nu + 2.0) * std::log1p(quad) +
             0.5 * (nu + 1.0) * (std::log1p(x * x / nu) + std::log1p(y * y / nu));
    }
    case CopulaFamily::clayton: {
      double th = pc.params[0];
      double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
      return std::log1p(th) - (th + 1.0) * (std::log(u) + std::log(v)) -
             (1.0 / th + 2.0) * std::log(s);
    }
    case CopulaFamily::frank: {
      double th = pc.params[0];
      if (std::fabs(th) < 1e-8) return 0.0;
      double gu = -std::expm1(-th * u), gv = -std::expm1(-th * v);
      double dd = -std::expm1(-th);
      double denom = dd - gu * gv;
      return std::log(th * dd) - th * (u + v) - 2.0 * std::log(std::fabs(denom));
    }
    case CopulaFamily::gumbel: {
      double th = pc.params[0];
      double tu = -std::log(u), tv = -std::log(v);
      double s = std::pow(tu, th) + std::pow(tv, th);
      return -std::pow(s, 1.0 / th) + (th - 1.0) * (std::log(tu) + std::log(tv)) + tu + tv +
             (2.0 / th - 2.0) * std::log(s) + std::log1p((th - 1.0) * std::pow(s, -1.0 / th));
    }
  }
  return 0.0;
}

// ---- unrotated cdfs (closed forms; elliptical families by quadrature of h) ----

inline double cdf_base(const PairCopula& pc, double u, double v) {
  switch (pc.family) {
    case CopulaFamily::independence:
      return u * v;
    case CopulaFamily::clayton: {
      double th = pc.params[0];
      double s = std::pow(u, -th) + std::pow(v, -th) - 1.0;
      return std::pow(s, -1.0 / th);
    }
    case CopulaFamily::frank: {
      double th = pc.params[0];
      double gu = -std::expm1(-th * u), gv = -std::expm1(-th * v);
      double dd = -std::expm1(-th);
      return -std::log1p(-gu * gv / dd) / th;
    }
    case CopulaFamily::gumbel: {
      double th = pc.params[0];
      double tu = -std::log(u), tv = -std::log(v);
      return std::exp(-std::pow(std::pow(tu, th) + std::pow(tv, th), 1.0 / th));
    }
    case CopulaFamily::gaussian:
    case CopulaFamily::student_t: {
      // C(u,v) = int_0^v h(u|t) dt, smooth integrand
      return integrate_gl([&](double t) { return h_base(pc, u, t); }, 0.0, v, 256);
    }
  }
  return u * v;
}

// rotation transforms (u', v') of the arguments for density evaluation
inline std::pair<double, double> rotate_args(Rotation rot, double u, double v) {
  switch (rot) {
    case Rotation::r0: return {u, v};
    case Rotation::r90: return {1.0 - u, v};
    case Rotation::r180: return {1.0 - u, 1.0 - v};
    case Rotation::r270: return {u, 1.0 - v};
  }
  return {u, v};
}

}  // namespace copula_detail

// C(u,v) with the rotation applied; boundary values are exact.
inline double pair_cdf(const PairCopula& pc, double u, double v) {
  validate_pair_copula(pc);
  u = std::clamp(u, 0.0, 1.0);
  v = std::clamp(v, 0.0, 1.0);
  if (u == 0.0 || v == 0.0) return 0.0;
  if (u == 1.0) return v;
  if (v == 1.0) return u;
  u = copula_detail::clamp_u(u);
  v = copula_detail::clamp_u(v);
  using copula_detail::cdf_base;
  switch (pc.rotation) {
    case Rotation::r0: return cdf_base(pc, u, v);
    case Rotation::r90: return v - cdf_base(pc, 1.0 - u, v);
    case Rotation::r180: return u + v - 1.0 + cdf_base(pc, 1.0 - u, 1.0 - v);
    case Rotation::r270: return u - cdf_base(pc, u, 1.0 - v);
  }
  return cdf_base(pc, u, v);
}

inline double pair_log_pdf(const PairCopula& pc, double u, double v) {
  validate_pair_copula(pc);
  auto [ur, vr] = copula_detail::rotate_args(pc.rotation, u, v);
  return copula_detail::log_pdf_base(pc, ur, vr);
}

inline double pair_pdf(const PairCopula& pc, double u, double v) {
  return std::exp(pair_log_pdf(pc, u, v));
}

// Conditional distribution h(u|v) = dC(u,v)/dv.
inline double h_function(const PairCopula& pc, double u, double v) {
  validate_pair_copula(pc);
  using copula_detail::h_base;
  double r = u;
  switch (pc.rotation) {
    case Rotation::r0: r = h_base(pc, u, v); break;
    case Rotation::r90: r = 1.0 - h_base(pc, 1.0 - u, v); break;
    case Rotation::r180: r = 1.0 - h_base(pc, 1.0 - u, 1.0 - v); break;
    case Rotation::r270: r = h_base(pc, u, 1.0 - v); break;
  }
  return std::clamp(r, 0.0, 1.0);
}

// Inverse of h in its first argument: h(inv_h(z,v), v) = z.
inline double inv_h(const PairCopula& pc, double z, double v) {
  validate_pair_copula(pc);
  using copula_detail::inv_h_base;
  switch (pc.rotation) {
    case Rotation::r0: return inv_h_base(pc, z, v);
    case Rotation::r90: return 1.0 - inv_h_base(pc, 1.0 - z, v);
    case Rotation::r180: return 1.0 - inv_h_base(pc, 1.0 - z, 1.0 - v);
    case Rotation::r270: return inv_h_base(pc, z, 1.0 - v);
  }
  return inv_h_base(pc, z, v);
}

// Model Kendall tau; closed forms where known, the Debye integral for Frank.
inline double kendall_tau_model(const PairCopula& pc) {
  validate_pair_copula(pc);
  double tau = 0.0;
  switch (pc.family) {
    case CopulaFamily::independence: tau = 0.0; break;
    case CopulaFamily::gaussian:
    case CopulaFamily::student_t:
      tau = 2.0 / std::numbers::pi * std::asin(pc.params[0]);
      break;
    case CopulaFamily::clayton: tau = pc.params[0] / (pc.params[0] + 2.0); break;
    case CopulaFamily::gumbel: tau = 1.0 - 1.0 / pc.params[0]; break;
    case CopulaFamily::frank: {
      double th = pc.params[0];
      tau = 1.0 + 4.0 / th * (debye1(th) - 1.0);
      break;
    }
  }
  if (pc.rotation == Rotation::r90 || pc.rotation == Rotation::r270) tau = -tau;
  return tau;
}

}  // namespace pceuq

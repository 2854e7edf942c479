#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/errors.hpp"
#include "pceuq/math/special.hpp"

// Nonparametric univariate input models: Gaussian-kernel KDE and bounded
// uniform marginals, with pdf/cdf/quantile and the probability integral
// transform.

namespace pceuq {

// Kernel contributions beyond this many bandwidths are below 2e-33 and are
// skipped; centers left of the window count as full cdf mass.
constexpr double kde_kernel_cutoff = 12.0;

// PIT outputs are clamped away from {0,1} so downstream copula h-functions
// stay finite.
constexpr double pit_clamp = 1e-12;

class KdeMarginal {
public:
  // Direct construction from kernel centers and a forced bandwidth. Permits
  // n = 1 (used by tests and by degenerate-output densities).
  static KdeMarginal from_parts(std::vector<double> centers, double bandwidth) {
    if (centers.empty()) throw DegenerateSample("KDE needs at least one center");
    if (!(bandwidth > 0.0)) throw DegenerateSample("KDE bandwidth must be positive");
    return KdeMarginal(std::move(centers), bandwidth);
  }

  const std::vector<double>& centers() const { return centers_; }
  double bandwidth() const { return bandwidth_; }
  std::size_t n() const { return centers_.size(); }

  // Support endpoints used for integration grids: extreme centers +- 10h.
  double support_lo() const { return centers_.front() - 10.0 * bandwidth_; }
  double support_hi() const { return centers_.back() + 10.0 * bandwidth_; }

  double pdf(double x) const {
    double h = bandwidth_;
    auto lo = std::lower_bound(centers_.begin(), centers_.end(), x - kde_kernel_cutoff * h);
    auto hi = std::upper_bound(centers_.begin(), centers_.end(), x + kde_kernel_cutoff * h);
    double sum = 0.0;
    for (auto it = lo; it != hi; ++it) sum += normal_pdf((x - *it) / h);
    return sum / (double(n()) * h);
  }

  double cdf(double x) const {
    double h = bandwidth_;
    auto lo = std::lower_bound(centers_.begin(), centers_.end(), x - kde_kernel_cutoff * h);
    auto hi = std::upper_bound(centers_.begin(), centers_.end(), x + kde_kernel_cutoff * h);
    double sum = double(lo - centers_.begin());  // centers far left contribute 1
    for (auto it = lo; it != hi; ++it) sum += normal_cdf((x - *it) / h);
    return sum / double(n());
  }

  // Exact quantile: |cdf(result) - p| < 1e-10, bracketed by the cached cdf
  // table and polished by safeguarded Newton.
  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw OutOfRange("kde quantile defined for p in (0,1)");
    auto [lo, hi] = bracket(p);
    double x = interpolate_inverse(p, lo, hi);
    for (int it = 0; it < 200; ++it) {
      double f = cdf(x) - p;
      if (std::fabs(f) < 1e-10) return x;
      if (f > 0.0)
        hi = x;
      else
        lo = x;
      double d = pdf(x);
      double xn = d > 0.0 ? x - f / d : 0.5 * (lo + hi);
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      x = xn;
    }
    return x;
  }

  // Table-interpolated quantile for bulk transforms (monotone cubic Hermite
  // on the cached cdf; error well below sampling noise, ~1e-8 typical).
  double quantile_fast(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw OutOfRange("kde quantile defined for p in (0,1)");
    auto [lo, hi] = bracket(p);
    return interpolate_inverse(p, lo, hi);
  }

private:
  KdeMarginal(std::vector<double> centers, double bandwidth)
      : centers_(std::move(centers)), bandwidth_(bandwidth) {
    std::sort(centers_.begin(), centers_.end());
    build_table();
  }

  void build_table() {
    double h = bandwidth_;
    double lo = support_lo(), hi = support_hi();
    double step = h / 16.0;
    std::size_t nodes = std::min<std::size_t>(131072, std::size_t((hi - lo) / step) + 2);
    grid_x_.resize(nodes);
    grid_F_.resize(nodes);
    grid_f_.resize(nodes);
    double dx = (hi - lo) / double(nodes - 1);
    for (std::size_t i = 0; i < nodes; ++i) {
      double x = lo + dx * double(i);
      grid_x_[i] = x;
      grid_F_[i] = cdf(x);
      grid_f_[i] = pdf(x);
    }
  }

  std::pair<double, double> bracket(double p) const {
    auto it = std::lower_bound(grid_F_.begin(), grid_F_.end(), p);
    if (it == grid_F_.begin()) return {grid_x_.front() - bandwidth_, grid_x_.front()};
    if (it == grid_F_.end()) return {grid_x_.back(), grid_x_.back() + bandwidth_};
    std::size_t i = std::size_t(it - grid_F_.begin());
    return {grid_x_[i - 1], grid_x_[i]};
  }

  double interpolate_inverse(double p, double xlo, double xhi) const {
    // locate the table segment again (bracket may extend past the grid)
    if (xhi <= grid_x_.front() || xlo >= grid_x_.back()) return 0.5 * (xlo + xhi);
    auto it = std::lower_bound(grid_F_.begin(), grid_F_.end(), p);
    if (it == grid_F_.begin() || it == grid_F_.end()) return 0.5 * (xlo + xhi);
    std::size_t i = std::size_t(it - grid_F_.begin()) - 1;
    double dx = grid_x_[i + 1] - grid_x_[i];
    double F0 = grid_F_[i], F1 = grid_F_[i + 1];
    double m0 = grid_f_[i] * dx, m1 = grid_f_[i + 1] * dx;
    double dF = F1 - F0;
    if (dF <= 0.0) return 0.5 * (grid_x_[i] + grid_x_[i + 1]);
    // Newton on the Hermite cubic, bisection-guarded
    double tlo = 0.0, thi = 1.0, t = std::clamp((p - F0) / dF, 0.0, 1.0);
    for (int iter = 0; iter < 40; ++iter) {
      double t2 = t * t, t3 = t2 * t;
      double H = (2 * t3 - 3 * t2 + 1) * F0 + (t3 - 2 * t2 + t) * m0 +
                 (-2 * t3 + 3 * t2) * F1 + (t3 - t2) * m1;
      double dH = (6 * t2 - 6 * t) * F0 + (3 * t2 - 4 * t + 1) * m0 +
                  (-6 * t2 + 6 * t) * F1 + (3 * t2 - 2 * t) * m1;
      double err = H - p;
      if (std::fabs(err) < 1e-15) break;
      if (err > 0.0)
        thi = t;
      else
        tlo = t;
      double tn = dH > 0.0 ? t - err / dH : 0.5 * (tlo + thi);
      if (!(tn > tlo && tn < thi)) tn = 0.5 * (tlo + thi);
      if (std::fabs(tn - t) < 1e-16) {
        t = tn;
        break;
      }
      t = tn;
    }
    return grid_x_[i] + t * dx;
  }

  std::vector<double> centers_;
  double bandwidth_;
  std::vector<double> grid_x_, grid_F_, grid_f_;
};

// Silverman's rule with the robust spread estimate min(std, IQR/1.349);
// quantiles by the nearest-rank convention.
inline KdeMarginal fit_kde(const std::vector<double>& sample) {
  std::size_t n = sample.size();
  if (n < 2) throw DegenerateSample("KDE fit needs at least 2 observations");
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= double(n);
  double ss = 0.0;
  for (double v : sample) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / double(n - 1));
  std::vector<double> sorted(sample);
  std::sort(sorted.begin(), sorted.end());
  auto rank_quantile = [&](double p) {
    std::size_t k = std::size_t(std::ceil(p * double(n)));
    return sorted[std::min(n - 1, std::max<std::size_t>(1, k) - 1)];
  };
  double iqr = rank_quantile(0.75) - rank_quantile(0.25);
  double scale = iqr > 0.0 ? std::min(sd, iqr / 1.349) : sd;
  if (!(scale > 0.0)) throw DegenerateSample("KDE fit needs at least 2 distinct values");
  double h = 1.06 * scale * std::pow(double(n), -0.2);
  return KdeMarginal::from_parts(sorted, h);
}

inline KdeMarginal fit_kde(const Eigen::VectorXd& sample) {
  return fit_kde(std::vector<double>(sample.data(), sample.data() + sample.size()));
}

struct BoundedUniformMarginal {
  double lo;
  double hi;

  BoundedUniformMarginal(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(lo < hi)) throw InvalidInterval("uniform marginal needs lo < hi");
  }

  double pdf(double x) const { return (x >= lo && x <= hi) ? 1.0 / (hi - lo) : 0.0; }
  double cdf(double x) const { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); }
  double quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) throw OutOfRange("uniform quantile defined for p in (0,1)");
    return lo + p * (hi - lo);
  }
  double support_lo() const { return lo; }
  double support_hi() const { return hi; }
};

using Marginal = std::variant<KdeMarginal, BoundedUniformMarginal>;

inline double marginal_pdf(const Marginal& m, double x) {
  return std::visit([&](const auto& v) { return v.pdf(x); }, m);
}
inline double marginal_cdf(const Marginal& m, double x) {
  return std::visit([&](const auto& v) { return v.cdf(x); }, m);
}
inline double marginal_quantile(const Marginal& m, double p) {
  return std::visit([&](const auto& v) { return v.quantile(p); }, m);
}
inline double marginal_quantile_fast(const Marginal& m, double p) {
  if (const auto* kde = std::get_if<KdeMarginal>(&m)) return kde->quantile_fast(p);
  return marginal_quantile(m, p);
}
inline double marginal_support_lo(const Marginal& m) {
  return std::visit([](const auto& v) { return v.support_lo(); }, m);
}
inline double marginal_support_hi(const Marginal& m) {
  return std::visit([](const auto& v) { return v.support_hi(); }, m);
}

// Componentwise probability integral transform u_i = F_i(x_i).
inline Eigen::VectorXd pit(const std::vector<Marginal>& marginals, const Eigen::VectorXd& x) {
  if (std::size_t(x.size()) != marginals.size())
    throw LengthMismatch("pit: dimension mismatch");
  Eigen::VectorXd u(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    u[i] = std::clamp(marginal_cdf(marginals[std::size_t(i)], x[i]), pit_clamp, 1.0 - pit_clamp);
  return u;
}

// Row-wise PIT of a sample matrix.
inline Eigen::MatrixXd pit(const std::vector<Marginal>& marginals, const Eigen::MatrixXd& x) {
  if (std::size_t(x.cols()) != marginals.size())
    throw LengthMismatch("pit: dimension mismatch");
  Eigen::MatrixXd u(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      u(i, j) = std::clamp(marginal_cdf(marginals[std::size_t(j)], x(i, j)), pit_clamp,
                           1.0 - pit_clamp);
  return u;
}

}  // namespace pceuq

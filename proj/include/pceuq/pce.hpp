#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/copula/vine.hpp"
#include "pceuq/errors.hpp"
#include "pceuq/marginals.hpp"
#include "pceuq/math/sobol.hpp"
#include "pceuq/multi_index.hpp"
#include "pceuq/orthopoly.hpp"
#include "pceuq/regression.hpp"

// End-to-end PCE pipelines. Three basis strategies:
//   apce_on_x  - KDE marginals, Stieltjes bases, regression on raw inputs;
//                dependence enters only through resampling statistics.
//   lpce_on_z  - KDE marginals + C-vine; regression on the Rosenblatt
//                transform of the inputs with Legendre [0,1] bases.
//   lpce_on_x  - Legendre bases on the 1%-widened observed ranges.

namespace pceuq {

enum class PceMode { apce_on_x, lpce_on_z, lpce_on_x };

enum class SamplerKind { sobol, pseudo_random };

inline const char* mode_name(PceMode m) {
  switch (m) {
    case PceMode::apce_on_x: return "aPCEonX";
    case PceMode::lpce_on_z: return "lPCEonZ";
    case PceMode::lpce_on_x: return "lPCEonX";
  }
  return "?";
}

inline PceMode mode_from_name(const std::string& name) {
  for (PceMode m : {PceMode::apce_on_x, PceMode::lpce_on_z, PceMode::lpce_on_x})
    if (name == mode_name(m)) return m;
  throw SchemaMismatch("unknown PCE mode: " + name);
}

struct PceMetadata {
  int p = 0;
  int r = 0;
  double q = 0.75;
  double loo = 0.0;
  int n_train = 0;
  std::uint64_t seed = 0;
  std::vector<double> hull_lo, hull_hi;
};

struct PceModel {
  PceMode mode = PceMode::apce_on_x;
  std::vector<Marginal> marginals;
  std::optional<CvineModel> copula;
  std::vector<OrthonormalBasis1D> bases;
  MultiIndexSet index_set;
  Eigen::VectorXd coefficients;
  PceMetadata metadata;

  int dim() const { return int(marginals.size()); }
};

struct FitConfig {
  PceMode mode = PceMode::apce_on_x;
  int p_min = 1;
  int p_max = 0;  // 0: largest p with C(d+p,p) <= n, capped at 10
  int r_min = 1;
  int r_max = 0;  // 0: min(d, 4)
  double q = 0.75;
  std::uint64_t seed = 42;
  bool fit_copula = true;  // C-vine for a-posteriori statistics (d >= 2)
};

namespace pce_detail {

inline int auto_p_max(int d, Eigen::Index n) {
  int p = 1;
  while (p < 10 && binomial(d + p + 1, p + 1) <= double(n)) ++p;
  return std::min(p, max_basis_degree);
}

// Stieltjes basis with the degree backed off until the measure supports it.
inline OrthonormalBasis1D stieltjes_with_backoff(const Marginal& marginal, int& p_cap) {
  while (true) {
    try {
      return stieltjes_basis(marginal, p_cap);
    } catch (const QuadratureFailure&) {
      if (p_cap <= 1) throw;
      --p_cap;
    }
  }
}

// regression inputs in basis space: raw x, or Rosenblatt-transformed u
inline Eigen::MatrixXd regression_inputs(const PceModel& model, const Eigen::MatrixXd& x) {
  if (model.mode != PceMode::lpce_on_z) return x;
  Eigen::MatrixXd u = pit(model.marginals, x);
  if (model.copula) return rosenblatt(*model.copula, u);
  return u;
}

}  // namespace pce_detail

// Fits a PCE metamodel on an n x d input sample and n responses.
inline PceModel fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const FitConfig& config) {
  Eigen::Index n = x.rows();
  int d = int(x.cols());
  if (n != y.size()) throw LengthMismatch("fit: row count of x must match y");
  if (d < 1) throw InsufficientData("fit needs at least one input column");
  if (n < 10) throw InsufficientData("fit needs at least 10 observations");
  if (!x.allFinite() || !y.allFinite()) throw InputError("fit: inputs must be finite");

  PceModel model;
  model.mode = config.mode;
  model.metadata.q = config.q;
  model.metadata.n_train = int(n);
  model.metadata.seed = config.seed;
  model.metadata.hull_lo.resize(std::size_t(d));
  model.metadata.hull_hi.resize(std::size_t(d));
  for (int j = 0; j < d; ++j) {
    model.metadata.hull_lo[std::size_t(j)] = x.col(j).minCoeff();
    model.metadata.hull_hi[std::size_t(j)] = x.col(j).maxCoeff();
  }

  // marginals
  for (int j = 0; j < d; ++j) {
    if (config.mode == PceMode::lpce_on_x) {
      double lo = x.col(j).minCoeff(), hi = x.col(j).maxCoeff();
      double pad = 0.01 * (hi - lo);
      if (!(hi > lo)) throw DegenerateSample("constant input column");
      model.marginals.emplace_back(BoundedUniformMarginal(lo - pad, hi + pad));
    } else {
      model.marginals.emplace_back(fit_kde(x.col(j).eval()));
    }
  }

  // copula: required for lpce_on_z, optional a-posteriori model otherwise
  if (d >= 2 && (config.mode == PceMode::lpce_on_z || config.fit_copula)) {
    Eigen::MatrixXd u = pit(model.marginals, x);
    model.copula = fit_cvine(u);
  }

  // regression inputs and degree cap
  Eigen::MatrixXd t = pce_detail::regression_inputs(model, x);
  int p_cap = config.p_max > 0 ? std::min(config.p_max, max_basis_degree)
                               : pce_detail::auto_p_max(d, n);
  p_cap = std::max(p_cap, config.p_min);

  // univariate bases
  if (config.mode == PceMode::apce_on_x) {
    for (int j = 0; j < d; ++j)
      model.bases.push_back(pce_detail::stieltjes_with_backoff(model.marginals[std::size_t(j)], p_cap));
    // a back-off in a later dimension shortens earlier bases as well
    for (auto& b : model.bases)
      if (b.degree_max > p_cap) {
        b.recurrence_a.resize(std::size_t(p_cap) + 1);
        b.recurrence_b.resize(std::size_t(p_cap) + 1);
        b.normalizers.resize(std::size_t(p_cap) + 1);
        b.degree_max = p_cap;
      }
  } else if (config.mode == PceMode::lpce_on_z) {
    for (int j = 0; j < d; ++j) model.bases.push_back(legendre_basis(0.0, 1.0, p_cap));
  } else {
    for (int j = 0; j < d; ++j) {
      const auto& u = std::get<BoundedUniformMarginal>(model.marginals[std::size_t(j)]);
      model.bases.push_back(legendre_basis(u.lo, u.hi, p_cap));
    }
  }

  // univariate basis values, shared by all (p, r) candidates
  std::vector<Eigen::MatrixXd> uni(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    uni[std::size_t(j)].resize(n, p_cap + 1);
    std::vector<double> phi(std::size_t(p_cap) + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      eval_basis_into(model.bases[std::size_t(j)], t(i, j), phi.data());
      for (int k = 0; k <= p_cap; ++k) uni[std::size_t(j)](i, k) = phi[std::size_t(k)];
    }
  }

  std::vector<int> p_range, r_range;
  for (int p = std::max(1, config.p_min); p <= p_cap; ++p) p_range.push_back(p);
  int r_hi = config.r_max > 0 ? std::min(config.r_max, d) : std::min(d, 4);
  for (int r = std::max(1, config.r_min); r <= r_hi; ++r) r_range.push_back(r);
  if (p_range.empty()) p_range.push_back(p_cap);
  if (r_range.empty()) r_range.push_back(1);

  HyperparamResult res = select_hyperparams(uni, y, p_range, r_range, config.q);
  model.index_set = std::move(res.index_set);
  model.coefficients = std::move(res.solution.coefficients);
  model.metadata.p = res.p;
  model.metadata.r = res.r;
  model.metadata.loo = res.solution.loo_error;
  return model;
}

inline double predict(const PceModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.dim()) throw SchemaMismatch("predict: dimension mismatch");
  Eigen::VectorXd t = x;
  if (model.mode == PceMode::lpce_on_z) {
    Eigen::VectorXd u = pit(model.marginals, x);
    t = model.copula ? rosenblatt(*model.copula, u) : u;
  }
  Eigen::VectorXd row = eval_design_row(model.bases, model.index_set, t);
  return row.dot(model.coefficients);
}

// Chunked batch prediction (memory stays bounded for very large batches).
inline Eigen::VectorXd predict(const PceModel& model, const Eigen::MatrixXd& x) {
  if (int(x.cols()) != model.dim()) throw SchemaMismatch("predict: dimension mismatch");
  Eigen::Index n = x.rows();
  int d = model.dim();
  Eigen::VectorXd out(n);
  constexpr Eigen::Index chunk = 32768;
  int need = model.index_set.max_component_degree();
  std::vector<double> phi;
  for (Eigen::Index start = 0; start < n; start += chunk) {
    Eigen::Index len = std::min(chunk, n - start);
    Eigen::MatrixXd t = pce_detail::regression_inputs(model, x.middleRows(start, len));
    std::vector<Eigen::MatrixXd> uni(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) {
      const OrthonormalBasis1D& b = model.bases[std::size_t(j)];
      phi.assign(std::size_t(b.degree_max) + 1, 0.0);
      uni[std::size_t(j)].resize(len, need + 1);
      for (Eigen::Index i = 0; i < len; ++i) {
        eval_basis_into(b, t(i, j), phi.data());
        for (int k = 0; k <= need; ++k) uni[std::size_t(j)](i, k) = phi[std::size_t(k)];
      }
    }
    Eigen::MatrixXd a = assemble_design(uni, model.index_set);
    out.segment(start, len) = a * model.coefficients;
  }
  return out;
}

// Mean and variance read off the coefficients. These are exact moments of
// the PCE under the basis orthonormality measure (product of the fitted
// marginals, or independent uniforms for lpce_on_z); with dependent inputs
// resample_statistics is the authoritative estimate for apce_on_x.
inline std::pair<double, double> moments(const PceModel& model) {
  double mean = 0.0, var = 0.0;
  for (std::size_t k = 0; k < model.index_set.indices.size(); ++k) {
    double c = model.coefficients[Eigen::Index(k)];
    if (model.index_set.indices[k].total_degree() == 0)
      mean = c;
    else
      var += c * c;
  }
  return {mean, var};
}

inline double out_of_hull_fraction(const PceModel& model, const Eigen::MatrixXd& x) {
  if (x.rows() == 0) return 0.0;
  Eigen::Index bad = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < model.dim(); ++j) {
      if (x(i, j) < model.metadata.hull_lo[std::size_t(j)] ||
          x(i, j) > model.metadata.hull_hi[std::size_t(j)]) {
        ++bad;
        break;
      }
    }
  }
  return double(bad) / double(x.rows());
}

struct StatisticsReport {
  double mean = 0.0;
  double std = 0.0;
  std::optional<KdeMarginal> pdf_estimate;  // absent for degenerate outputs
  std::int64_t n_resample = 0;
  SamplerKind sampler = SamplerKind::sobol;
};

// A-posteriori output statistics by resampling: low-discrepancy uniforms ->
// inverse Rosenblatt -> inverse PIT -> batch prediction -> moments and KDE.
inline StatisticsReport resample_statistics(const PceModel& model, std::int64_t n_resample = 1000000,
                                            SamplerKind sampler = SamplerKind::sobol,
                                            std::uint64_t seed = 42) {
  if (n_resample < 10000) throw OutOfRange("resample_statistics needs n_resample >= 10^4");
  int d = model.dim();
  if (model.mode == PceMode::lpce_on_z && d >= 2 && !model.copula)
    throw MissingCopula("lPCEonZ statistics need the fitted vine");

  StatisticsReport report;
  report.n_resample = n_resample;
  report.sampler = sampler;
  if (sampler == SamplerKind::sobol && d > SobolSequence::max_dimension)
    report.sampler = SamplerKind::pseudo_random;  // direction numbers cover d <= 10

  std::optional<SobolSequence> sobol;
  if (report.sampler == SamplerKind::sobol) sobol.emplace(d);
  Rng rng(seed);

  // for lpce_on_z the regression inputs are exactly independent uniforms, so
  // the bases are evaluated on z directly, skipping the transform round trip
  std::optional<PceModel> direct;
  if (model.mode == PceMode::lpce_on_z) {
    direct = model;
    direct->mode = PceMode::apce_on_x;
  }

  std::vector<double> ys;
  ys.reserve(std::size_t(n_resample));
  constexpr std::int64_t chunk = 32768;
  Eigen::MatrixXd z(chunk, d);
  std::vector<double> zrow(static_cast<std::size_t>(d));
  for (std::int64_t start = 0; start < n_resample; start += chunk) {
    std::int64_t len = std::min(chunk, n_resample - start);
    for (std::int64_t i = 0; i < len; ++i) {
      if (sobol) {
        sobol->next(zrow.data());
        for (int j = 0; j < d; ++j) z(i, j) = zrow[std::size_t(j)];
      } else {
        for (int j = 0; j < d; ++j) z(i, j) = rng.uniform();
      }
    }
    Eigen::VectorXd y_chunk;
    if (direct) {
      y_chunk = predict(*direct, Eigen::MatrixXd(z.topRows(len)));
    } else {
      Eigen::MatrixXd zc = z.topRows(len);
      Eigen::MatrixXd u = model.copula ? inverse_rosenblatt(*model.copula, zc) : zc;
      Eigen::MatrixXd x(len, d);
      for (int j = 0; j < d; ++j)
        for (std::int64_t i = 0; i < len; ++i)
          x(i, j) = marginal_quantile_fast(model.marginals[std::size_t(j)], u(i, j));
      y_chunk = predict(model, x);
    }
    ys.insert(ys.end(), y_chunk.data(), y_chunk.data() + y_chunk.size());
  }

  double mean = 0.0;
  for (double v : ys) mean += v;
  mean /= double(ys.size());
  double ss = 0.0;
  for (double v : ys) ss += (v - mean) * (v - mean);
  report.mean = mean;
  report.std = std::sqrt(ss / double(ys.size() - 1));

  double lo = *std::min_element(ys.begin(), ys.end());
  double hi = *std::max_element(ys.begin(), ys.end());
  if (hi - lo > 1e-12 * (1.0 + std::fabs(mean))) report.pdf_estimate = fit_kde(ys);
  return report;
}

}  // namespace pceuq

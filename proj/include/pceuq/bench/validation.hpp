#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "pceuq/bench/ishigami.hpp"
#include "pceuq/errors.hpp"
#include "pceuq/math/rng.hpp"
#include "pceuq/metrics.hpp"
#include "pceuq/pce.hpp"

// Validation protocol: for each training size and repetition draw fresh
// training and validation sets, fit, and score pointwise rMAE plus (when a
// reference is supplied) moment and density errors from resampling.

namespace pceuq::bench {

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline Eigen::VectorXd inject_noise(const Eigen::VectorXd& y, const NoiseSpec& spec) {
  if (spec.sigma < 0.0) throw OutOfRange("noise sigma must be nonnegative");
  if (spec.sigma == 0.0) return y;
  Rng rng(spec.seed);
  Eigen::VectorXd out = y;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += spec.sigma * rng.normal();
  return out;
}

using SamplerFn = std::function<Dataset(Eigen::Index n, std::uint64_t seed)>;

struct SurrogateModel {
  std::function<Eigen::VectorXd(const Eigen::MatrixXd&)> predict;
  // absent when the factory cannot produce statistics (e.g. a plain oracle)
  std::function<StatisticsReport(std::int64_t n_resample, std::uint64_t seed)> statistics;
};

using ModelFactory = std::function<SurrogateModel(const Dataset& train, std::uint64_t seed)>;

struct ReferenceStats {
  double mean = 0.0;
  double std = 0.0;
  std::optional<KdeMarginal> pdf;
};

inline ReferenceStats compute_reference(const SamplerFn& sampler, Eigen::Index n,
                                        std::uint64_t seed) {
  Dataset data = sampler(n, seed);
  ReferenceStats ref;
  ref.mean = data.y.mean();
  ref.std = std::sqrt((data.y.array() - ref.mean).square().sum() / double(data.y.size() - 1));
  ref.pdf = fit_kde(data.y);
  return ref;
}

struct ValidationCell {
  Eigen::Index n_train = 0;
  int rep = 0;
  bool ok = false;
  std::string message;
  ErrorReport errors;
  double wall_seconds = 0.0;
};

struct ValidationAggregate {
  Eigen::Index n_train = 0;
  int n_ok = 0;
  double rmae_mean = 0.0, rmae_min = 0.0, rmae_max = 0.0;
  std::optional<double> mean_err_mean, std_err_mean, kl_mean;
};

struct ValidationResult {
  std::vector<ValidationCell> cells;
  std::vector<ValidationAggregate> aggregates;
};

struct ValidationConfig {
  std::vector<Eigen::Index> n_train_list;
  Eigen::Index n_val = 10000;
  int reps = 10;
  std::optional<NoiseSpec> noise;                // applied to training outputs only
  std::optional<ReferenceStats> reference;       // enables moment/KL errors
  std::int64_t n_resample = 200000;
  std::uint64_t base_seed = 42;
  int jobs = 1;
};

namespace validation_detail {

inline ValidationCell run_cell(const ModelFactory& factory, const SamplerFn& sampler,
                               const ValidationConfig& config, Eigen::Index n_train, int rep,
                               std::uint64_t cell_seed) {
  ValidationCell cell;
  cell.n_train = n_train;
  cell.rep = rep;
  auto t0 = std::chrono::steady_clock::now();
  try {
    Dataset train = sampler(n_train, cell_seed);
    Dataset val = sampler(config.n_val, cell_seed + 1);
    if (config.noise && config.noise->sigma > 0.0)
      train.y = inject_noise(train.y, NoiseSpec{config.noise->sigma, cell_seed + 2});
    SurrogateModel model = factory(train, cell_seed + 3);
    Eigen::VectorXd pred = model.predict(val.x);
    cell.errors.rmae = rmae(pred, val.y);
    cell.errors.mae = mae(pred, val.y);
    if (config.reference && model.statistics) {
      StatisticsReport stats = model.statistics(config.n_resample, cell_seed + 4);
      auto [em, es] =
          rel_moment_errors(stats.mean, stats.std, config.reference->mean, config.reference->std);
      cell.errors.rel_mean_err = em;
      cell.errors.rel_std_err = es;
      if (stats.pdf_estimate && config.reference->pdf)
        cell.errors.kl_div = kl_divergence(Marginal(*stats.pdf_estimate),
                                           Marginal(*config.reference->pdf));
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.message = e.what();
  }
  auto t1 = std::chrono::steady_clock::now();
  cell.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
  return cell;
}

}  // namespace validation_detail

inline ValidationResult run_validation(const ModelFactory& factory, const SamplerFn& sampler,
                                       const ValidationConfig& config) {
  if (config.reps < 1) throw OutOfRange("run_validation needs reps >= 1");
  if (config.n_train_list.empty()) throw OutOfRange("run_validation needs training sizes");

  struct Task {
    Eigen::Index n_train;
    int rep;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  std::uint64_t stride = 1000003;  // room for per-cell derived seeds
  for (std::size_t si = 0; si < config.n_train_list.size(); ++si)
    for (int rep = 0; rep < config.reps; ++rep)
      tasks.push_back({config.n_train_list[si],
                       rep,
                       config.base_seed + stride * (std::uint64_t(si) * config.reps + rep + 1)});

  ValidationResult result;
  result.cells.resize(tasks.size());
  int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (std::size_t t = 0; t < tasks.size(); ++t)
      result.cells[t] = validation_detail::run_cell(factory, sampler, config, tasks[t].n_train,
                                                    tasks[t].rep, tasks[t].seed);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
      while (true) {
        std::size_t t = next.fetch_add(1);
        if (t >= tasks.size()) break;
        result.cells[t] = validation_detail::run_cell(factory, sampler, config, tasks[t].n_train,
                                                      tasks[t].rep, tasks[t].seed);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (Eigen::Index n_train : config.n_train_list) {
    ValidationAggregate agg;
    agg.n_train = n_train;
    double sum = 0.0, mn = std::numeric_limits<double>::infinity(), mx = 0.0;
    double sum_me = 0.0, sum_se = 0.0, sum_kl = 0.0;
    int n_me = 0, n_se = 0, n_kl = 0;
    for (const auto& cell : result.cells) {
      if (cell.n_train != n_train || !cell.ok || !cell.errors.rmae) continue;
      ++agg.n_ok;
      double r = *cell.errors.rmae;
      sum += r;
      mn = std::min(mn, r);
      mx = std::max(mx, r);
      if (cell.errors.rel_mean_err) { sum_me += *cell.errors.rel_mean_err; ++n_me; }
      if (cell.errors.rel_std_err) { sum_se += *cell.errors.rel_std_err; ++n_se; }
      if (cell.errors.kl_div) { sum_kl += *cell.errors.kl_div; ++n_kl; }
    }
    if (agg.n_ok > 0) {
      agg.rmae_mean = sum / agg.n_ok;
      agg.rmae_min = mn;
      agg.rmae_max = mx;
      if (n_me) agg.mean_err_mean = sum_me / n_me;
      if (n_se) agg.std_err_mean = sum_se / n_se;
      if (n_kl) agg.kl_mean = sum_kl / n_kl;
    }
    result.aggregates.push_back(agg);
  }
  return result;
}

// Plot-ready CSV: one row per (n_train, rep).
inline void write_validation_csv(std::ostream& os, const std::string& benchmark,
                                 const std::string& mode, const ValidationResult& result) {
  os << "benchmark,mode,n_train,rep,rmae,mean_err,std_err,kl,wall_seconds\n";
  auto cellfmt = [&os](const std::optional<double>& v) {
    if (v) os << *v;
  };
  os.precision(12);
  for (const auto& cell : result.cells) {
    os << benchmark << ',' << mode << ',' << cell.n_train << ',' << cell.rep << ',';
    if (cell.ok) {
      cellfmt(cell.errors.rmae);
      os << ',';
      cellfmt(cell.errors.rel_mean_err);
      os << ',';
      cellfmt(cell.errors.rel_std_err);
      os << ',';
      cellfmt(cell.errors.kl_div);
    } else {
      os << ",,,";
    }
    os << ',' << cell.wall_seconds << '\n';
  }
}

// Standard factory wrapping pce::fit for a given configuration.
inline ModelFactory pce_factory(FitConfig config) {
  return [config](const Dataset& train, std::uint64_t seed) {
    FitConfig local = config;
    local.seed = seed;
    auto model = std::make_shared<PceModel>(fit(train.x, train.y, local));
    SurrogateModel out;
    out.predict = [model](const Eigen::MatrixXd& x) { return predict(*model, x); };
    out.statistics = [model](std::int64_t n_resample, std::uint64_t stat_seed) {
      return resample_statistics(*model, n_resample, SamplerKind::sobol, stat_seed);
    };
    return out;
  };
}

}  // namespace pceuq::bench

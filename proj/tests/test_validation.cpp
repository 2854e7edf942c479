#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "pceuq/bench/ishigami.hpp"
#include "pceuq/bench/validation.hpp"

using namespace pceuq;
using namespace pceuq::bench;

TEST_CASE("noise injection basics") {
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(20, 0.0, 1.0);
  Eigen::VectorXd same = inject_noise(y, NoiseSpec{0.0, 5});
  CHECK((same.array() == y.array()).all());
  Eigen::VectorXd a = inject_noise(y, NoiseSpec{0.3, 5});
  Eigen::VectorXd b = inject_noise(y, NoiseSpec{0.3, 5});
  CHECK((a.array() == b.array()).all());
  CHECK_FALSE((a.array() == y.array()).all());
}

TEST_CASE("noise std is calibrated") {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(100000);
  Eigen::VectorXd noisy = inject_noise(y, NoiseSpec{0.15, 9});
  double mean = noisy.mean();
  double sd = std::sqrt((noisy.array() - mean).square().sum() / double(noisy.size() - 1));
  CHECK(sd == Catch::Approx(0.15).margin(0.002));
}

TEST_CASE("oracle factory achieves zero rmae") {
  ModelFactory oracle = [](const Dataset&, std::uint64_t) {
    SurrogateModel m;
    m.predict = [](const Eigen::MatrixXd& x) {
      Eigen::VectorXd y(x.rows());
      for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = ishigami_eval(x.row(i).transpose());
      return y;
    };
    return m;
  };
  ValidationConfig config;
  config.n_train_list = {20, 50};
  config.n_val = 500;
  config.reps = 3;
  ValidationResult res = run_validation(oracle, ishigami_sample, config);
  REQUIRE(res.aggregates.size() == 2);
  for (const auto& agg : res.aggregates) {
    CHECK(agg.n_ok == 3);
    CHECK(agg.rmae_mean == Catch::Approx(0.0).margin(1e-14));
  }
}

TEST_CASE("validation records failures without aborting") {
  int calls = 0;
  ModelFactory flaky = [&calls](const Dataset& train, std::uint64_t) {
    ++calls;
    if (train.x.rows() < 30) throw FitFailure("too small");
    SurrogateModel m;
    m.predict = [](const Eigen::MatrixXd& x) { return Eigen::VectorXd::Ones(x.rows()).eval(); };
    return m;
  };
  ValidationConfig config;
  config.n_train_list = {10, 100};
  config.n_val = 100;
  config.reps = 2;
  ValidationResult res = run_validation(flaky, ishigami_sample, config);
  CHECK(res.aggregates[0].n_ok == 0);
  CHECK(res.aggregates[1].n_ok == 2);
  int failed = 0;
  for (const auto& cell : res.cells)
    if (!cell.ok) ++failed;
  CHECK(failed == 2);
}

TEST_CASE("csv output has one row per cell") {
  ModelFactory constant = [](const Dataset&, std::uint64_t) {
    SurrogateModel m;
    m.predict = [](const Eigen::MatrixXd& x) {
      return Eigen::VectorXd::Constant(x.rows(), 1.5).eval();
    };
    return m;
  };
  ValidationConfig config;
  config.n_train_list = {15, 25};
  config.n_val = 50;
  config.reps = 3;
  ValidationResult res = run_validation(constant, ishigami_sample, config);
  std::ostringstream os;
  write_validation_csv(os, "ishigami", "apce-x", res);
  std::string text = os.str();
  int rows = int(std::count(text.begin(), text.end(), '\n'));
  CHECK(rows == 1 + 6);
  CHECK(text.find("benchmark,mode,n_train,rep,rmae,mean_err,std_err,kl,wall_seconds") == 0);
}

TEST_CASE("rmae declines with training size for the pce factory") {
  FitConfig fc;
  fc.mode = PceMode::apce_on_x;
  fc.fit_copula = false;
  fc.p_max = 8;
  fc.r_max = 2;
  ValidationConfig config;
  config.n_train_list = {30, 300};
  config.n_val = 1000;
  config.reps = 2;
  ValidationResult res = run_validation(pce_factory(fc), ishigami_sample, config);
  REQUIRE(res.aggregates[0].n_ok == 2);
  REQUIRE(res.aggregates[1].n_ok == 2);
  CHECK(res.aggregates[1].rmae_mean < res.aggregates[0].rmae_mean);
}

TEST_CASE("reference statistics enable moment and kl errors") {
  FitConfig fc;
  fc.mode = PceMode::apce_on_x;
  fc.p_max = 6;
  fc.r_max = 2;
  ValidationConfig config;
  config.n_train_list = {200};
  config.n_val = 500;
  config.reps = 1;
  config.n_resample = 20000;
  config.reference = compute_reference(ishigami_sample, 50000, 12345);
  ValidationResult res = run_validation(pce_factory(fc), ishigami_sample, config);
  REQUIRE(res.aggregates[0].n_ok == 1);
  REQUIRE(res.aggregates[0].mean_err_mean.has_value());
  REQUIRE(res.aggregates[0].std_err_mean.has_value());
  REQUIRE(res.aggregates[0].kl_mean.has_value());
  CHECK(*res.aggregates[0].mean_err_mean < 0.05);
  CHECK(*res.aggregates[0].std_err_mean < 0.2);
}

TEST_CASE("two independent large references agree on the mean") {
  ReferenceStats a = compute_reference(ishigami_sample, 200000, 1);
  ReferenceStats b = compute_reference(ishigami_sample, 200000, 2);
  CHECK(a.mean == Catch::Approx(b.mean).margin(4.0 * a.std / std::sqrt(200000.0)));
}

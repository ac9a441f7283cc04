#include "roamkit/errors.hpp"
#include "roamkit/kernel_regression.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace roamkit;
using namespace roamkit::testing;

namespace {

struct Sample {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
};

Sample smooth_sample(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Sample s{Eigen::MatrixXd(n, 2), Eigen::VectorXd(n)};
  for (int i = 0; i < n; ++i) {
    const double x = uniform(rng, -2, 2);
    const double y = uniform(rng, -2, 2);
    s.inputs.row(i) << x, y;
    s.targets[i] = 0.5 * std::sin(x) + 0.2 * y;
  }
  return s;
}

// Expansion coefficient of training row i (0 when it is not a support vector).
double coefficient_of(const KernelRegressor& model, const Eigen::MatrixXd& inputs, Eigen::Index i) {
  for (Eigen::Index r = 0; r < model.support().rows(); ++r) {
    if (model.support().row(r) == inputs.row(i)) return model.coefficients()[r];
  }
  return 0.0;
}

}  // namespace

TEST_CASE("median pairwise distance of three collinear points") {
  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 3;
  CHECK(median_pairwise_distance(x) == doctest::Approx(2.0));
  Eigen::MatrixXd four(4, 1);
  four << 0, 1, 3, 7;
  // distances 1 2 3 4 6 7
  CHECK(median_pairwise_distance(four) == doctest::Approx(3.5));
  CHECK(median_pairwise_distance(Eigen::MatrixXd::Zero(2, 2)) == 1.0);
}

TEST_CASE("support vector fit satisfies the epsilon-tube optimality conditions") {
  const Sample s = smooth_sample(120, 3);
  RegressionConfig config;
  config.epsilon = 0.05;
  config.C = 10.0;
  config.tolerance = 1e-8;
  const auto model = KernelRegressor::fit(s.inputs, s.targets, config);

  CHECK(model.coefficients().sum() == doctest::Approx(0.0).epsilon(1e-9));
  for (Eigen::Index i = 0; i < s.inputs.rows(); ++i) {
    const double residual = s.targets[i] - model.predict(s.inputs.row(i).transpose());
    const double a = coefficient_of(model, s.inputs, i);
    CHECK(std::abs(a) <= config.C + 1e-12);
    if (a == 0.0) {
      CHECK(std::abs(residual) <= config.epsilon + 1e-5);
    } else if (std::abs(a) < config.C - 1e-9) {
      CHECK(std::abs(residual) == doctest::Approx(config.epsilon).epsilon(1e-4));
      CHECK(residual * a > 0.0);
    } else {
      CHECK(std::abs(residual) >= config.epsilon - 1e-5);
    }
  }
}

TEST_CASE("support vector fit generalises a smooth function") {
  const Sample train = smooth_sample(200, 4);
  const Sample held_out = smooth_sample(100, 5);
  const auto model = KernelRegressor::fit(train.inputs, train.targets);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < held_out.inputs.rows(); ++i) {
    worst = std::max(worst, std::abs(model.predict(held_out.inputs.row(i).transpose()) - held_out.targets[i]));
  }
  CHECK(worst < 0.12);
  CHECK(model.support().rows() < train.inputs.rows());
}

TEST_CASE("constant targets are reproduced by the bias alone") {
  const Sample s = smooth_sample(30, 6);
  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(30, 0.3);
  const auto svr = KernelRegressor::fit(s.inputs, constant);
  CHECK(svr.predict(Eigen::Vector2d(0.1, -0.4)) == doctest::Approx(0.3).epsilon(0.05 + 1e-9));
  RegressionConfig ridge;
  ridge.backend = RegressionBackend::KernelRidge;
  const auto krr = KernelRegressor::fit(s.inputs, constant, ridge);
  CHECK(krr.predict(Eigen::Vector2d(5.0, 5.0)) == doctest::Approx(0.3));
}

TEST_CASE("kernel ridge residuals equal ridge times coefficients") {
  const Sample s = smooth_sample(60, 7);
  RegressionConfig config;
  config.backend = RegressionBackend::KernelRidge;
  config.ridge = 1e-2;
  const auto model = KernelRegressor::fit(s.inputs, s.targets, config);
  REQUIRE(model.support().rows() == 60);
  for (Eigen::Index i = 0; i < 60; ++i) {
    const double residual = s.targets[i] - model.predict(s.inputs.row(i).transpose());
    CHECK(residual == doctest::Approx(config.ridge * model.coefficients()[i]).epsilon(1e-6));
  }
}

TEST_CASE("explicit kernel width is kept and the default is the median distance") {
  const Sample s = smooth_sample(20, 8);
  RegressionConfig config;
  config.kernel_width = 0.7;
  CHECK(KernelRegressor::fit(s.inputs, s.targets, config).width() == 0.7);
  CHECK(KernelRegressor::fit(s.inputs, s.targets).width() == median_pairwise_distance(s.inputs));
}

TEST_CASE("fits are deterministic") {
  const Sample s = smooth_sample(80, 9);
  const auto a = KernelRegressor::fit(s.inputs, s.targets);
  const auto b = KernelRegressor::fit(s.inputs, s.targets);
  CHECK(a.bias() == b.bias());
  CHECK(a.coefficients() == b.coefficients());
  CHECK(a.support() == b.support());
}

TEST_CASE("invalid regression input is rejected") {
  CHECK_THROWS_AS(KernelRegressor::fit(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), InputError);
  CHECK_THROWS_AS(KernelRegressor::fit(Eigen::MatrixXd::Zero(3, 2), Eigen::VectorXd::Zero(2)), InputError);
  RegressionConfig bad;
  bad.C = 0.0;
  CHECK_THROWS_AS(KernelRegressor::fit(Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2), bad), InputError);
  CHECK_THROWS_AS(regression_backend_from_string("forest"), InputError);
  CHECK(regression_backend_from_string(to_string(RegressionBackend::KernelRidge)) == RegressionBackend::KernelRidge);
}

#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace roamkit {

enum class RegressionBackend { SupportVector, KernelRidge };

std::string to_string(RegressionBackend backend);
RegressionBackend regression_backend_from_string(const std::string& name);

struct RegressionConfig {
  RegressionBackend backend = RegressionBackend::SupportVector;
  /// RBF width σ in K(a, b) = exp(-|a - b|² / (2σ²)); defaults to the
  /// median pairwise distance of the training inputs.
  std::optional<double> kernel_width;
  double epsilon = 0.05;  // insensitive tube (support vector backend)
  double C = 10.0;        // box constraint (support vector backend)
  double ridge = 1e-2;    // Tikhonov term (kernel ridge backend)
  double tolerance = 1e-6;
  long max_iterations = 10'000'000;
};

/// Median of all pairwise Euclidean distances between rows; 1 when fewer
/// than two distinct rows exist.
double median_pairwise_distance(const Eigen::MatrixXd& inputs);

/// RBF kernel expansion f(x) = Σ_i a_i K(s_i, x) + bias.
class KernelRegressor {
 public:
  KernelRegressor(RegressionBackend backend, double width, Eigen::MatrixXd support, Eigen::VectorXd coefficients,
                  double bias);

  /// ε-SVR (SMO with second-order working set selection) or kernel ridge
  /// regression on the rows of `inputs`.
  static KernelRegressor fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                             const RegressionConfig& config = {});

  double predict(const Eigen::VectorXd& x) const;

  RegressionBackend backend() const noexcept { return backend_; }
  double width() const noexcept { return width_; }
  const Eigen::MatrixXd& support() const noexcept { return support_; }
  const Eigen::VectorXd& coefficients() const noexcept { return coefficients_; }
  double bias() const noexcept { return bias_; }

 private:
  RegressionBackend backend_;
  double width_;
  Eigen::MatrixXd support_;
  Eigen::VectorXd coefficients_;
  double bias_;
};

}  // namespace roamkit

#include "roamkit/kernel_regression.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace roamkit {

namespace {

constexpr double kTau = 1e-12;

Eigen::MatrixXd rbf_matrix(const Eigen::MatrixXd& inputs, double gamma) {
  const Eigen::Index n = inputs.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      k(i, j) = k(j, i) = std::exp(-gamma * (inputs.row(i) - inputs.row(j)).squaredNorm());
    }
  }
  return k;
}

// Dual of ε-SVR over 2n variables β = [α; α*] with labels y = [+1; -1]:
// min ½ βᵀQβ + pᵀβ, yᵀβ = 0, 0 ≤ β ≤ C, solved by SMO as in LIBSVM.
struct SmoSolution {
  Eigen::VectorXd coefficients;  // α - α*
  double bias = 0.0;
};

SmoSolution solve_svr(const Eigen::MatrixXd& kernel, const Eigen::VectorXd& targets, double epsilon, double c,
                      double tolerance, long max_iterations) {
  const Eigen::Index n = targets.size();
  const Eigen::Index m = 2 * n;
  std::vector<double> y(static_cast<std::size_t>(m));
  std::vector<double> beta(static_cast<std::size_t>(m), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(m));
  for (Eigen::Index t = 0; t < n; ++t) {
    y[static_cast<std::size_t>(t)] = 1.0;
    y[static_cast<std::size_t>(t + n)] = -1.0;
    grad[static_cast<std::size_t>(t)] = epsilon - targets[t];
    grad[static_cast<std::size_t>(t + n)] = epsilon + targets[t];
  }
  auto q = [&](Eigen::Index a, Eigen::Index b) {
    return y[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(b)] * kernel(a % n, b % n);
  };
  auto in_up = [&](Eigen::Index t) {
    const auto s = static_cast<std::size_t>(t);
    return (y[s] > 0 && beta[s] < c) || (y[s] < 0 && beta[s] > 0);
  };
  auto in_low = [&](Eigen::Index t) {
    const auto s = static_cast<std::size_t>(t);
    return (y[s] > 0 && beta[s] > 0) || (y[s] < 0 && beta[s] < c);
  };

  for (long iteration = 0; iteration < max_iterations; ++iteration) {
    Eigen::Index i = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      const double v = -y[static_cast<std::size_t>(t)] * grad[static_cast<std::size_t>(t)];
      if (in_up(t) && v > g_max) {
        g_max = v;
        i = t;
      }
    }
    Eigen::Index j = -1;
    double g_min = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[static_cast<std::size_t>(t)] * grad[static_cast<std::size_t>(t)];
      g_min = std::min(g_min, v);
      if (i < 0) continue;
      const double b = g_max - v;
      if (b <= 0.0) continue;
      double a = q(i, i) + q(t, t) - 2.0 * y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(t)] * q(i, t);
      if (a <= 0.0) a = kTau;
      const double score = -(b * b) / a;
      if (score < best) {
        best = score;
        j = t;
      }
    }
    if (i < 0 || j < 0 || g_max - g_min < tolerance) break;

    const auto si = static_cast<std::size_t>(i);
    const auto sj = static_cast<std::size_t>(j);
    const double old_i = beta[si];
    const double old_j = beta[sj];
    if (y[si] != y[sj]) {
      double quad = q(i, i) + q(j, j) + 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[si] - grad[sj]) / quad;
      const double diff = beta[si] - beta[sj];
      beta[si] += delta;
      beta[sj] += delta;
      if (diff > 0.0) {
        if (beta[sj] < 0.0) {
          beta[sj] = 0.0;
          beta[si] = diff;
        }
      } else if (beta[si] < 0.0) {
        beta[si] = 0.0;
        beta[sj] = -diff;
      }
      if (diff > 0.0) {
        if (beta[si] > c) {
          beta[si] = c;
          beta[sj] = c - diff;
        }
      } else if (beta[sj] > c) {
        beta[sj] = c;
        beta[si] = c + diff;
      }
    } else {
      double quad = q(i, i) + q(j, j) - 2.0 * q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[si] - grad[sj]) / quad;
      const double sum = beta[si] + beta[sj];
      beta[si] -= delta;
      beta[sj] += delta;
      if (sum > c) {
        if (beta[si] > c) {
          beta[si] = c;
          beta[sj] = sum - c;
        }
      } else if (beta[sj] < 0.0) {
        beta[sj] = 0.0;
        beta[si] = sum;
      }
      if (sum > c) {
        if (beta[sj] > c) {
          beta[sj] = c;
          beta[si] = sum - c;
        }
      } else if (beta[si] < 0.0) {
        beta[si] = 0.0;
        beta[sj] = sum;
      }
    }
    const double d_i = beta[si] - old_i;
    const double d_j = beta[sj] - old_j;
    for (Eigen::Index t = 0; t < m; ++t) {
      grad[static_cast<std::size_t>(t)] += q(t, i) * d_i + q(t, j) * d_j;
    }
  }

  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  int free_count = 0;
  for (Eigen::Index t = 0; t < m; ++t) {
    const auto s = static_cast<std::size_t>(t);
    const double yg = y[s] * grad[s];
    if (beta[s] >= c) {
      if (y[s] < 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else if (beta[s] <= 0.0) {
      if (y[s] > 0) upper = std::min(upper, yg); else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  const double rho = free_count > 0 ? free_sum / free_count : 0.5 * (upper + lower);

  SmoSolution solution;
  solution.coefficients.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    solution.coefficients[t] = beta[static_cast<std::size_t>(t)] - beta[static_cast<std::size_t>(t + n)];
  }
  solution.bias = -rho;
  return solution;
}

}  // namespace

std::string to_string(RegressionBackend backend) {
  return backend == RegressionBackend::SupportVector ? "svr" : "kernel_ridge";
}

RegressionBackend regression_backend_from_string(const std::string& name) {
  if (name == "svr") return RegressionBackend::SupportVector;
  if (name == "kernel_ridge") return RegressionBackend::KernelRidge;
  throw InputError("unknown regression backend '" + name + "'");
}

double median_pairwise_distance(const Eigen::MatrixXd& inputs) {
  std::vector<double> distances;
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < inputs.rows(); ++j) {
      const double d = (inputs.row(i) - inputs.row(j)).norm();
      if (d > 0.0) distances.push_back(d);
    }
  }
  if (distances.empty()) return 1.0;
  const auto mid = distances.begin() + static_cast<std::ptrdiff_t>(distances.size() / 2);
  std::nth_element(distances.begin(), mid, distances.end());
  if (distances.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(distances.begin(), mid);
  return 0.5 * (lower + upper);
}

KernelRegressor::KernelRegressor(RegressionBackend backend, double width, Eigen::MatrixXd support,
                                 Eigen::VectorXd coefficients, double bias)
    : backend_(backend),
      width_(width),
      support_(std::move(support)),
      coefficients_(std::move(coefficients)),
      bias_(bias) {
  if (!(width_ > 0.0) || !std::isfinite(width_)) throw InputError("kernel width must be positive");
  if (support_.rows() != coefficients_.size()) throw InputError("one coefficient per support vector required");
}

KernelRegressor KernelRegressor::fit(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                                     const RegressionConfig& config) {
  if (inputs.rows() == 0 || inputs.rows() != targets.size()) {
    throw InputError("regression needs one target per input row");
  }
  if (!inputs.allFinite() || !targets.allFinite()) throw InputError("regression data must be finite");
  const double width = config.kernel_width.value_or(median_pairwise_distance(inputs));
  if (!(width > 0.0)) throw InputError("kernel width must be positive");
  const double gamma = 1.0 / (2.0 * width * width);
  const Eigen::MatrixXd kernel = rbf_matrix(inputs, gamma);

  if (config.backend == RegressionBackend::KernelRidge) {
    if (!(config.ridge > 0.0)) throw InputError("ridge term must be positive");
    const double mean = targets.mean();
    const Eigen::MatrixXd system = kernel + config.ridge * Eigen::MatrixXd::Identity(kernel.rows(), kernel.cols());
    const Eigen::VectorXd alpha = system.ldlt().solve((targets.array() - mean).matrix());
    return KernelRegressor(config.backend, width, inputs, alpha, mean);
  }

  if (!(config.C > 0.0) || config.epsilon < 0.0) throw InputError("invalid support vector parameters");
  const SmoSolution solution =
      solve_svr(kernel, targets, config.epsilon, config.C, config.tolerance, config.max_iterations);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index t = 0; t < solution.coefficients.size(); ++t) {
    if (solution.coefficients[t] != 0.0) keep.push_back(t);
  }
  Eigen::MatrixXd support(static_cast<Eigen::Index>(keep.size()), inputs.cols());
  Eigen::VectorXd coefficients(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t r = 0; r < keep.size(); ++r) {
    support.row(static_cast<Eigen::Index>(r)) = inputs.row(keep[r]);
    coefficients[static_cast<Eigen::Index>(r)] = solution.coefficients[keep[r]];
  }
  return KernelRegressor(config.backend, width, std::move(support), std::move(coefficients), solution.bias);
}

double KernelRegressor::predict(const Eigen::VectorXd& x) const {
  if (x.size() != support_.cols() && support_.rows() > 0) throw InputError("input dimension mismatch");
  const double gamma = 1.0 / (2.0 * width_ * width_);
  double value = bias_;
  for (Eigen::Index i = 0; i < support_.rows(); ++i) {
    value += coefficients_[i] * std::exp(-gamma * (support_.row(i).transpose() - x).squaredNorm());
  }
  return value;
}

}  // namespace roamkit

#pragma once

#include "roamkit/cluster_model.hpp"
#include "roamkit/kernel_regression.hpp"

#include <numbers>
#include <vector>

namespace roamkit {

struct DeviationConfig {
  RegressionConfig regression;
  double phi_max = 0.4 * std::numbers::pi;
  /// Training fails when more than this fraction of a cluster's samples
  /// deviate by π/2 or more from the base direction.
  double max_rejected_fraction = 0.2;
  int min_members = 5;
};

/// Speed profile of the learned dynamics: k * min(|ξ - ξ^a|, cap).
struct SpeedProfile {
  double gain = 1.0;
  double cap = 2.0;
};

/// Learned signed deviation (counter-clockwise positive) between the motion
/// and the direction toward the cluster's base target.
class DeviationModel {
 public:
  DeviationModel(int cluster, Eigen::Vector2d base_target, KernelRegressor regressor, double phi_max);

  int cluster() const noexcept { return cluster_; }
  const Eigen::Vector2d& base_target() const noexcept { return base_target_; }
  const KernelRegressor& regressor() const noexcept { return regressor_; }
  double phi_max() const noexcept { return phi_max_; }

  double predict_raw(const Eigen::Vector2d& p) const;
  /// Regression output clipped to [-phi_max, phi_max].
  double predict(const Eigen::Vector2d& p) const;

 private:
  int cluster_;
  Eigen::Vector2d base_target_;
  KernelRegressor regressor_;
  double phi_max_;
};

/// A position sample with its (normalized-frame) velocity direction.
struct DeviationSample {
  Eigen::Vector2d position;
  Eigen::Vector2d direction;
};

/// Unit direction from p toward `target`; throws DegenerateDirectionError
/// when they coincide.
UnitDirection base_direction(const Eigen::Vector2d& target, const Eigen::Vector2d& p);

/// Base target of cluster o: the attractor for the root, otherwise the mean
/// point where the demonstrations (ordered runs of `positions` per demo)
/// cross into the parent cluster, clamped to the shared wall. Falls back to
/// the wall midpoint when no crossing is observed.
Eigen::Vector2d base_target(const ClusterModel& model, int o,
                            const std::vector<std::vector<Eigen::Vector2d>>& demo_positions);

struct DeviationFit {
  DeviationModel model;
  int samples = 0;
  int rejected = 0;
};

/// Fits the deviation regressor of cluster o. Samples deviating by π/2 or
/// more are dropped; too many dropped samples raise
/// TrainingError("deviation", ...).
DeviationFit fit_deviation(int o, const Eigen::Vector2d& target, const std::vector<DeviationSample>& members,
                           const DeviationConfig& config = {});

/// Base direction rotated by the clipped deviation, scaled by the speed
/// profile. Zero at the attractor.
Eigen::Vector2d local_dynamics(const DeviationModel& model, const Eigen::Vector2d& attractor,
                               const Eigen::Vector2d& p, const SpeedProfile& speed = {});

}  // namespace roamkit

#pragma once

#include "roamkit/avoidance.hpp"
#include "roamkit/cluster_model.hpp"
#include "roamkit/deviation_regression.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace roamkit {

/// The cell of one cluster seen as an inverted obstacle (normalized frame):
/// Γ from the cluster hull, inward normal, reference direction -r.
class ClusterHull final : public Obstacle {
 public:
  ClusterHull(const ClusterModel& model, int cluster) : model_(&model), cluster_(cluster) {}

  Eigen::Index dimension() const override { return 2; }
  double gamma(const Vector& x) const override;
  UnitDirection normal(const Vector& x) const override;
  UnitDirection reference_direction(const Vector& x) const override;
  bool is_boundary() const override { return true; }

 private:
  const ClusterModel* model_;
  int cluster_;
};

struct LearnedMotionParams {
  RoamParams roam;
  SpeedProfile speed;
  /// Gain of the re-entry field outside the region of influence.
  double fallback_gain = 1.0;
};

/// Clusters, per-cluster deviation models and hull avoidance combined into
/// one dynamical system, defined everywhere in the plane.
class LearnedDynamics {
 public:
  LearnedDynamics(ClusterModel clusters, std::vector<DeviationModel> deviations, LearnedMotionParams params = {});

  const ClusterModel& clusters() const noexcept { return clusters_; }
  const std::vector<DeviationModel>& deviations() const noexcept { return deviations_; }
  const LearnedMotionParams& params() const noexcept { return params_; }

  /// Attractor in data coordinates.
  Eigen::Vector2d attractor() const;

  /// Velocity at a data-frame position.
  Eigen::Vector2d evaluate(const Eigen::Vector2d& position) const;
  /// Velocity in the normalized frame.
  Eigen::Vector2d evaluate_normalized(const Eigen::Vector2d& p) const;
  /// Deviation-only field of the active cluster (no hull avoidance).
  Eigen::Vector2d local_velocity_normalized(const Eigen::Vector2d& p) const;

  /// Field bound to this object; it must outlive the returned callable.
  VectorField field() const;

 private:
  ClusterModel clusters_;
  std::vector<DeviationModel> deviations_;
  LearnedMotionParams params_;
};

struct TrainingConfig {
  PreprocessConfig preprocess;
  ClusterModelConfig clustering;
  DeviationConfig deviation;
  LearnedMotionParams motion;
};

struct TrainingReport {
  int k = 0;
  std::uint64_t seed = 0;
  int samples = 0;
  double influence_radius = 0.0;
  std::vector<int> cluster_sizes;
  std::vector<double> rejected_fraction;
  std::vector<int> parent;
};

struct TrainingResult {
  LearnedDynamics dynamics;
  TrainingReport report;
};

/// Cluster switches along a data-frame path that move to a cluster with a
/// smaller mean sequence value. Points outside the region of influence are
/// skipped.
int sequence_progress_violations(const LearnedDynamics& dynamics, const std::vector<Eigen::Vector2d>& path);

/// Preprocessing, clustering, hierarchy and deviation fits. Failures are
/// TrainingError labelled with the stage.
TrainingResult train(const std::vector<Demonstration>& demos, int k, std::uint64_t seed,
                     const TrainingConfig& config = {});

}  // namespace roamkit

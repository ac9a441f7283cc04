#include "roamkit/learned_motion.hpp"

#include "roamkit/errors.hpp"

#include <map>

namespace roamkit {

double ClusterHull::gamma(const Vector& x) const { return model_->gamma(cluster_, x.head<2>()); }

UnitDirection ClusterHull::normal(const Vector& x) const { return model_->cluster_normal(cluster_, x.head<2>()); }

UnitDirection ClusterHull::reference_direction(const Vector& x) const {
  const Eigen::Vector2d relative = x.head<2>() - model_->centers()[static_cast<std::size_t>(cluster_)];
  if (relative.norm() == 0.0) return UnitDirection(Vector(Eigen::Vector2d(-1.0, 0.0)));
  return UnitDirection(Vector(-relative));
}

LearnedDynamics::LearnedDynamics(ClusterModel clusters, std::vector<DeviationModel> deviations,
                                 LearnedMotionParams params)
    : clusters_(std::move(clusters)), deviations_(std::move(deviations)), params_(params) {
  if (static_cast<int>(deviations_.size()) != clusters_.k()) throw InputError("one deviation model per cluster");
  for (int o = 0; o < clusters_.k(); ++o) {
    if (deviations_[static_cast<std::size_t>(o)].cluster() != o) throw InputError("deviation models out of order");
  }
  if (!(params_.fallback_gain > 0.0)) throw InputError("fallback gain must be positive");
  if (!(params_.speed.gain > 0.0) || !(params_.speed.cap > 0.0)) throw InputError("speed profile must be positive");
}

Eigen::Vector2d LearnedDynamics::attractor() const {
  return clusters_.normalization().denormalize(clusters_.attractor());
}

Eigen::Vector2d LearnedDynamics::local_velocity_normalized(const Eigen::Vector2d& p) const {
  const auto o = clusters_.predict_cluster(p);
  if (!o) return Eigen::Vector2d::Zero();
  return local_dynamics(deviations_[static_cast<std::size_t>(*o)], clusters_.attractor(), p, params_.speed);
}

Eigen::Vector2d LearnedDynamics::evaluate_normalized(const Eigen::Vector2d& p) const {
  if (p == clusters_.attractor()) return Eigen::Vector2d::Zero();
  const auto found = clusters_.predict_cluster(p);
  if (!found) {
    const auto& near = clusters_.centers()[static_cast<std::size_t>(nearest_center(clusters_.centers(), p))];
    return -params_.fallback_gain * (p - near);
  }
  int o = *found;
  // The base target of a cluster lies on the wall to its parent; there the
  // parent's field takes over.
  if (p == deviations_[static_cast<std::size_t>(o)].base_target() && clusters_.parent()[static_cast<std::size_t>(o)] >= 0) {
    o = clusters_.parent()[static_cast<std::size_t>(o)];
  }
  const DeviationModel& deviation = deviations_[static_cast<std::size_t>(o)];
  const Eigen::Vector2d f = local_dynamics(deviation, clusters_.attractor(), p, params_.speed);
  if (f.isZero(0.0)) return f;

  const ClusterHull hull(clusters_, o);
  const Obstacle* view[] = {&hull};
  const UnitDirection convergence = base_direction(deviation.base_target(), p);
  return roam_rotate(view, Vector(p), Vector(f), convergence, params_.roam).head<2>();
}

Eigen::Vector2d LearnedDynamics::evaluate(const Eigen::Vector2d& position) const {
  const Normalization& frame = clusters_.normalization();
  return frame.denormalize_velocity(evaluate_normalized(frame.normalize(position)));
}

VectorField LearnedDynamics::field() const {
  return [this](const Vector& x) -> Vector { return evaluate(x.head<2>()); };
}

int sequence_progress_violations(const LearnedDynamics& dynamics, const std::vector<Eigen::Vector2d>& path) {
  const ClusterModel& clusters = dynamics.clusters();
  int violations = 0;
  std::optional<int> active;
  for (const auto& x : path) {
    const auto o = clusters.predict_cluster(clusters.normalization().normalize(x));
    if (!o) continue;
    if (active && *o != *active &&
        clusters.mean_sequence()[static_cast<std::size_t>(*o)] < clusters.mean_sequence()[static_cast<std::size_t>(*active)]) {
      ++violations;
    }
    active = o;
  }
  return violations;
}

TrainingResult train(const std::vector<Demonstration>& demos, int k, std::uint64_t seed,
                     const TrainingConfig& config) {
  FeatureMatrix features;
  try {
    features = build_feature_matrix(demos, config.preprocess);
  } catch (const InputError& e) {
    throw TrainingError("preprocess", e.what());
  }

  std::optional<ClusterModel> clusters;
  try {
    clusters.emplace(fit_cluster_model(features, k, seed, config.clustering));
  } catch (const InputError& e) {
    throw TrainingError("clustering", e.what());
  }

  const Normalization& frame = features.normalization;
  const std::vector<int> labels = runtime_assignment(*clusters, features);
  std::vector<std::vector<DeviationSample>> members(static_cast<std::size_t>(k));
  std::map<int, std::vector<Eigen::Vector2d>> by_demo;
  for (std::size_t i = 0; i < features.rows.size(); ++i) {
    const FeatureRow& row = features.rows[i];
    members[static_cast<std::size_t>(labels[i])].push_back(
        DeviationSample{row.position_norm, frame.normalize_velocity(row.velocity).normalized()});
    by_demo[row.demo_id].push_back(row.position_norm);
  }
  std::vector<std::vector<Eigen::Vector2d>> demo_positions;
  for (auto& [id, positions] : by_demo) demo_positions.push_back(std::move(positions));

  TrainingReport report;
  report.k = k;
  report.seed = seed;
  report.samples = static_cast<int>(features.rows.size());
  report.influence_radius = clusters->influence_radius();
  report.parent = clusters->parent();

  std::vector<DeviationModel> deviations;
  for (int o = 0; o < k; ++o) {
    const Eigen::Vector2d target = base_target(*clusters, o, demo_positions);
    DeviationFit fit = fit_deviation(o, target, members[static_cast<std::size_t>(o)], config.deviation);
    report.cluster_sizes.push_back(fit.samples);
    report.rejected_fraction.push_back(static_cast<double>(fit.rejected) / fit.samples);
    deviations.push_back(std::move(fit.model));
  }
  return TrainingResult{LearnedDynamics(std::move(*clusters), std::move(deviations), config.motion),
                        std::move(report)};
}

}  // namespace roamkit

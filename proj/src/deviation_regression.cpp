#include "roamkit/deviation_regression.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace roamkit {

DeviationModel::DeviationModel(int cluster, Eigen::Vector2d base_target, KernelRegressor regressor, double phi_max)
    : cluster_(cluster), base_target_(base_target), regressor_(std::move(regressor)), phi_max_(phi_max) {
  if (!(phi_max_ > 0.0) || phi_max_ >= 0.5 * std::numbers::pi) {
    throw InputError("maximal deviation must lie in (0, pi/2)");
  }
}

double DeviationModel::predict_raw(const Eigen::Vector2d& p) const { return regressor_.predict(p); }

double DeviationModel::predict(const Eigen::Vector2d& p) const {
  return std::clamp(predict_raw(p), -phi_max_, phi_max_);
}

UnitDirection base_direction(const Eigen::Vector2d& target, const Eigen::Vector2d& p) {
  return UnitDirection(Vector(target - p));
}

Eigen::Vector2d base_target(const ClusterModel& model, int o,
                            const std::vector<std::vector<Eigen::Vector2d>>& demo_positions) {
  const int parent = model.parent().at(static_cast<std::size_t>(o));
  if (parent < 0) return model.attractor();

  const auto [a, b] = model.wall_segment(o, parent);
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  int crossings = 0;
  for (const auto& positions : demo_positions) {
    for (std::size_t i = 0; i + 1 < positions.size(); ++i) {
      if (nearest_center(model.centers(), positions[i]) != o) continue;
      if (nearest_center(model.centers(), positions[i + 1]) != parent) continue;
      const double da = model.normal_distance(o, parent, positions[i]);
      const double db = model.normal_distance(o, parent, positions[i + 1]);
      if (!(db > da)) continue;
      sum += positions[i] + (positions[i + 1] - positions[i]) * (-da / (db - da));
      ++crossings;
    }
  }
  if (crossings == 0) return 0.5 * (a + b);
  const Eigen::Vector2d mean = sum / crossings;
  // Keep the target strictly inside the wall segment.
  const Eigen::Vector2d along = b - a;
  const double s = std::clamp((mean - a).dot(along) / along.squaredNorm(), 0.05, 0.95);
  return a + s * along;
}

DeviationFit fit_deviation(int o, const Eigen::Vector2d& target, const std::vector<DeviationSample>& members,
                           const DeviationConfig& config) {
  const std::string which = "cluster " + std::to_string(o);
  if (static_cast<int>(members.size()) < config.min_members) {
    throw TrainingError("deviation", which + " has fewer than " + std::to_string(config.min_members) + " samples");
  }
  std::vector<Eigen::Vector2d> kept_positions;
  std::vector<double> kept_targets;
  int rejected = 0;
  for (const auto& sample : members) {
    if ((sample.position - target).norm() < 1e-12) continue;
    const double deviation =
        signed_angle_2d(base_direction(target, sample.position), UnitDirection(Vector(sample.direction)));
    if (std::abs(deviation) >= 0.5 * std::numbers::pi) {
      ++rejected;
      continue;
    }
    kept_positions.push_back(sample.position);
    kept_targets.push_back(deviation);
  }
  const int total = static_cast<int>(members.size());
  if (rejected > config.max_rejected_fraction * total) {
    throw TrainingError("deviation", which + " violates the deviation bound (" + std::to_string(rejected) + " of " +
                                         std::to_string(total) + " samples turn away by pi/2 or more); increase k");
  }
  if (kept_positions.empty()) throw TrainingError("deviation", which + " has no usable samples");

  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(kept_positions.size()), 2);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(kept_positions.size()));
  for (std::size_t i = 0; i < kept_positions.size(); ++i) {
    inputs.row(static_cast<Eigen::Index>(i)) = kept_positions[i].transpose();
    targets[static_cast<Eigen::Index>(i)] = kept_targets[i];
  }
  return DeviationFit{DeviationModel(o, target, KernelRegressor::fit(inputs, targets, config.regression), config.phi_max),
                      total, rejected};
}

Eigen::Vector2d local_dynamics(const DeviationModel& model, const Eigen::Vector2d& attractor,
                               const Eigen::Vector2d& p, const SpeedProfile& speed) {
  const double distance = (p - attractor).norm();
  if (distance == 0.0) return Eigen::Vector2d::Zero();
  const UnitDirection direction = rotate_in_plane_2d(base_direction(model.base_target(), p), model.predict(p));
  return speed.gain * std::min(distance, speed.cap) * direction.vector();
}

}  // namespace roamkit

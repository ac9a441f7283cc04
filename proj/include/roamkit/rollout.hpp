#pragma once

#include "roamkit/avoidance.hpp"

#include <functional>
#include <string>
#include <vector>

namespace roamkit {

using GammaProbe = std::function<double(const Vector&)>;

struct RolloutOptions {
  double dt = 1e-2;
  int max_steps = 100000;
  double convergence_radius = 1e-2;
  /// Stop early (not converged) once the speed drops below this value.
  /// Zero disables stall detection.
  double stall_speed = 0.0;
  /// A step whose stages land inside an obstacle is split in halves, at most
  /// this many times, before the rollout is aborted.
  int max_step_refinements = 10;
};

struct RolloutResult {
  std::vector<Vector> states;
  bool converged = false;
  bool stalled = false;
  bool aborted = false;
  std::string error;
  int steps = 0;
  double min_gamma_seen = std::numeric_limits<double>::infinity();
  double final_distance_to_attractor = 0.0;
  double final_speed = 0.0;
};

/// One classical fourth-order Runge-Kutta step.
Vector rk4_step(const VectorField& field, const Vector& x, double dt);

/// Fixed-step RK4 rollout from `start` until within `convergence_radius` of
/// `attractor`, a stall, or `max_steps`. Steps that hit a PenetrationError
/// are refined (see RolloutOptions); other exceptions thrown by the field
/// abort the rollout and are reported in `error`.
RolloutResult integrate(const VectorField& field, const Vector& start, const Vector& attractor,
                        const RolloutOptions& options, const GammaProbe& gamma_probe = {});

/// Smallest Γ over a set of obstacles (+inf for an empty set).
double min_gamma(ObstacleView obstacles, const Vector& x);

struct BoundingBox {
  Eigen::Vector2d lower;
  Eigen::Vector2d upper;
};

struct GridSample {
  Eigen::Vector2d position;
  Eigen::Vector2d velocity;  // NaN where the field failed
  bool valid = true;
};

/// Row-major `resolution` x `resolution` samples spanning the box corners
/// (rows vary in y, columns in x).
std::vector<GridSample> sample_grid(const VectorField& field, const BoundingBox& box, int resolution);

/// `count` points evenly spaced in arc length along the polyline (first
/// and last point kept). A path of zero length repeats its first point.
std::vector<Eigen::Vector2d> resample_by_arc_length(const std::vector<Eigen::Vector2d>& path, int count);

/// Mean distance between corresponding points of two equally long paths.
double mean_pointwise_distance(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b);

/// Planar positions of a rollout's states.
std::vector<Eigen::Vector2d> planar_path(const RolloutResult& rollout);

}  // namespace roamkit

#include "roamkit/rollout.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

namespace roamkit {

Vector rk4_step(const VectorField& field, const Vector& x, double dt) {
  const Vector k1 = field(x);
  const Vector k2 = field(x + 0.5 * dt * k1);
  const Vector k3 = field(x + 0.5 * dt * k2);
  const Vector k4 = field(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

namespace {

struct StepState {
  Vector x;
  Vector velocity;  // field(x), reused as the next k1
};

// RK4 from a state whose velocity is known. A step that touches the inside
// of an obstacle is retried as two half steps.
StepState advance(const VectorField& field, const StepState& from, double dt, int refinements_left) {
  try {
    const Vector& k1 = from.velocity;
    const Vector k2 = field(from.x + 0.5 * dt * k1);
    const Vector k3 = field(from.x + 0.5 * dt * k2);
    const Vector k4 = field(from.x + dt * k3);
    StepState to;
    to.x = from.x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    to.velocity = field(to.x);
    return to;
  } catch (const PenetrationError&) {
    if (refinements_left == 0) throw;
    const StepState mid = advance(field, from, 0.5 * dt, refinements_left - 1);
    return advance(field, mid, 0.5 * dt, refinements_left - 1);
  }
}

}  // namespace

RolloutResult integrate(const VectorField& field, const Vector& start, const Vector& attractor,
                        const RolloutOptions& options, const GammaProbe& gamma_probe) {
  if (!(options.dt > 0.0)) throw InputError("integration step must be positive");
  if (options.max_step_refinements < 0) throw InputError("step refinements must be non-negative");
  RolloutResult result;
  result.states.push_back(start);
  StepState state{start, Vector()};

  auto probe = [&](const Vector& p) {
    if (gamma_probe) result.min_gamma_seen = std::min(result.min_gamma_seen, gamma_probe(p));
  };

  try {
    probe(state.x);
    state.velocity = field(state.x);
    while (true) {
      result.final_distance_to_attractor = (state.x - attractor).norm();
      result.final_speed = state.velocity.norm();
      if (result.final_distance_to_attractor <= options.convergence_radius) {
        result.converged = true;
        break;
      }
      if (result.steps >= options.max_steps) break;
      if (options.stall_speed > 0.0 && result.final_speed < options.stall_speed) {
        result.stalled = true;
        break;
      }
      state = advance(field, state, options.dt, options.max_step_refinements);
      if (!state.x.allFinite() || !state.velocity.allFinite()) throw std::runtime_error("non-finite state");
      ++result.steps;
      result.states.push_back(state.x);
      probe(state.x);
    }
  } catch (const std::exception& e) {
    result.aborted = true;
    result.error = e.what();
    result.final_distance_to_attractor = (state.x - attractor).norm();
  }
  return result;
}

double min_gamma(ObstacleView obstacles, const Vector& x) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const Obstacle* obstacle : obstacles) lowest = std::min(lowest, obstacle->gamma(x));
  return lowest;
}

std::vector<GridSample> sample_grid(const VectorField& field, const BoundingBox& box, int resolution) {
  if (resolution < 2) throw InputError("grid resolution must be at least 2");
  std::vector<GridSample> samples;
  samples.reserve(static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution));
  const Eigen::Vector2d span = box.upper - box.lower;
  for (int row = 0; row < resolution; ++row) {
    for (int col = 0; col < resolution; ++col) {
      GridSample sample;
      sample.position = box.lower + Eigen::Vector2d(span.x() * col / (resolution - 1.0),
                                                    span.y() * row / (resolution - 1.0));
      try {
        const Vector v = field(Vector(sample.position));
        sample.velocity = v.head<2>();
        sample.valid = sample.velocity.allFinite();
      } catch (const std::exception&) {
        sample.valid = false;
      }
      if (!sample.valid) sample.velocity.setConstant(std::numeric_limits<double>::quiet_NaN());
      samples.push_back(sample);
    }
  }
  return samples;
}

std::vector<Eigen::Vector2d> resample_by_arc_length(const std::vector<Eigen::Vector2d>& path, int count) {
  if (path.empty()) throw InputError("cannot resample an empty path");
  if (count < 2) throw InputError("resampling needs at least 2 points");
  std::vector<double> s(path.size(), 0.0);
  for (std::size_t i = 1; i < path.size(); ++i) s[i] = s[i - 1] + (path[i] - path[i - 1]).norm();
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(count));
  if (path.size() == 1) return std::vector<Eigen::Vector2d>(static_cast<std::size_t>(count), path.front());
  std::size_t j = 0;
  for (int i = 0; i < count; ++i) {
    const double target = s.back() * i / (count - 1);
    while (j + 2 < path.size() && s[j + 1] < target) ++j;
    const double length = s[j + 1] - s[j];
    const double a = length > 0.0 ? std::clamp((target - s[j]) / length, 0.0, 1.0) : 0.0;
    out.push_back(path[j] + a * (path[j + 1] - path[j]));
  }
  return out;
}

double mean_pointwise_distance(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b) {
  if (a.size() != b.size() || a.empty()) throw InputError("paths must be nonempty and equally long");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]).norm();
  return sum / static_cast<double>(a.size());
}

std::vector<Eigen::Vector2d> planar_path(const RolloutResult& rollout) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(rollout.states.size());
  for (const auto& x : rollout.states) out.push_back(x.head<2>());
  return out;
}

}  // namespace roamkit

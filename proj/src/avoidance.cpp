#include "roamkit/avoidance.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>

namespace roamkit {

InitialDynamics InitialDynamics::linear(Vector attractor, double gain) {
  if (!(gain > 0.0)) throw InputError("linear dynamics gain must be positive");
  Vector a = attractor;
  return InitialDynamics(
      Kind::Linear, [a, gain](const Vector& x) -> Vector { return -gain * (x - a); }, std::move(attractor),
      gain);
}

InitialDynamics InitialDynamics::callable(VectorField field, std::optional<Vector> attractor) {
  if (!field) throw InputError("callable dynamics needs a field");
  return InitialDynamics(Kind::Callable, std::move(field), std::move(attractor), 0.0);
}

InitialDynamics InitialDynamics::spiral(Vector attractor, double gain, double angle) {
  if (attractor.size() != 2) throw InputError("spiral dynamics are planar");
  if (!(gain > 0.0)) throw InputError("spiral gain must be positive");
  Eigen::Matrix2d rotation;
  rotation << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  const Vector a = attractor;
  return InitialDynamics(
      Kind::Spiral, [a, gain, rotation](const Vector& x) -> Vector { return -gain * rotation * (x - a); },
      std::move(attractor), gain);
}

Vector InitialDynamics::operator()(const Vector& x) const { return field_(x); }

bool InitialDynamics::at_attractor(const Vector& x) const {
  return attractor_ && (x - *attractor_).norm() <= 1e-12;
}

namespace {

double checked_gamma(const Obstacle& obstacle, int index, const Vector& x) {
  const double gamma = obstacle.gamma(x);
  if (gamma < 1.0 - kSurfaceTolerance || std::isnan(gamma)) {
    throw PenetrationError(index, gamma);
  }
  return std::max(gamma, 1.0);
}

UnitDirection nudge(const UnitDirection& dir, const Vector& away_from, double epsilon) {
  return UnitDirection(dir.vector() + epsilon * deterministic_orthogonal(away_from));
}

// Combine per-obstacle directions and magnitudes; a single obstacle is
// returned as is.
Vector combine(const UnitDirection& null_dir, const std::vector<UnitDirection>& dirs,
               const std::vector<double>& weights, double magnitude) {
  if (dirs.size() == 1) {
    return magnitude * dirs.front().vector();
  }
  return magnitude * directional_weighted_mean(null_dir, dirs, weights).vector();
}

}  // namespace

std::vector<double> obstacle_weights(std::span<const double> gammas, double gamma_cap) {
  std::vector<double> weights(gammas.size(), 0.0);
  if (gammas.empty()) return weights;
  constexpr double kOnSurface = 1e-14;
  std::size_t on_surface = 0;
  for (double g : gammas) {
    if (g - 1.0 <= kOnSurface) ++on_surface;
  }
  if (on_surface > 0) {
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      if (gammas[i] - 1.0 <= kOnSurface) weights[i] = 1.0 / static_cast<double>(on_surface);
    }
    return weights;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    weights[i] = 1.0 / (std::min(gammas[i], gamma_cap) - 1.0);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

Vector modulation_matrix_avoid(ObstacleView obstacles, const Vector& x, const Vector& f, double gamma_cap) {
  if (obstacles.empty()) return f;
  const double speed = f.norm();
  if (speed == 0.0) return f;

  const Eigen::Index d = x.size();
  std::vector<double> gammas;
  std::vector<Vector> modulated;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Obstacle& obstacle = *obstacles[i];
    const double gamma = std::min(checked_gamma(obstacle, static_cast<int>(i), x), gamma_cap);
    gammas.push_back(gamma);

    const UnitDirection normal = obstacle.normal(x);
    const UnitDirection reference = obstacle.reference_direction(x);
    Eigen::MatrixXd basis(d, d);
    basis.col(0) = reference.vector();
    basis.rightCols(d - 1) = orthogonal_complement(normal.vector());
    Eigen::VectorXd eigenvalues = Eigen::VectorXd::Constant(d, 1.0 + 1.0 / gamma);
    eigenvalues[0] = 1.0 - 1.0 / gamma;
    const Eigen::VectorXd coefficients = basis.partialPivLu().solve(f);
    modulated.push_back(basis * eigenvalues.cwiseProduct(coefficients));
  }
  if (modulated.size() == 1) return modulated.front();

  const std::vector<double> weights = obstacle_weights(gammas, gamma_cap);
  const UnitDirection null_dir(f);
  std::vector<UnitDirection> dirs;
  std::vector<double> dir_weights;
  double magnitude = 0.0;
  for (std::size_t i = 0; i < modulated.size(); ++i) {
    const double norm = modulated[i].norm();
    magnitude += weights[i] * norm;
    if (norm > 0.0) {
      dirs.emplace_back(modulated[i]);
      dir_weights.push_back(weights[i]);
    }
  }
  if (magnitude == 0.0) return Vector::Zero(d);
  return magnitude * directional_weighted_mean(null_dir, dirs, dir_weights).vector();
}

UnitDirection compute_tangent(const Obstacle& obstacle, const Vector& x, const UnitDirection& toward,
                              double epsilon) {
  const Vector n = obstacle.normal(x).vector();
  Vector projected = toward.vector() - toward.vector().dot(n) * n;
  if (projected.norm() <= 1e-9) {
    const Vector nudged = toward.vector() + epsilon * deterministic_orthogonal(n);
    projected = nudged - nudged.dot(n) * n;
  }
  return UnitDirection(projected);
}

double convergence_weight(double gamma, const UnitDirection& reference, const UnitDirection& convergence,
                          const RoamParams& params) {
  if (gamma < 1.0 - kSurfaceTolerance || std::isnan(gamma)) {
    throw InputError("convergence_weight requires gamma >= 1");
  }
  if (!(params.smoothness_exponent > 0.0)) {
    throw InputError("smoothness exponent must be positive");
  }
  const double distance_weight = 1.0 / std::max(gamma, 1.0);
  if (distance_weight >= 1.0) return 1.0;
  const double smoothness_weight =
      std::min(std::pow((reference.vector() - convergence.vector()).norm(), params.smoothness_exponent), 1.0);
  if (smoothness_weight <= 1e-12) return 0.0;
  return std::pow(distance_weight, 1.0 / smoothness_weight);
}

Vector roam_rotate(ObstacleView obstacles, const Vector& x, const Vector& f, const UnitDirection& convergence,
                   const RoamParams& params) {
  if (obstacles.empty()) return f;
  const double speed = f.norm();
  const UnitDirection initial(f);

  std::vector<double> gammas;
  std::vector<UnitDirection> rotated;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const Obstacle& obstacle = *obstacles[i];
    const double gamma = std::min(checked_gamma(obstacle, static_cast<int>(i), x), params.gamma_cap);
    gammas.push_back(gamma);

    const UnitDirection& source =
        params.tangent_source == TangentSource::ConvergenceDirection ? convergence : initial;
    const UnitDirection tangent = compute_tangent(obstacle, x, source, params.antipodal_epsilon);
    const double weight = convergence_weight(gamma, obstacle.reference_direction(x), convergence, params);

    if (params.combination == DirectionCombination::LinearNormalized) {
      Vector blend = weight * tangent.vector() + (1.0 - weight) * initial.vector();
      if (blend.norm() <= 1e-12) {
        blend = nudge(initial, tangent.vector(), params.antipodal_epsilon).vector();
      }
      rotated.emplace_back(blend);
      continue;
    }
    try {
      rotated.push_back(geodesic_interpolate(initial, tangent, weight));
    } catch (const DegenerateDirectionError&) {
      rotated.push_back(
          geodesic_interpolate(nudge(initial, tangent.vector(), params.antipodal_epsilon), tangent, weight));
    }
  }
  return combine(initial, rotated, obstacle_weights(gammas, params.gamma_cap), speed);
}

Vector roam_avoid(ObstacleView obstacles, const Vector& x, const InitialDynamics& dynamics,
                  const RoamParams& params) {
  const Vector f = dynamics(x);
  if (f.norm() == 0.0) {
    if (dynamics.at_attractor(x)) return f;
    throw DegenerateDirectionError("initial dynamics vanish away from the attractor");
  }
  if (obstacles.empty()) return f;
  // Arbitrary fields carry no convergence information beyond f itself.
  const UnitDirection convergence = dynamics.kind() == InitialDynamics::Kind::Callable
                                        ? UnitDirection(f)
                                        : UnitDirection(*dynamics.attractor() - x);
  return roam_rotate(obstacles, x, f, convergence, params);
}

}  // namespace roamkit

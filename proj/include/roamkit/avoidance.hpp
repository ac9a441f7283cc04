#pragma once

#include "roamkit/obstacles.hpp"

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace roamkit {

using VectorField = std::function<Vector(const Vector&)>;

/// The undisturbed dynamics f(x): either the linear system -k (x - x_a) or
/// an arbitrary field, optionally with a known attractor.
class InitialDynamics {
 public:
  enum class Kind { Linear, Spiral, Callable };

  static InitialDynamics linear(Vector attractor, double gain = 1.0);
  static InitialDynamics callable(VectorField field, std::optional<Vector> attractor = std::nullopt);
  /// -k R(angle) (x - x_a): a linear system whose flow is rotated by a fixed
  /// angle, spiralling into the attractor for |angle| < pi/2. Like the linear
  /// kind, ROAM uses the direction toward the attractor as its convergence
  /// direction.
  static InitialDynamics spiral(Vector attractor, double gain, double angle);

  Kind kind() const noexcept { return kind_; }
  const std::optional<Vector>& attractor() const noexcept { return attractor_; }
  double gain() const noexcept { return gain_; }

  Vector operator()(const Vector& x) const;

  /// True when `x` coincides with the attractor (within 1e-12).
  bool at_attractor(const Vector& x) const;

 private:
  InitialDynamics(Kind kind, VectorField field, std::optional<Vector> attractor, double gain)
      : kind_(kind), field_(std::move(field)), attractor_(std::move(attractor)), gain_(gain) {}

  Kind kind_;
  VectorField field_;
  std::optional<Vector> attractor_;
  double gain_;
};

/// Which direction the tangent is computed from in ROAM.
enum class TangentSource { ConvergenceDirection, InitialDirection };

/// How the initial direction and the tangent are combined.
enum class DirectionCombination { Geodesic, LinearNormalized };

struct RoamParams {
  double smoothness_exponent = 3.0;  // c^s
  double gamma_cap = 1e6;
  double antipodal_epsilon = 1e-6;
  TangentSource tangent_source = TangentSource::ConvergenceDirection;
  DirectionCombination combination = DirectionCombination::Geodesic;
};

/// Non-owning list of obstacles evaluated together.
using ObstacleView = std::span<const Obstacle* const>;

/// Γ values at or below this distance from 1 count as "on the surface";
/// anything lower than 1 - kSurfaceTolerance is a penetration.
inline constexpr double kSurfaceTolerance = 1e-9;

/// Baseline engine: M(x) f with M = E D E^-1, E = [r, e_1 .. e_{d-1}],
/// D = diag(1 - 1/Γ, 1 + 1/Γ, ...). Several obstacles are combined by a
/// directional weighted mean of the per-obstacle outputs.
Vector modulation_matrix_avoid(ObstacleView obstacles, const Vector& x, const Vector& f,
                               double gamma_cap = 1e6);

/// Projection of `toward` onto the tangent hyperplane of the obstacle's
/// level set at `x`. When `toward` is parallel to the normal it is nudged by
/// `epsilon` along a deterministic orthogonal direction first.
UnitDirection compute_tangent(const Obstacle& obstacle, const Vector& x, const UnitDirection& toward,
                              double epsilon = 1e-6);

/// w^c = (1/Γ)^(1/w^s), w^s = min(|r - d^c|^(c^s), 1).
double convergence_weight(double gamma, const UnitDirection& reference, const UnitDirection& convergence,
                          const RoamParams& params);

/// Normalized inverse surface-distance weights (Γ_i - 1)^-1 of several
/// obstacles; obstacles on their surface share all the weight.
std::vector<double> obstacle_weights(std::span<const double> gammas, double gamma_cap);

/// ROAM for an explicit initial velocity `f` and convergence direction.
/// Output has the same magnitude as `f`.
Vector roam_rotate(ObstacleView obstacles, const Vector& x, const Vector& f,
                   const UnitDirection& convergence, const RoamParams& params);

/// ROAM engine driven by the initial dynamics.
Vector roam_avoid(ObstacleView obstacles, const Vector& x, const InitialDynamics& dynamics,
                  const RoamParams& params = {});

}  // namespace roamkit

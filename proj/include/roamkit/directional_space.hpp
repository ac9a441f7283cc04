#pragma once

#include <Eigen/Dense>

#include <span>

namespace roamkit {

using Vector = Eigen::VectorXd;

/// A d-dimensional unit vector (d >= 2). Constructed by normalizing a
/// nonzero vector; every operation in this header returns unit output.
class UnitDirection {
 public:
  /// Normalizes `v`. Throws DegenerateDirectionError for zero/non-finite
  /// vectors and InputError for d < 2.
  explicit UnitDirection(const Vector& v);

  const Vector& vector() const noexcept { return v_; }
  Eigen::Index dimension() const noexcept { return v_.size(); }
  double operator[](Eigen::Index i) const { return v_[i]; }
  double dot(const UnitDirection& other) const { return v_.dot(other.v_); }

  UnitDirection operator-() const;

 private:
  struct Unchecked {};
  UnitDirection(Unchecked, Vector v) : v_(std::move(v)) {}

  Vector v_;
};

/// Angle in [0, pi] between two directions (dot product clamped).
double angle_between(const UnitDirection& a, const UnitDirection& b);

/// Point at fraction `w` of the great-circle arc from `a` to `b`.
/// Throws DegenerateDirectionError when `a` and `b` are within 1e-9 rad of
/// antipodal, since the rotation plane is then undefined.
UnitDirection geodesic_interpolate(const UnitDirection& a, const UnitDirection& b, double w);

/// Counter-clockwise rotation of a planar direction.
UnitDirection rotate_in_plane_2d(const UnitDirection& a, double angle);

/// Signed angle (counter-clockwise positive) from `from` to `to`, in (-pi, pi].
double signed_angle_2d(const UnitDirection& from, const UnitDirection& to);

/// Logarithmic map at `base`: tangent vector of length angle(base, dir)
/// pointing along the great circle toward `dir`.
Vector log_map(const UnitDirection& base, const UnitDirection& dir);

/// Exponential map at `base` (inverse of log_map for |tangent| < pi).
UnitDirection exp_map(const UnitDirection& base, const Vector& tangent);

/// Weighted mean of directions computed in the tangent space at `null_dir`.
/// Residual weight 1 - sum(weights) stays on `null_dir` (which maps to the
/// origin). Requires weights >= 0 with sum <= 1 (+1e-12 slack).
UnitDirection directional_weighted_mean(const UnitDirection& null_dir,
                                        std::span<const UnitDirection> dirs,
                                        std::span<const double> weights);

/// A unit vector orthogonal to `n`, chosen deterministically. In 2D this is
/// the counter-clockwise perpendicular.
Vector deterministic_orthogonal(const Vector& n);

/// Orthonormal basis of the hyperplane orthogonal to `n`, as the columns of
/// a d x (d-1) matrix. In 2D the single column is the counter-clockwise
/// perpendicular.
Eigen::MatrixXd orthogonal_complement(const Vector& n);

}  // namespace roamkit

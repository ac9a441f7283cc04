#include "roamkit/directional_space.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace roamkit {

namespace {

constexpr double kAntipodalTolerance = 1e-9;

}  // namespace

UnitDirection::UnitDirection(const Vector& v) {
  if (v.size() < 2) {
    throw InputError("UnitDirection requires dimension >= 2");
  }
  const double norm = v.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw DegenerateDirectionError("cannot normalize a zero or non-finite vector");
  }
  v_ = v / norm;
}

UnitDirection UnitDirection::operator-() const { return UnitDirection(Unchecked{}, -v_); }

double angle_between(const UnitDirection& a, const UnitDirection& b) {
  return std::acos(std::clamp(a.dot(b), -1.0, 1.0));
}

UnitDirection geodesic_interpolate(const UnitDirection& a, const UnitDirection& b, double w) {
  const double theta = angle_between(a, b);
  if (theta == 0.0) {
    return a;
  }
  if (std::numbers::pi - theta < kAntipodalTolerance) {
    throw DegenerateDirectionError("geodesic_interpolate: antipodal directions");
  }
  // Near-parallel inputs make the in-plane axis ill-conditioned; the chord
  // blend is accurate to O(theta^3) there.
  if (theta < 1e-7) {
    return UnitDirection((1.0 - w) * a.vector() + w * b.vector());
  }
  const Vector axis = (b.vector() - std::cos(theta) * a.vector()).normalized();
  return UnitDirection(std::cos(w * theta) * a.vector() + std::sin(w * theta) * axis);
}

UnitDirection rotate_in_plane_2d(const UnitDirection& a, double angle) {
  if (a.dimension() != 2) {
    throw InputError("rotate_in_plane_2d requires a planar direction");
  }
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return UnitDirection(Eigen::Vector2d(c * a[0] - s * a[1], s * a[0] + c * a[1]));
}

double signed_angle_2d(const UnitDirection& from, const UnitDirection& to) {
  if (from.dimension() != 2 || to.dimension() != 2) {
    throw InputError("signed_angle_2d requires planar directions");
  }
  const double cross = from[0] * to[1] - from[1] * to[0];
  const double angle = std::atan2(cross, from.dot(to));
  // atan2 returns [-pi, pi]; fold -pi onto +pi.
  return angle == -std::numbers::pi ? std::numbers::pi : angle;
}

Vector log_map(const UnitDirection& base, const UnitDirection& dir) {
  const double theta = angle_between(base, dir);
  if (std::numbers::pi - theta < kAntipodalTolerance) {
    throw DegenerateDirectionError("log_map: direction antipodal to the base");
  }
  const Vector residual = dir.vector() - base.dot(dir) * base.vector();
  const double residual_norm = residual.norm();
  if (residual_norm == 0.0) {
    return Vector::Zero(base.dimension());
  }
  return theta * residual / residual_norm;
}

UnitDirection exp_map(const UnitDirection& base, const Vector& tangent) {
  const double phi = tangent.norm();
  if (phi == 0.0) {
    return base;
  }
  return UnitDirection(std::cos(phi) * base.vector() + std::sin(phi) * tangent / phi);
}

UnitDirection directional_weighted_mean(const UnitDirection& null_dir,
                                        std::span<const UnitDirection> dirs,
                                        std::span<const double> weights) {
  if (dirs.size() != weights.size()) {
    throw InputError("directional_weighted_mean: dirs and weights differ in length");
  }
  double total = 0.0;
  Vector tangent = Vector::Zero(null_dir.dimension());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    if (weights[i] < 0.0) {
      throw InputError("directional_weighted_mean: negative weight");
    }
    total += weights[i];
    if (weights[i] > 0.0) {
      tangent += weights[i] * log_map(null_dir, dirs[i]);
    }
  }
  if (total > 1.0 + 1e-12) {
    throw InputError("directional_weighted_mean: weights sum above 1");
  }
  return exp_map(null_dir, tangent);
}

Vector deterministic_orthogonal(const Vector& n) { return orthogonal_complement(n).col(0); }

Eigen::MatrixXd orthogonal_complement(const Vector& n) {
  const Eigen::Index d = n.size();
  if (d == 2) {
    Eigen::MatrixXd out(2, 1);
    out << -n[1], n[0];
    return out / n.norm();
  }
  const Eigen::MatrixXd column = n;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(column);
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(d - 1);
}

}  // namespace roamkit

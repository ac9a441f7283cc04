#pragma once

#include "roamkit/directional_space.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace roamkit {

/// Geometry queries shared by every avoidable region. `gamma` is 1 on the
/// surface and greater than 1 in free space; `normal` points into free
/// space; `reference_direction` is the unit vector from the reference point
/// toward the query (negated for boundaries).
class Obstacle {
 public:
  virtual ~Obstacle() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual double gamma(const Vector& x) const = 0;
  virtual UnitDirection normal(const Vector& x) const = 0;
  virtual UnitDirection reference_direction(const Vector& x) const = 0;
  virtual bool is_boundary() const = 0;
};

struct EllipseShape {
  Vector semi_axes;
  /// Rotation of the first semi-axis in radians (planar obstacles only).
  double orientation = 0.0;
};

struct StarPolygonShape {
  /// Vertices relative to the obstacle center, in either winding order.
  std::vector<Eigen::Vector2d> vertices;
};

struct StarObstacleOptions {
  /// Defaults to the center.
  std::optional<Vector> reference_point;
  int distance_power = 1;
  double margin = 0.0;
  /// Angular width of the normal-blending arc around each polygon vertex.
  double vertex_blend_arc = 5.0 * 3.14159265358979323846 / 180.0;
};

/// Star-shaped obstacle (ellipse or star polygon) with
/// Γ(x) = (|x - x_ref| / R(x))^(2p).
class StarObstacle final : public Obstacle {
 public:
  StarObstacle(Vector center, EllipseShape shape, StarObstacleOptions options = {});
  StarObstacle(Vector center, StarPolygonShape shape, StarObstacleOptions options = {});

  static StarObstacle circle(Vector center, double radius, StarObstacleOptions options = {});

  Eigen::Index dimension() const override { return center_.size(); }
  double gamma(const Vector& x) const override;
  UnitDirection normal(const Vector& x) const override;
  UnitDirection reference_direction(const Vector& x) const override;
  bool is_boundary() const override { return false; }

  /// Distance from the reference point to the (margin-inflated) surface
  /// along the ray through `x`.
  double boundary_radius(const Vector& x) const;

  const Vector& center() const noexcept { return center_; }
  const Vector& reference_point() const noexcept { return reference_; }
  int distance_power() const noexcept { return power_; }
  double margin() const noexcept { return margin_; }
  bool is_polygon() const noexcept { return std::holds_alternative<PolygonData>(shape_); }

  /// Surface points at `samples` evenly spaced ray angles (planar only).
  std::vector<Eigen::Vector2d> outline(int samples) const;

 private:
  struct EllipseData {
    Vector semi_axes;
    Eigen::MatrixXd rotation;  // local -> world
  };
  struct PolygonData {
    std::vector<Eigen::Vector2d> vertices;  // relative to the reference point, CCW
    std::vector<Eigen::Vector2d> normals;   // outward normal of edge i -> i+1
    std::vector<double> offsets;            // support distance of edge i
    std::vector<double> angles;             // vertex angles about the reference point
  };

  struct RayHit {
    double radius;    // shape radius without margin
    Vector gradient;  // d radius / d u (world frame)
  };

  RayHit ellipse_ray(const EllipseData& e, const Vector& u) const;
  RayHit polygon_edge_ray(const PolygonData& p, std::size_t edge, const Eigen::Vector2d& u) const;
  std::size_t polygon_edge_for(const PolygonData& p, const Eigen::Vector2d& u) const;
  UnitDirection level_set_normal(const Vector& u, const RayHit& hit) const;

  Vector center_;
  Vector reference_;
  int power_;
  double margin_;
  double blend_half_arc_;
  std::variant<EllipseData, PolygonData> shape_;
};

/// Inverted (hull) obstacle: free space is the interior of `inner`.
/// Γ_w = 1 / Γ_inner, with normal and reference direction negated.
class BoundaryObstacle final : public Obstacle {
 public:
  explicit BoundaryObstacle(StarObstacle inner) : inner_(std::move(inner)) {}

  Eigen::Index dimension() const override { return inner_.dimension(); }
  double gamma(const Vector& x) const override;
  UnitDirection normal(const Vector& x) const override { return -inner_.normal(x); }
  UnitDirection reference_direction(const Vector& x) const override {
    return -inner_.reference_direction(x);
  }
  bool is_boundary() const override { return true; }

  const StarObstacle& inner() const noexcept { return inner_; }

 private:
  StarObstacle inner_;
};

BoundaryObstacle invert(const StarObstacle& obstacle);

}  // namespace roamkit

#include "roamkit/obstacles.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace roamkit {

namespace {

double wrap_angle(double a) {
  a = std::fmod(a + std::numbers::pi, 2.0 * std::numbers::pi);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a - std::numbers::pi;
}

double smoothstep(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * (3.0 - 2.0 * s);
}

double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) { return a.x() * b.y() - a.y() * b.x(); }

Eigen::MatrixXd planar_rotation(Eigen::Index d, double angle) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Identity(d, d);
  if (d == 2) {
    r << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  }
  return r;
}

void check_common(const Vector& center, const StarObstacleOptions& options) {
  if (center.size() < 2) throw InputError("obstacle dimension must be >= 2");
  if (!center.allFinite()) throw InputError("obstacle center must be finite");
  if (options.distance_power < 1) throw InputError("distance power p must be a positive integer");
  if (!(options.margin >= 0.0)) throw InputError("margin must be nonnegative");
  if (options.reference_point && options.reference_point->size() != center.size()) {
    throw InputError("reference point dimension mismatch");
  }
}

}  // namespace

StarObstacle::StarObstacle(Vector center, EllipseShape shape, StarObstacleOptions options)
    : center_(std::move(center)),
      power_(options.distance_power),
      margin_(options.margin),
      blend_half_arc_(0.5 * options.vertex_blend_arc) {
  check_common(center_, options);
  if (shape.semi_axes.size() != center_.size() || (shape.semi_axes.array() <= 0.0).any()) {
    throw InputError("ellipse semi-axes must be positive and match the dimension");
  }
  reference_ = options.reference_point.value_or(center_);
  EllipseData data{shape.semi_axes, planar_rotation(center_.size(), shape.orientation)};
  const Vector local = data.rotation.transpose() * (reference_ - center_);
  if (local.cwiseQuotient(data.semi_axes).squaredNorm() >= 1.0) {
    throw InputError("reference point must lie strictly inside the ellipse");
  }
  shape_ = std::move(data);
}

StarObstacle::StarObstacle(Vector center, StarPolygonShape shape, StarObstacleOptions options)
    : center_(std::move(center)),
      power_(options.distance_power),
      margin_(options.margin),
      blend_half_arc_(0.5 * options.vertex_blend_arc) {
  check_common(center_, options);
  if (center_.size() != 2) throw InputError("star polygons are planar");
  if (shape.vertices.size() < 3) throw InputError("star polygon needs at least 3 vertices");
  reference_ = options.reference_point.value_or(center_);

  PolygonData data;
  const Eigen::Vector2d ref_offset = (reference_ - center_).head<2>();
  for (const auto& v : shape.vertices) data.vertices.push_back(v - ref_offset);

  // Angular sweep about the reference point: a star polygon turns once,
  // monotonically, around it.
  double sweep = 0.0;
  const std::size_t n = data.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = data.vertices[i];
    const auto& b = data.vertices[(i + 1) % n];
    if (a.norm() == 0.0) throw InputError("reference point coincides with a polygon vertex");
    sweep += std::atan2(cross2(a, b), a.dot(b));
  }
  if (sweep < 0.0) {
    std::reverse(data.vertices.begin(), data.vertices.end());
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = data.vertices[i];
    const auto& b = data.vertices[(i + 1) % n];
    const double step = std::atan2(cross2(a, b), a.dot(b));
    if (!(step > 0.0)) {
      throw InputError("polygon is not star-shaped with respect to its reference point");
    }
  }
  if (std::abs(std::abs(sweep) - 2.0 * std::numbers::pi) > 1e-9) {
    throw InputError("reference point must lie strictly inside the star polygon");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d edge = data.vertices[(i + 1) % n] - data.vertices[i];
    const Eigen::Vector2d outward = Eigen::Vector2d(edge.y(), -edge.x()).normalized();
    data.normals.push_back(outward);
    data.offsets.push_back(outward.dot(data.vertices[i]));
    data.angles.push_back(std::atan2(data.vertices[i].y(), data.vertices[i].x()));
  }
  shape_ = std::move(data);
}

StarObstacle StarObstacle::circle(Vector center, double radius, StarObstacleOptions options) {
  const auto d = center.size();
  return StarObstacle(std::move(center), EllipseShape{Vector::Constant(d, radius), 0.0}, std::move(options));
}

StarObstacle::RayHit StarObstacle::ellipse_ray(const EllipseData& e, const Vector& u) const {
  const Vector q = e.rotation.transpose() * (reference_ - center_);
  const Vector ul = e.rotation.transpose() * u;
  const Vector inv_sq = e.semi_axes.array().square().inverse();
  const double a = ul.dot(inv_sq.cwiseProduct(ul));
  const double b = 2.0 * q.dot(inv_sq.cwiseProduct(ul));
  const double c = q.dot(inv_sq.cwiseProduct(q)) - 1.0;
  // c < 0 (reference inside), so the roots have opposite signs; take the
  // positive one in cancellation-free form.
  const double disc = std::sqrt(b * b - 4.0 * a * c);
  const double radius = b >= 0.0 ? (-2.0 * c) / (b + disc) : (-b + disc) / (2.0 * a);
  const Vector p = q + radius * ul;
  const Vector ap = inv_sq.cwiseProduct(p);
  const Vector gradient_local = -radius * ap / ul.dot(ap);
  return {radius, e.rotation * gradient_local};
}

std::size_t StarObstacle::polygon_edge_for(const PolygonData& p, const Eigen::Vector2d& u) const {
  const std::size_t n = p.vertices.size();
  std::size_t best = 0;
  double best_radius = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = p.vertices[i];
    const Eigen::Vector2d& b = p.vertices[(i + 1) % n];
    // u lies in the cone spanned by a and b (CCW from a to b).
    if (cross2(a, u) >= 0.0 && cross2(u, b) >= 0.0) {
      const double denom = p.normals[i].dot(u);
      if (denom > 0.0) {
        const double radius = p.offsets[i] / denom;
        if (radius < best_radius) {
          best_radius = radius;
          best = i;
        }
      }
    }
  }
  return best;
}

StarObstacle::RayHit StarObstacle::polygon_edge_ray(const PolygonData& p, std::size_t edge,
                                                     const Eigen::Vector2d& u) const {
  const Eigen::Vector2d& n = p.normals[edge];
  const double denom = n.dot(u);
  const double radius = p.offsets[edge] / denom;
  const Eigen::Vector2d gradient = -p.offsets[edge] * n / (denom * denom);
  return {radius, Vector(gradient)};
}

UnitDirection StarObstacle::level_set_normal(const Vector& u, const RayHit& hit) const {
  // Level sets of Γ are scaled copies of the surface about the reference
  // point, so the gradient direction only depends on the ray direction.
  const double total_radius = hit.radius + margin_;
  const Vector tangential = hit.gradient - hit.gradient.dot(u) * u;
  return UnitDirection(u - tangential / total_radius);
}

double StarObstacle::boundary_radius(const Vector& x) const {
  const Vector rel = x - reference_;
  const double dist = rel.norm();
  if (!(dist > 0.0)) {
    throw DegenerateDirectionError("boundary_radius undefined at the reference point");
  }
  const Vector u = rel / dist;
  if (const auto* e = std::get_if<EllipseData>(&shape_)) {
    return ellipse_ray(*e, u).radius + margin_;
  }
  const auto& p = std::get<PolygonData>(shape_);
  const Eigen::Vector2d u2 = u.head<2>();
  return polygon_edge_ray(p, polygon_edge_for(p, u2), u2).radius + margin_;
}

double StarObstacle::gamma(const Vector& x) const {
  const double dist = (x - reference_).norm();
  if (dist == 0.0) return 0.0;
  return std::pow(dist / boundary_radius(x), 2 * power_);
}

UnitDirection StarObstacle::normal(const Vector& x) const {
  const Vector rel = x - reference_;
  const double dist = rel.norm();
  if (!(dist > 0.0)) {
    throw DegenerateDirectionError("normal undefined at the reference point");
  }
  const Vector u = rel / dist;
  if (const auto* e = std::get_if<EllipseData>(&shape_)) {
    return level_set_normal(u, ellipse_ray(*e, u));
  }

  const auto& p = std::get<PolygonData>(shape_);
  const Eigen::Vector2d u2 = u.head<2>();
  const std::size_t n = p.vertices.size();
  const std::size_t edge = polygon_edge_for(p, u2);
  const double phi = std::atan2(u2.y(), u2.x());

  // Blend the two adjacent edge normals inside the arc around the nearest
  // vertex so the normal field is continuous across corners.
  const double to_start = wrap_angle(phi - p.angles[edge]);
  const double to_end = wrap_angle(phi - p.angles[(edge + 1) % n]);
  std::size_t before = edge;
  std::size_t after = edge;
  double offset = 0.0;
  if (std::abs(to_start) <= std::abs(to_end)) {
    before = (edge + n - 1) % n;
    offset = to_start;
  } else {
    after = (edge + 1) % n;
    offset = to_end;
  }
  const UnitDirection own = level_set_normal(u, polygon_edge_ray(p, edge, u2));
  if (blend_half_arc_ <= 0.0 || std::abs(offset) >= blend_half_arc_) {
    return own;
  }
  const UnitDirection n_before = level_set_normal(u, polygon_edge_ray(p, before, u2));
  const UnitDirection n_after = level_set_normal(u, polygon_edge_ray(p, after, u2));
  const double s = smoothstep((offset + blend_half_arc_) / (2.0 * blend_half_arc_));
  return geodesic_interpolate(n_before, n_after, s);
}

UnitDirection StarObstacle::reference_direction(const Vector& x) const {
  const Vector rel = x - reference_;
  if (!(rel.norm() > 0.0)) {
    throw DegenerateDirectionError("reference direction undefined at the reference point");
  }
  return UnitDirection(rel);
}

std::vector<Eigen::Vector2d> StarObstacle::outline(int samples) const {
  if (dimension() != 2) throw InputError("outline is only available for planar obstacles");
  std::vector<Eigen::Vector2d> points;
  points.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double phi = 2.0 * std::numbers::pi * i / samples;
    const Vector u = Eigen::Vector2d(std::cos(phi), std::sin(phi));
    const double radius = boundary_radius(reference_ + u);
    points.emplace_back((reference_ + radius * u).head<2>());
  }
  return points;
}

double BoundaryObstacle::gamma(const Vector& x) const {
  const double inner = inner_.gamma(x);
  return inner == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / inner;
}

BoundaryObstacle invert(const StarObstacle& obstacle) { return BoundaryObstacle(obstacle); }

}  // namespace roamkit

#pragma once

#include "roamkit/avoidance.hpp"
#include "roamkit/rollout.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace roamkit {

enum class Engine { Modulation, Roam };

Engine engine_from_string(const std::string& name);
std::string to_string(Engine engine);

/// Obstacle-avoidance scene read from JSON:
///   {"attractor": [x, y],
///    "dynamics": {"kind": "linear", "k": 1} | {"kind": "spiral", "k": 1, "angle_deg": 70},
///    "obstacles": [{"type": "ellipse", "center": [..], "semi_axes": [..], "orientation_deg": 0,
///                   "margin": 0, "is_boundary": false, "p": 1, "reference_point": [..]},
///                  {"type": "polygon", "center": [..], "vertices": [[..], ..], ...}],
///    "roam": {"c_s": 3.0},
///    "grid": {"lower": [..], "upper": [..], "resolution": 20}}
/// Polygon vertices are relative to the center.
struct Scenario {
  Eigen::Vector2d attractor = Eigen::Vector2d::Zero();
  InitialDynamics dynamics = InitialDynamics::linear(Vector(Eigen::Vector2d::Zero()));
  std::vector<std::shared_ptr<const Obstacle>> obstacles;
  RoamParams roam;
  BoundingBox box{Eigen::Vector2d(-5.0, -5.0), Eigen::Vector2d(5.0, 5.0)};
  int resolution = 20;

  std::vector<const Obstacle*> view() const;
  /// Avoidance field of the chosen engine; throws PenetrationError inside
  /// an obstacle.
  VectorField field(Engine engine) const;
  /// Closed outlines of every obstacle surface.
  std::vector<std::vector<Eigen::Vector2d>> outlines(int samples = 180) const;
  /// Grid starts that are not inside any obstacle.
  std::vector<Eigen::Vector2d> free_grid_starts() const;
};

Scenario scenario_from_json(const nlohmann::json& document);
Scenario load_scenario(const std::string& path);

}  // namespace roamkit

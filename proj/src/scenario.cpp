#include "roamkit/scenario.hpp"

#include "roamkit/errors.hpp"
#include "roamkit/model_io.hpp"

#include <numbers>

namespace roamkit {

using nlohmann::json;

namespace {

double degrees(double d) { return d * std::numbers::pi / 180.0; }

Eigen::Vector2d pair(const json& value, const std::string& what) {
  if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number()) {
    throw InputError("'" + what + "' must be [x, y]");
  }
  return {value[0].get<double>(), value[1].get<double>()};
}

double number_or(const json& object, const char* key, double fallback) {
  if (!object.contains(key)) return fallback;
  if (!object.at(key).is_number()) throw InputError(std::string("'") + key + "' must be a number");
  return object.at(key).get<double>();
}

std::shared_ptr<const Obstacle> parse_obstacle(const json& o) {
  if (!o.is_object()) throw InputError("obstacle entries must be objects");
  const std::string type = o.value("type", "");
  if (!o.contains("center")) throw InputError("obstacle needs a 'center'");
  const Vector center(pair(o.at("center"), "center"));

  StarObstacleOptions options;
  if (o.contains("p")) {
    if (!o.at("p").is_number_integer()) throw InputError("'p' must be an integer");
    options.distance_power = o.at("p").get<int>();
  }
  options.margin = number_or(o, "margin", 0.0);
  if (o.contains("reference_point")) options.reference_point = Vector(pair(o.at("reference_point"), "reference_point"));

  std::optional<StarObstacle> star;
  if (type == "ellipse") {
    if (!o.contains("semi_axes")) throw InputError("ellipse needs 'semi_axes'");
    star.emplace(center, EllipseShape{Vector(pair(o.at("semi_axes"), "semi_axes")), degrees(number_or(o, "orientation_deg", 0.0))},
                 options);
  } else if (type == "polygon") {
    if (!o.contains("vertices") || !o.at("vertices").is_array()) throw InputError("polygon needs 'vertices'");
    StarPolygonShape shape;
    for (const auto& v : o.at("vertices")) shape.vertices.push_back(pair(v, "vertices"));
    star.emplace(center, shape, options);
  } else {
    throw InputError("unknown obstacle type '" + type + "'");
  }
  if (o.value("is_boundary", false)) return std::make_shared<BoundaryObstacle>(invert(*star));
  return std::make_shared<StarObstacle>(*star);
}

}  // namespace

Engine engine_from_string(const std::string& name) {
  if (name == "modulation") return Engine::Modulation;
  if (name == "roam") return Engine::Roam;
  throw InputError("unknown engine '" + name + "'");
}

std::string to_string(Engine engine) { return engine == Engine::Modulation ? "modulation" : "roam"; }

std::vector<const Obstacle*> Scenario::view() const {
  std::vector<const Obstacle*> out;
  for (const auto& o : obstacles) out.push_back(o.get());
  return out;
}

VectorField Scenario::field(Engine engine) const {
  auto obstacles_copy = obstacles;
  auto dyn = dynamics;
  auto params = roam;
  return [obstacles_copy, dyn, params, engine](const Vector& x) -> Vector {
    std::vector<const Obstacle*> v;
    for (const auto& o : obstacles_copy) v.push_back(o.get());
    if (engine == Engine::Roam) return roam_avoid(v, x, dyn, params);
    return modulation_matrix_avoid(v, x, dyn(x), params.gamma_cap);
  };
}

std::vector<std::vector<Eigen::Vector2d>> Scenario::outlines(int samples) const {
  std::vector<std::vector<Eigen::Vector2d>> out;
  for (const auto& o : obstacles) {
    if (const auto* star = dynamic_cast<const StarObstacle*>(o.get())) out.push_back(star->outline(samples));
    else if (const auto* hull = dynamic_cast<const BoundaryObstacle*>(o.get())) out.push_back(hull->inner().outline(samples));
  }
  return out;
}

std::vector<Eigen::Vector2d> Scenario::free_grid_starts() const {
  std::vector<Eigen::Vector2d> starts;
  const auto obstacles_view = view();
  for (const auto& sample : sample_grid([](const Vector& x) { return x; }, box, resolution)) {
    if (min_gamma(obstacles_view, Vector(sample.position)) > 1.0) starts.push_back(sample.position);
  }
  return starts;
}

Scenario scenario_from_json(const json& doc) {
  if (!doc.is_object()) throw InputError("scenario must be a JSON object");
  try {
    Scenario s;
    if (doc.contains("attractor")) s.attractor = pair(doc.at("attractor"), "attractor");
    const Vector attractor(s.attractor);

    const json dyn = doc.value("dynamics", json::object());
    const std::string kind = dyn.value("kind", "linear");
    const double k = number_or(dyn, "k", 1.0);
    if (!(k > 0.0)) throw InputError("dynamics gain 'k' must be positive");
    if (kind == "linear") s.dynamics = InitialDynamics::linear(attractor, k);
    else if (kind == "spiral") s.dynamics = InitialDynamics::spiral(attractor, k, degrees(number_or(dyn, "angle_deg", 45.0)));
    else throw InputError("unknown dynamics kind '" + kind + "'");

    if (doc.contains("obstacles")) {
      if (!doc.at("obstacles").is_array()) throw InputError("'obstacles' must be an array");
      for (const auto& o : doc.at("obstacles")) s.obstacles.push_back(parse_obstacle(o));
    }
    if (doc.contains("roam")) {
      const json& r = doc.at("roam");
      s.roam.smoothness_exponent = number_or(r, "c_s", s.roam.smoothness_exponent);
      s.roam.gamma_cap = number_or(r, "gamma_cap", s.roam.gamma_cap);
    }
    if (doc.contains("grid")) {
      const json& g = doc.at("grid");
      if (g.contains("lower")) s.box.lower = pair(g.at("lower"), "lower");
      if (g.contains("upper")) s.box.upper = pair(g.at("upper"), "upper");
      if (g.contains("resolution")) {
        if (!g.at("resolution").is_number_integer()) throw InputError("'resolution' must be an integer");
        s.resolution = g.at("resolution").get<int>();
      }
    }
    if (!(s.box.upper.array() > s.box.lower.array()).all()) throw InputError("grid upper corner must exceed lower");
    if (s.resolution < 2) throw InputError("grid resolution must be at least 2");
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(read_json_file(path)); }

}  // namespace roamkit

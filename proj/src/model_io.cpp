#include "roamkit/model_io.hpp"

#include "roamkit/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace roamkit {

using nlohmann::json;

namespace {

json point(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

// Checked accessors: every failure is an InputError naming the key.
const json& require(const json& object, const char* key) {
  if (!object.is_object() || !object.contains(key)) throw InputError(std::string("missing key '") + key + "'");
  return object.at(key);
}

double number(const json& value, const std::string& what) {
  if (!value.is_number()) throw InputError("'" + what + "' must be a number");
  return value.get<double>();
}

int integer(const json& value, const std::string& what) {
  if (!value.is_number_integer()) throw InputError("'" + what + "' must be an integer");
  return value.get<int>();
}

double number_at(const json& object, const char* key) { return number(require(object, key), key); }
int integer_at(const json& object, const char* key) { return integer(require(object, key), key); }

Eigen::Vector2d point_at(const json& object, const char* key) {
  const json& value = require(object, key);
  if (!value.is_array() || value.size() != 2) throw InputError(std::string("'") + key + "' must be [x, y]");
  return {number(value[0], key), number(value[1], key)};
}

std::vector<double> numbers_at(const json& object, const char* key) {
  const json& value = require(object, key);
  if (!value.is_array()) throw InputError(std::string("'") + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : value) out.push_back(number(v, key));
  return out;
}

std::vector<Eigen::Vector2d> points_at(const json& object, const char* key) {
  const json& value = require(object, key);
  if (!value.is_array()) throw InputError(std::string("'") + key + "' must be an array of points");
  std::vector<Eigen::Vector2d> out;
  for (const auto& v : value) {
    if (!v.is_array() || v.size() != 2) throw InputError(std::string("'") + key + "' must hold [x, y] pairs");
    out.emplace_back(number(v[0], key), number(v[1], key));
  }
  return out;
}

void reject_unknown(const json& object, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!object.is_object()) throw InputError(where + " must be an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : object.items()) {
    if (!keys.contains(key)) throw InputError("unknown key '" + key + "' in " + where);
  }
}

json regressor_to_json(const KernelRegressor& r) {
  json support = json::array();
  for (Eigen::Index i = 0; i < r.support().rows(); ++i) support.push_back(point(r.support().row(i).transpose()));
  return {{"backend", to_string(r.backend())},
          {"kernel", "rbf"},
          {"width", r.width()},
          {"bias", r.bias()},
          {"support", support},
          {"coefficients", std::vector<double>(r.coefficients().data(), r.coefficients().data() + r.coefficients().size())}};
}

KernelRegressor regressor_from_json(const json& j) {
  const auto support = points_at(j, "support");
  const auto coefficients = numbers_at(j, "coefficients");
  Eigen::MatrixXd s(static_cast<Eigen::Index>(support.size()), 2);
  for (std::size_t i = 0; i < support.size(); ++i) s.row(static_cast<Eigen::Index>(i)) = support[i].transpose();
  const Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(coefficients.data(), static_cast<Eigen::Index>(coefficients.size()));
  return KernelRegressor(regression_backend_from_string(require(j, "backend").get<std::string>()), number_at(j, "width"),
                         s, c, number_at(j, "bias"));
}

std::string tangent_name(TangentSource s) {
  return s == TangentSource::ConvergenceDirection ? "convergence" : "initial";
}
std::string combination_name(DirectionCombination c) {
  return c == DirectionCombination::Geodesic ? "geodesic" : "linear";
}

}  // namespace

json report_to_json(const TrainingReport& report) {
  return {{"k", report.k},
          {"seed", report.seed},
          {"samples", report.samples},
          {"influence_radius", report.influence_radius},
          {"cluster_sizes", report.cluster_sizes},
          {"rejected_fraction", report.rejected_fraction},
          {"parent", report.parent}};
}

json model_to_json(const LearnedDynamics& dynamics, const TrainingReport* report) {
  const ClusterModel& c = dynamics.clusters();
  const LearnedMotionParams& p = dynamics.params();

  json clusters = json::array();
  for (int o = 0; o < c.k(); ++o) {
    const DeviationModel& d = dynamics.deviations()[static_cast<std::size_t>(o)];
    const Eigen::VectorXd features = c.feature_centers().row(o).transpose();
    clusters.push_back({{"center", point(c.centers()[static_cast<std::size_t>(o)])},
                        {"feature_center", std::vector<double>(features.data(), features.data() + features.size())},
                        {"mean_sequence", c.mean_sequence()[static_cast<std::size_t>(o)]},
                        {"parent", c.parent()[static_cast<std::size_t>(o)]},
                        {"base_target", point(d.base_target())},
                        {"phi_max", d.phi_max()},
                        {"regressor", regressor_to_json(d.regressor())}});
  }

  json doc = {
      {"format_version", kModelFormatVersion},
      {"kind", "roamkit.learned_dynamics"},
      {"frame", "positions, centers and targets are in the normalized frame: (x - mean) / scale"},
      {"deviation_sign", "counter-clockwise positive, radians"},
      {"normalization", {{"mean", point(c.normalization().mean)}, {"scale", point(c.normalization().scale)}}},
      {"feature_weights",
       {{"position", c.feature_weights().position},
        {"direction", c.feature_weights().direction},
        {"sequence", c.feature_weights().sequence}}},
      {"influence_radius", c.influence_radius()},
      {"gamma_cap", c.gamma_cap()},
      {"attractor", point(c.attractor())},
      {"root", c.root()},
      {"clusters", clusters},
      {"motion",
       {{"speed", {{"gain", p.speed.gain}, {"cap", p.speed.cap}}},
        {"fallback_gain", p.fallback_gain},
        {"roam",
         {{"c_s", p.roam.smoothness_exponent},
          {"gamma_cap", p.roam.gamma_cap},
          {"antipodal_epsilon", p.roam.antipodal_epsilon},
          {"tangent_source", tangent_name(p.roam.tangent_source)},
          {"combination", combination_name(p.roam.combination)}}}}},
  };
  if (report) doc["training_report"] = report_to_json(*report);
  return doc;
}

LearnedDynamics model_from_json(const json& doc) {
  try {
    const int version = integer_at(doc, "format_version");
    if (version > kModelFormatVersion) {
      throw InputError("model format_version " + std::to_string(version) + " is newer than supported version " +
                       std::to_string(kModelFormatVersion));
    }
    if (version < 1) throw InputError("invalid model format_version");

    const json& norm = require(doc, "normalization");
    Normalization frame{point_at(norm, "mean"), point_at(norm, "scale")};
    const json& fw = require(doc, "feature_weights");
    FeatureWeights weights{number_at(fw, "position"), number_at(fw, "direction"), number_at(fw, "sequence")};

    const json& list = require(doc, "clusters");
    if (!list.is_array() || list.empty()) throw InputError("'clusters' must be a nonempty array");
    const auto k = static_cast<Eigen::Index>(list.size());
    Eigen::MatrixXd feature_centers(k, 5);
    std::vector<Eigen::Vector2d> centers;
    std::vector<double> sequence;
    for (Eigen::Index o = 0; o < k; ++o) {
      const json& entry = list[static_cast<std::size_t>(o)];
      const auto f = numbers_at(entry, "feature_center");
      if (f.size() != 5) throw InputError("'feature_center' must have 5 entries");
      for (Eigen::Index j = 0; j < 5; ++j) feature_centers(o, j) = f[static_cast<std::size_t>(j)];
      centers.push_back(point_at(entry, "center"));
      sequence.push_back(number_at(entry, "mean_sequence"));
    }
    ClusterModel clusters(frame, weights, feature_centers, centers, number_at(doc, "influence_radius"), sequence,
                          point_at(doc, "attractor"), number_at(doc, "gamma_cap"));

    std::vector<DeviationModel> deviations;
    for (Eigen::Index o = 0; o < k; ++o) {
      const json& entry = list[static_cast<std::size_t>(o)];
      if (integer_at(entry, "parent") != clusters.parent()[static_cast<std::size_t>(o)]) {
        throw InputError("stored cluster hierarchy does not match the cluster centers");
      }
      deviations.emplace_back(static_cast<int>(o), point_at(entry, "base_target"),
                              regressor_from_json(require(entry, "regressor")), number_at(entry, "phi_max"));
    }

    const json& m = require(doc, "motion");
    LearnedMotionParams params;
    const json& speed = require(m, "speed");
    params.speed = {number_at(speed, "gain"), number_at(speed, "cap")};
    params.fallback_gain = number_at(m, "fallback_gain");
    const json& roam = require(m, "roam");
    params.roam.smoothness_exponent = number_at(roam, "c_s");
    params.roam.gamma_cap = number_at(roam, "gamma_cap");
    params.roam.antipodal_epsilon = number_at(roam, "antipodal_epsilon");
    const auto tangent = require(roam, "tangent_source").get<std::string>();
    if (tangent != "convergence" && tangent != "initial") throw InputError("unknown tangent_source '" + tangent + "'");
    params.roam.tangent_source =
        tangent == "convergence" ? TangentSource::ConvergenceDirection : TangentSource::InitialDirection;
    const auto combination = require(roam, "combination").get<std::string>();
    if (combination != "geodesic" && combination != "linear") {
      throw InputError("unknown combination '" + combination + "'");
    }
    params.roam.combination =
        combination == "geodesic" ? DirectionCombination::Geodesic : DirectionCombination::LinearNormalized;
    return LearnedDynamics(std::move(clusters), std::move(deviations), params);
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model: ") + e.what());
  } catch (const TrainingError& e) {
    throw InputError(std::string("inconsistent model: ") + e.what());
  }
}

std::string dump_model(const LearnedDynamics& dynamics, const TrainingReport* report) {
  return model_to_json(dynamics, report).dump(2) + "\n";
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void save_model(const std::string& path, const LearnedDynamics& dynamics, const TrainingReport* report) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << dump_model(dynamics, report);
  if (!out) throw InputError("failed writing '" + path + "'");
}

LearnedDynamics load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

TrainingConfig training_config_from_json(const json& doc) {
  TrainingConfig c;
  try {
    reject_unknown(doc,
                   {"stride", "smoothing_window", "scale_mode", "feature_weights", "kmeans", "influence_radius",
                    "radius_factor", "radius_quantile", "gamma_cap", "regression", "phi_max",
                    "max_rejected_fraction", "min_members", "speed", "fallback_gain", "roam"},
                   "training config");
    if (doc.contains("stride")) c.preprocess.stride = integer_at(doc, "stride");
    if (doc.contains("smoothing_window")) c.preprocess.smoothing_window = integer_at(doc, "smoothing_window");
    if (doc.contains("scale_mode")) {
      const auto mode = doc.at("scale_mode").get<std::string>();
      if (mode == "std") c.preprocess.scale_mode = ScaleMode::StandardDeviation;
      else if (mode == "variance") c.preprocess.scale_mode = ScaleMode::Variance;
      else throw InputError("unknown scale_mode '" + mode + "'");
    }
    if (doc.contains("feature_weights")) {
      const json& fw = doc.at("feature_weights");
      reject_unknown(fw, {"position", "direction", "sequence"}, "feature_weights");
      if (fw.contains("position")) c.preprocess.weights.position = number_at(fw, "position");
      if (fw.contains("direction")) c.preprocess.weights.direction = number_at(fw, "direction");
      if (fw.contains("sequence")) c.preprocess.weights.sequence = number_at(fw, "sequence");
    }
    if (doc.contains("kmeans")) {
      const json& km = doc.at("kmeans");
      reject_unknown(km, {"restarts", "max_iterations", "tolerance"}, "kmeans");
      if (km.contains("restarts")) c.clustering.kmeans.restarts = integer_at(km, "restarts");
      if (km.contains("max_iterations")) c.clustering.kmeans.max_iterations = integer_at(km, "max_iterations");
      if (km.contains("tolerance")) c.clustering.kmeans.tolerance = number_at(km, "tolerance");
    }
    if (doc.contains("influence_radius")) c.clustering.influence_radius = number_at(doc, "influence_radius");
    if (doc.contains("radius_factor")) c.clustering.radius_factor = number_at(doc, "radius_factor");
    if (doc.contains("radius_quantile")) c.clustering.radius_quantile = number_at(doc, "radius_quantile");
    if (doc.contains("gamma_cap")) {
      c.clustering.gamma_cap = number_at(doc, "gamma_cap");
      c.motion.roam.gamma_cap = c.clustering.gamma_cap;
    }
    if (doc.contains("regression")) {
      const json& r = doc.at("regression");
      reject_unknown(r, {"backend", "kernel_width", "epsilon", "C", "ridge"}, "regression");
      RegressionConfig& reg = c.deviation.regression;
      if (r.contains("backend")) reg.backend = regression_backend_from_string(r.at("backend").get<std::string>());
      if (r.contains("kernel_width")) reg.kernel_width = number_at(r, "kernel_width");
      if (r.contains("epsilon")) reg.epsilon = number_at(r, "epsilon");
      if (r.contains("C")) reg.C = number_at(r, "C");
      if (r.contains("ridge")) reg.ridge = number_at(r, "ridge");
    }
    if (doc.contains("phi_max")) c.deviation.phi_max = number_at(doc, "phi_max");
    if (doc.contains("max_rejected_fraction")) c.deviation.max_rejected_fraction = number_at(doc, "max_rejected_fraction");
    if (doc.contains("min_members")) c.deviation.min_members = integer_at(doc, "min_members");
    if (doc.contains("speed")) {
      const json& s = doc.at("speed");
      reject_unknown(s, {"gain", "cap"}, "speed");
      if (s.contains("gain")) c.motion.speed.gain = number_at(s, "gain");
      if (s.contains("cap")) c.motion.speed.cap = number_at(s, "cap");
    }
    if (doc.contains("fallback_gain")) c.motion.fallback_gain = number_at(doc, "fallback_gain");
    if (doc.contains("roam")) {
      const json& r = doc.at("roam");
      reject_unknown(r, {"c_s"}, "roam");
      if (r.contains("c_s")) c.motion.roam.smoothness_exponent = number_at(r, "c_s");
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed training config: ") + e.what());
  }
  return c;
}

TrainingConfig load_training_config(const std::string& path) {
  return training_config_from_json(read_json_file(path));
}

}  // namespace roamkit

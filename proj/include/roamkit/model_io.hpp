#pragma once

#include "roamkit/learned_motion.hpp"

#include <json.hpp>

#include <string>

namespace roamkit {

/// Model files carry this version; files with a newer version are rejected.
inline constexpr int kModelFormatVersion = 1;

/// Self-describing JSON for a trained model. Keys are sorted and numbers
/// are written with round-trip precision, so equal models give equal text.
nlohmann::json model_to_json(const LearnedDynamics& dynamics, const TrainingReport* report = nullptr);
LearnedDynamics model_from_json(const nlohmann::json& document);

std::string dump_model(const LearnedDynamics& dynamics, const TrainingReport* report = nullptr);
void save_model(const std::string& path, const LearnedDynamics& dynamics, const TrainingReport* report = nullptr);
/// Throws InputError for unreadable, malformed or incompatible files.
LearnedDynamics load_model(const std::string& path);

nlohmann::json report_to_json(const TrainingReport& report);

/// Training options; every key is optional and unknown keys are rejected.
///   {"stride", "smoothing_window", "scale_mode": "std"|"variance",
///    "feature_weights": {"position", "direction", "sequence"},
///    "kmeans": {"restarts", "max_iterations", "tolerance"},
///    "influence_radius", "radius_factor", "radius_quantile", "gamma_cap",
///    "regression": {"backend": "svr"|"kernel_ridge", "kernel_width",
///                   "epsilon", "C", "ridge"},
///    "phi_max", "max_rejected_fraction", "min_members",
///    "speed": {"gain", "cap"}, "fallback_gain", "roam": {"c_s"}}
TrainingConfig training_config_from_json(const nlohmann::json& document);
TrainingConfig load_training_config(const std::string& path);

/// Parses a JSON file, turning I/O and syntax failures into InputError.
nlohmann::json read_json_file(const std::string& path);

}  // namespace roamkit

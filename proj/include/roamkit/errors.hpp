#pragma once

#include <stdexcept>
#include <string>

namespace roamkit {

/// Input lies on the measure-zero singular set of a directional operation
/// (antipodal directions, zero vectors).
class DegenerateDirectionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A query point lies strictly inside an obstacle (Γ < 1).
class PenetrationError : public std::runtime_error {
 public:
  PenetrationError(int obstacle_index, double gamma)
      : std::runtime_error("penetration of obstacle " + std::to_string(obstacle_index) +
                           " (gamma = " + std::to_string(gamma) + ")"),
        obstacle_index_(obstacle_index),
        gamma_(gamma) {}

  int obstacle_index() const noexcept { return obstacle_index_; }
  double gamma() const noexcept { return gamma_; }

 private:
  int obstacle_index_;
  double gamma_;
};

/// Malformed or inconsistent user input (files, geometry, parameters).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Failure inside the learning pipeline; `stage()` names the pipeline stage.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace roamkit

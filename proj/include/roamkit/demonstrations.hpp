#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace roamkit {

struct DemoSample {
  double t = 0.0;
  Eigen::Vector2d position = Eigen::Vector2d::Zero();
  std::optional<Eigen::Vector2d> velocity;
};

/// One demonstrated trajectory: strictly increasing time, at least three
/// finite samples.
struct Demonstration {
  int demo_id = 0;
  std::vector<DemoSample> samples;

  bool has_velocities() const;
  /// Throws InputError when the invariants do not hold.
  void validate() const;
};

/// Reads the `demo_id,t,x,y[,vx,vy]` CSV format (header required, rows
/// grouped by demonstration and ordered in time).
std::vector<Demonstration> read_demonstrations_csv(std::istream& in);
std::vector<Demonstration> read_demonstrations_csv(const std::string& path);
void write_demonstrations_csv(std::ostream& out, const std::vector<Demonstration>& demos);

/// Central differences (one-sided at the ends) followed by a centered moving
/// average of `smoothing_window` samples. Samples with zero velocity are
/// dropped; throws InputError if fewer than 3 samples or none survive.
Demonstration estimate_velocities(const Demonstration& demo, int smoothing_window = 5);

/// Removes samples whose velocity norm is zero.
Demonstration drop_stationary_samples(const Demonstration& demo);

/// How positions are scaled after centering.
enum class ScaleMode { StandardDeviation, Variance };

/// Componentwise affine map between data coordinates and the normalized
/// frame in which clustering and learning happen.
struct Normalization {
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  Eigen::Vector2d scale = Eigen::Vector2d::Ones();

  Eigen::Vector2d normalize(const Eigen::Vector2d& p) const { return (p - mean).cwiseQuotient(scale); }
  Eigen::Vector2d denormalize(const Eigen::Vector2d& p) const { return p.cwiseProduct(scale) + mean; }
  Eigen::Vector2d normalize_velocity(const Eigen::Vector2d& v) const { return v.cwiseQuotient(scale); }
  Eigen::Vector2d denormalize_velocity(const Eigen::Vector2d& v) const { return v.cwiseProduct(scale); }
};

/// Mean and per-component spread over all samples of all demonstrations.
/// Throws InputError for an empty set or a component without spread.
Normalization fit_normalization(const std::vector<Demonstration>& demos, ScaleMode mode = ScaleMode::StandardDeviation);

/// v / |v| for every sample (velocities required and nonzero).
std::vector<Eigen::Vector2d> unit_directions(const Demonstration& demo);

/// i / N for the 1-based sample index i of an N-sample demonstration.
std::vector<double> sequence_values(const Demonstration& demo);

/// Relative scaling of the three feature blocks before clustering.
struct FeatureWeights {
  double position = 1.0;
  double direction = 1.5;
  double sequence = 2.0;
};

struct FeatureRow {
  Eigen::Vector2d position_norm;
  Eigen::Vector2d direction;  // unit data-frame velocity direction
  double sequence = 0.0;
  int demo_id = 0;
  int sample_index = 0;
  Eigen::Vector2d position;  // data frame
  Eigen::Vector2d velocity;  // data frame
};

struct FeatureMatrix {
  std::vector<FeatureRow> rows;
  Normalization normalization;
  FeatureWeights weights;

  /// rows x 5 matrix [w_p * position_norm, w_d * direction, w_s * sequence].
  Eigen::MatrixXd clustering_features() const;
};

struct PreprocessConfig {
  int smoothing_window = 5;
  ScaleMode scale_mode = ScaleMode::StandardDeviation;
  FeatureWeights weights;
  /// Keep every n-th sample (after velocity estimation and filtering).
  int stride = 1;
};

/// Velocity estimation (when missing), stationary-sample filtering and
/// feature assembly. Deterministic for identical input.
FeatureMatrix build_feature_matrix(const std::vector<Demonstration>& demos, const PreprocessConfig& config = {});

/// Demonstrations after the same filtering `build_feature_matrix` applies.
std::vector<Demonstration> prepare_demonstrations(const std::vector<Demonstration>& demos,
                                                  const PreprocessConfig& config = {});

}  // namespace roamkit

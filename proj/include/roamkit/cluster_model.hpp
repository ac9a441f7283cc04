#pragma once

#include "roamkit/demonstrations.hpp"
#include "roamkit/directional_space.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace roamkit {

struct KMeansOptions {
  int restarts = 20;
  int max_iterations = 300;
  /// Lloyd iterations stop once no center moves farther than this.
  double tolerance = 1e-8;
};

struct KMeansResult {
  Eigen::MatrixXd centers;  // k x columns
  std::vector<int> labels;
  double inertia = 0.0;
};

/// Lloyd's algorithm with k-means++ seeding; the lowest-inertia restart wins
/// (earliest on ties). Empty clusters are re-seeded at the point farthest
/// from its center. Bit-identical for identical input and seed.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options = {});

/// Index of the nearest row of `centers` (lowest index on ties).
int nearest_center(const std::vector<Eigen::Vector2d>& centers, const Eigen::Vector2d& p);

/// Clusters o, j are adjacent when the bisector between their centers
/// bounds both Voronoi cells inside the disc of `radius` around the centers
/// along a segment of positive length.
std::vector<std::vector<int>> voronoi_neighbors(const std::vector<Eigen::Vector2d>& centers, double radius);

/// Parent of each cluster: the neighbor with the smallest mean sequence
/// strictly above its own; -1 for the cluster with the largest mean
/// sequence. Throws TrainingError("hierarchy", ...) if a non-root cluster
/// has no such neighbor.
std::vector<int> build_hierarchy(const std::vector<std::vector<int>>& neighbors,
                                 const std::vector<double>& mean_sequence);

/// Weights after making wall `t` transparent, plus its enlarged local radius.
struct TransparentAdjustment {
  std::vector<double> weights;
  double local_radius = 0.0;
};

/// ŵ_i = max(w_i - w_t, 0) for i != t, ŵ_t = 1 - Σ ŵ_i and
/// r_t / (1 - w_t), the latter capped at gamma_cap * distance.
TransparentAdjustment transparent_adjust(std::span<const double> weights, std::size_t t, double local_radius,
                                         double distance, double gamma_cap);

/// Evaluation of one cluster hull at a point. Walls are the cluster's
/// neighbors in order, followed by the enclosing sphere.
struct HullQuery {
  int cluster = 0;
  Eigen::Vector2d relative;  // ξ - ξ^c
  double distance = 0.0;     // |ξ - ξ^c|
  Eigen::Vector2d radial;    // unit relative position ((1, 0) at the center)
  double boundary_factor = 0.0;
  Eigen::Vector2d boundary_point;
  Eigen::Vector2d projected;
  std::vector<double> normal_distances;  // at the projected point
  std::vector<double> weights;           // before transparency
  std::vector<double> local_radii;
  std::optional<std::size_t> transparent_wall;
  double gamma = 1.0;
};

/// K-means clusters of the demonstrations with their position-space hulls.
/// All positions taken and returned by the geometry queries are in the
/// normalized frame.
class ClusterModel {
 public:
  ClusterModel(Normalization normalization, FeatureWeights weights, Eigen::MatrixXd feature_centers,
               std::vector<Eigen::Vector2d> centers, double influence_radius, std::vector<double> mean_sequence,
               Eigen::Vector2d attractor, double gamma_cap = 1e6);

  int k() const noexcept { return static_cast<int>(centers_.size()); }
  const Normalization& normalization() const noexcept { return normalization_; }
  const FeatureWeights& feature_weights() const noexcept { return weights_; }
  const Eigen::MatrixXd& feature_centers() const noexcept { return feature_centers_; }
  const std::vector<Eigen::Vector2d>& centers() const noexcept { return centers_; }
  Eigen::Vector2d position_center(int o) const { return normalization_.denormalize(centers_.at(o)); }
  double influence_radius() const noexcept { return radius_; }
  const std::vector<double>& mean_sequence() const noexcept { return mean_sequence_; }
  const Eigen::Vector2d& attractor() const noexcept { return attractor_; }
  double gamma_cap() const noexcept { return gamma_cap_; }
  const std::vector<std::vector<int>>& neighbors() const noexcept { return neighbors_; }
  const std::vector<int>& parent() const noexcept { return parent_; }
  int root() const noexcept { return root_; }

  /// Nearest center if within the influence radius.
  std::optional<int> predict_cluster(const Eigen::Vector2d& p) const;

  /// Signed distance to the bisector between clusters o and i, positive on
  /// i's side.
  double normal_distance(int o, int i, const Eigen::Vector2d& p) const;

  /// b with p + b * direction on the bisector between o and i; +inf when
  /// the ray is parallel to it.
  double wall_intersection(int o, int i, const Eigen::Vector2d& p, const Eigen::Vector2d& direction) const;

  /// Endpoints of the wall shared by o and its neighbor i.
  std::pair<Eigen::Vector2d, Eigen::Vector2d> wall_segment(int o, int i) const;

  /// (b, ξ^b): first boundary hit along the radial ray from p.
  std::pair<double, Eigen::Vector2d> boundary_point(int o, const Eigen::Vector2d& p) const;

  /// Points inside the hull are mapped outside it by inversion in the
  /// boundary; points on or beyond the boundary are returned unchanged.
  Eigen::Vector2d project_position(int o, const Eigen::Vector2d& p) const;

  /// Full hull evaluation. Throws InputError when p lies outside the cell
  /// of cluster o.
  HullQuery query(int o, const Eigen::Vector2d& p) const;

  std::vector<double> gamma_weights(int o, const Eigen::Vector2d& p) const { return query(o, p).weights; }
  double gamma(int o, const Eigen::Vector2d& p) const { return query(o, p).gamma; }

  /// Inward hull normal: weighted mean of the inward wall normals around
  /// the null direction -r.
  UnitDirection cluster_normal(int o, const Eigen::Vector2d& p) const;

  /// Index of the transparent wall of o within its neighbor list.
  std::optional<std::size_t> transparent_wall(int o) const;

 private:
  bool faces_wall(int o, int i, const Eigen::Vector2d& direction) const;

  Normalization normalization_;
  FeatureWeights weights_;
  Eigen::MatrixXd feature_centers_;
  std::vector<Eigen::Vector2d> centers_;
  double radius_;
  std::vector<double> mean_sequence_;
  Eigen::Vector2d attractor_;
  double gamma_cap_;
  std::vector<std::vector<int>> neighbors_;
  std::vector<int> parent_;
  int root_ = 0;
};

struct ClusterModelConfig {
  KMeansOptions kmeans;
  /// Fixed influence radius (normalized units); otherwise derived from the
  /// member spread.
  std::optional<double> influence_radius;
  double radius_factor = 1.5;
  double radius_quantile = 0.95;
  double gamma_cap = 1e6;
};

/// Runtime (nearest position center) assignment of every feature row.
std::vector<int> runtime_assignment(const ClusterModel& model, const FeatureMatrix& features);

/// K-means on the weighted features, position centers, influence radius,
/// mean sequence values and hierarchy. The attractor is the mean final
/// sample of the demonstrations.
ClusterModel fit_cluster_model(const FeatureMatrix& features, int k, std::uint64_t seed,
                               const ClusterModelConfig& config = {});

}  // namespace roamkit

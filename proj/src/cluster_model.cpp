#include "roamkit/cluster_model.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace roamkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCellTolerance = 1e-9;

int nearest_row(const Eigen::MatrixXd& centers, const Eigen::RowVectorXd& point, double* distance_sq = nullptr) {
  int best = 0;
  double best_d = kInf;
  for (Eigen::Index c = 0; c < centers.rows(); ++c) {
    const double d = (centers.row(c) - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  if (distance_sq) *distance_sq = best_d;
  return best;
}

Eigen::MatrixXd kmeans_plus_plus(const Eigen::MatrixXd& points, int k, std::mt19937_64& rng) {
  const Eigen::Index n = points.rows();
  Eigen::MatrixXd centers(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  centers.row(0) = points.row(pick(rng));
  Eigen::VectorXd closest(n);
  for (Eigen::Index i = 0; i < n; ++i) closest[i] = (points.row(i) - centers.row(0)).squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index chosen = n - 1;
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= closest[i];
        if (target < 0.0) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = pick(rng);
    }
    centers.row(c) = points.row(chosen);
    for (Eigen::Index i = 0; i < n; ++i) {
      closest[i] = std::min(closest[i], (points.row(i) - centers.row(c)).squaredNorm());
    }
  }
  return centers;
}

KMeansResult lloyd(const Eigen::MatrixXd& points, Eigen::MatrixXd centers, const KMeansOptions& options) {
  const Eigen::Index n = points.rows();
  const Eigen::Index k = centers.rows();
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::vector<double> dist_sq(static_cast<std::size_t>(n), 0.0);
  auto assign = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      labels[static_cast<std::size_t>(i)] = nearest_row(centers, points.row(i), &dist_sq[static_cast<std::size_t>(i)]);
    }
  };
  assign();
  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    }
    Eigen::MatrixXd updated = centers;
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        updated.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        continue;
      }
      Eigen::Index farthest = 0;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (!taken[static_cast<std::size_t>(i)] && dist_sq[static_cast<std::size_t>(i)] > far_d) {
          far_d = dist_sq[static_cast<std::size_t>(i)];
          farthest = i;
        }
      }
      taken[static_cast<std::size_t>(farthest)] = true;
      updated.row(c) = points.row(farthest);
    }
    const double shift = (updated - centers).rowwise().norm().maxCoeff();
    centers = std::move(updated);
    assign();
    if (shift < options.tolerance) break;
  }
  KMeansResult result;
  result.centers = std::move(centers);
  result.labels = std::move(labels);
  result.inertia = std::accumulate(dist_sq.begin(), dist_sq.end(), 0.0);
  return result;
}

double quantile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double position = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(position));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (position - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// Parameter interval [lo, hi] of the bisector between centers o and j that
// bounds o's cell; empty when lo >= hi.
struct BisectorSpan {
  Eigen::Vector2d midpoint;
  Eigen::Vector2d along;
  double lo = 0.0;
  double hi = 0.0;
};

BisectorSpan bisector_span(const std::vector<Eigen::Vector2d>& centers, double radius, std::size_t o, std::size_t j) {
  BisectorSpan span;
  const Eigen::Vector2d offset = centers[j] - centers[o];
  span.midpoint = 0.5 * (centers[o] + centers[j]);
  span.along = Eigen::Vector2d(-offset.y(), offset.x()).normalized();
  const double half_sq = radius * radius - 0.25 * offset.squaredNorm();
  if (half_sq <= 0.0) {
    span.lo = span.hi = 0.0;
    return span;
  }
  span.hi = std::sqrt(half_sq);
  span.lo = -span.hi;
  for (std::size_t l = 0; l < centers.size(); ++l) {
    if (l == o || l == j) continue;
    // (m + s a - (c_o + c_l)/2) . (c_l - c_o) <= 0
    const Eigen::Vector2d normal = centers[l] - centers[o];
    const double slope = span.along.dot(normal);
    const double value = (span.midpoint - 0.5 * (centers[o] + centers[l])).dot(normal);
    if (std::abs(slope) < 1e-15) {
      if (value > 0.0) span.hi = span.lo;
      continue;
    }
    const double limit = -value / slope;
    if (slope > 0.0) {
      span.hi = std::min(span.hi, limit);
    } else {
      span.lo = std::max(span.lo, limit);
    }
  }
  return span;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, const KMeansOptions& options) {
  if (k < 1) throw InputError("k must be at least 1");
  if (points.rows() < k) throw InputError("fewer samples than clusters");
  if (options.restarts < 1 || options.max_iterations < 1) throw InputError("invalid k-means options");
  std::mt19937_64 rng(seed);
  KMeansResult best;
  best.inertia = kInf;
  for (int restart = 0; restart < options.restarts; ++restart) {
    KMeansResult candidate = lloyd(points, kmeans_plus_plus(points, k, rng), options);
    if (candidate.inertia < best.inertia) best = std::move(candidate);
  }
  return best;
}

int nearest_center(const std::vector<Eigen::Vector2d>& centers, const Eigen::Vector2d& p) {
  int best = 0;
  double best_d = kInf;
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = (centers[c] - p).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

std::vector<std::vector<int>> voronoi_neighbors(const std::vector<Eigen::Vector2d>& centers, double radius) {
  std::vector<std::vector<int>> neighbors(centers.size());
  for (std::size_t o = 0; o < centers.size(); ++o) {
    for (std::size_t j = 0; j < centers.size(); ++j) {
      if (j == o) continue;
      if ((centers[j] - centers[o]).norm() == 0.0) throw InputError("coincident cluster centers");
      const BisectorSpan span = bisector_span(centers, radius, o, j);
      if (span.hi - span.lo > 1e-9) neighbors[o].push_back(static_cast<int>(j));
    }
  }
  return neighbors;
}

std::vector<int> build_hierarchy(const std::vector<std::vector<int>>& neighbors,
                                 const std::vector<double>& mean_sequence) {
  const std::size_t k = mean_sequence.size();
  if (neighbors.size() != k || k == 0) throw InputError("hierarchy input sizes differ");
  const auto root = static_cast<int>(std::max_element(mean_sequence.begin(), mean_sequence.end()) -
                                     mean_sequence.begin());
  std::vector<int> parent(k, -1);
  for (std::size_t o = 0; o < k; ++o) {
    if (static_cast<int>(o) == root) continue;
    int best = -1;
    for (int j : neighbors[o]) {
      const double s = mean_sequence[static_cast<std::size_t>(j)];
      if (s > mean_sequence[o] && (best < 0 || s < mean_sequence[static_cast<std::size_t>(best)])) best = j;
    }
    if (best < 0) {
      throw TrainingError("hierarchy", "disconnected cluster chain at cluster " + std::to_string(o) +
                                           " (no neighbor further along the motion; try another k)");
    }
    parent[o] = best;
  }
  return parent;
}

TransparentAdjustment transparent_adjust(std::span<const double> weights, std::size_t t, double local_radius,
                                         double distance, double gamma_cap) {
  if (t >= weights.size()) throw InputError("transparent wall index out of range");
  TransparentAdjustment out;
  out.weights.assign(weights.size(), 0.0);
  const double wt = weights[t];
  double others = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (i == t) continue;
    out.weights[i] = std::max(weights[i] - wt, 0.0);
    others += out.weights[i];
  }
  out.weights[t] = std::max(1.0 - others, 0.0);
  const double cap = gamma_cap * distance;
  out.local_radius = wt >= 1.0 ? cap : std::min(local_radius / (1.0 - wt), cap);
  return out;
}

ClusterModel::ClusterModel(Normalization normalization, FeatureWeights weights, Eigen::MatrixXd feature_centers,
                           std::vector<Eigen::Vector2d> centers, double influence_radius,
                           std::vector<double> mean_sequence, Eigen::Vector2d attractor, double gamma_cap)
    : normalization_(normalization),
      weights_(weights),
      feature_centers_(std::move(feature_centers)),
      centers_(std::move(centers)),
      radius_(influence_radius),
      mean_sequence_(std::move(mean_sequence)),
      attractor_(attractor),
      gamma_cap_(gamma_cap) {
  if (centers_.empty()) throw InputError("a cluster model needs at least one cluster");
  if (mean_sequence_.size() != centers_.size()) throw InputError("one mean sequence value per cluster required");
  if (!(radius_ > 0.0)) throw InputError("influence radius must be positive");
  if (!(gamma_cap_ > 1.0)) throw InputError("gamma cap must exceed 1");
  neighbors_ = voronoi_neighbors(centers_, radius_);
  parent_ = build_hierarchy(neighbors_, mean_sequence_);
  root_ = static_cast<int>(std::find(parent_.begin(), parent_.end(), -1) - parent_.begin());
  const auto home = predict_cluster(attractor_);
  if (!home || *home != root_) {
    throw TrainingError("hierarchy", "the attractor does not lie in the cell of the final cluster");
  }
}

std::optional<int> ClusterModel::predict_cluster(const Eigen::Vector2d& p) const {
  const int o = nearest_center(centers_, p);
  if ((p - centers_[static_cast<std::size_t>(o)]).norm() > radius_) return std::nullopt;
  return o;
}

double ClusterModel::normal_distance(int o, int i, const Eigen::Vector2d& p) const {
  if (o == i) throw InputError("normal distance needs two different clusters");
  const Eigen::Vector2d offset = centers_.at(static_cast<std::size_t>(i)) - centers_.at(static_cast<std::size_t>(o));
  const double length = offset.norm();
  if (length == 0.0) throw InputError("coincident cluster centers");
  return offset.dot(p - 0.5 * (centers_[static_cast<std::size_t>(i)] + centers_[static_cast<std::size_t>(o)])) / length;
}

double ClusterModel::wall_intersection(int o, int i, const Eigen::Vector2d& p, const Eigen::Vector2d& direction) const {
  const Eigen::Vector2d offset = centers_.at(static_cast<std::size_t>(i)) - centers_.at(static_cast<std::size_t>(o));
  const Eigen::Vector2d plane_normal = offset.normalized();
  const double slope = direction.normalized().dot(plane_normal);
  if (std::abs(slope) < 1e-15) return kInf;
  return -normal_distance(o, i, p) / slope;
}

std::pair<Eigen::Vector2d, Eigen::Vector2d> ClusterModel::wall_segment(int o, int i) const {
  const BisectorSpan span = bisector_span(centers_, radius_, static_cast<std::size_t>(o), static_cast<std::size_t>(i));
  if (span.hi - span.lo <= 1e-9) throw InputError("clusters do not share a wall");
  return {span.midpoint + span.lo * span.along, span.midpoint + span.hi * span.along};
}

bool ClusterModel::faces_wall(int o, int i, const Eigen::Vector2d& direction) const {
  return direction.dot(centers_.at(static_cast<std::size_t>(i)) - centers_.at(static_cast<std::size_t>(o))) > 0.0;
}

std::pair<double, Eigen::Vector2d> ClusterModel::boundary_point(int o, const Eigen::Vector2d& p) const {
  const Eigen::Vector2d relative = p - centers_.at(static_cast<std::size_t>(o));
  const double distance = relative.norm();
  const Eigen::Vector2d radial = distance > 0.0 ? Eigen::Vector2d(relative / distance) : Eigen::Vector2d(1.0, 0.0);
  double b = radius_ - distance;
  for (int j : neighbors_[static_cast<std::size_t>(o)]) {
    if (!faces_wall(o, j, radial)) continue;
    b = std::min(b, wall_intersection(o, j, p, radial));
  }
  b = std::max(b, 0.0);
  return {b, p + b * radial};
}

Eigen::Vector2d ClusterModel::project_position(int o, const Eigen::Vector2d& p) const {
  const Eigen::Vector2d& center = centers_.at(static_cast<std::size_t>(o));
  const Eigen::Vector2d relative = p - center;
  const double distance = relative.norm();
  const auto [b, boundary] = boundary_point(o, p);
  const double boundary_distance = distance + b;
  if (b <= 0.0) return p;
  if (distance == 0.0) return center + Eigen::Vector2d(gamma_cap_ * boundary_distance, 0.0);
  const double ratio = boundary_distance / distance;
  return center + relative * ratio * ratio;
}

HullQuery ClusterModel::query(int o, const Eigen::Vector2d& p) const {
  if (o < 0 || o >= k()) throw InputError("cluster index out of range");
  const auto& center = centers_[static_cast<std::size_t>(o)];
  const auto& walls = neighbors_[static_cast<std::size_t>(o)];
  HullQuery q;
  q.cluster = o;
  q.relative = p - center;
  q.distance = q.relative.norm();
  q.radial = q.distance > 0.0 ? Eigen::Vector2d(q.relative / q.distance) : Eigen::Vector2d(1.0, 0.0);

  const double scale = std::max(radius_, 1.0);
  if (q.distance > radius_ * (1.0 + kCellTolerance)) throw InputError("outside region of influence");
  for (int j : walls) {
    if (normal_distance(o, j, p) > kCellTolerance * scale) throw InputError("point is outside the cluster cell");
  }

  std::tie(q.boundary_factor, q.boundary_point) = boundary_point(o, p);
  q.projected = project_position(o, p);
  const double projected_distance = (q.projected - center).norm();

  const std::size_t count = walls.size() + 1;
  q.normal_distances.resize(count);
  q.local_radii.resize(count);
  q.weights.assign(count, 0.0);
  for (std::size_t i = 0; i < walls.size(); ++i) {
    q.normal_distances[i] = normal_distance(o, walls[i], q.projected);
  }
  q.normal_distances.back() = projected_distance - radius_;
  double total = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    q.local_radii[i] = projected_distance - q.normal_distances[i];
    q.weights[i] = std::max(q.normal_distances[i], 0.0);
    total += q.weights[i];
  }
  if (q.distance == 0.0) {
    std::fill(q.weights.begin(), q.weights.end(), 0.0);
    q.weights.back() = 1.0;
  } else if (total > 0.0) {
    for (double& w : q.weights) w /= total;
  } else {
    // On the boundary itself: the walls the radial ray touches share the weight.
    std::vector<std::size_t> hit;
    for (std::size_t i = 0; i < walls.size(); ++i) {
      if (faces_wall(o, walls[i], q.radial) &&
          std::abs(wall_intersection(o, walls[i], p, q.radial)) <= kCellTolerance * scale) {
        hit.push_back(i);
      }
    }
    if (std::abs(radius_ - q.distance) <= kCellTolerance * scale) hit.push_back(count - 1);
    if (hit.empty()) hit.push_back(count - 1);
    for (std::size_t i : hit) q.weights[i] = 1.0 / static_cast<double>(hit.size());
  }

  std::vector<double> weights = q.weights;
  std::vector<double> radii = q.local_radii;
  q.transparent_wall = transparent_wall(o);
  if (q.transparent_wall) {
    const std::size_t t = *q.transparent_wall;
    auto adjusted = transparent_adjust(weights, t, radii[t], q.distance, gamma_cap_);
    weights = std::move(adjusted.weights);
    radii[t] = adjusted.local_radius;
  }
  if (q.distance == 0.0) {
    q.gamma = gamma_cap_;
    return q;
  }
  double weighted = 0.0;
  for (std::size_t i = 0; i < count; ++i) weighted += weights[i] * radii[i];
  q.gamma = std::clamp(weighted / q.distance, 1.0, gamma_cap_);
  return q;
}

UnitDirection ClusterModel::cluster_normal(int o, const Eigen::Vector2d& p) const {
  const HullQuery q = query(o, p);
  const auto& walls = neighbors_[static_cast<std::size_t>(o)];
  const UnitDirection inward(Vector(-q.radial));
  std::vector<UnitDirection> dirs;
  std::vector<double> weights;
  for (std::size_t i = 0; i < walls.size(); ++i) {
    if (q.weights[i] <= 0.0) continue;
    const Eigen::Vector2d offset = centers_[static_cast<std::size_t>(walls[i])] - centers_[static_cast<std::size_t>(o)];
    dirs.emplace_back(Vector(-offset));
    weights.push_back(q.weights[i]);
  }
  if (q.weights.back() > 0.0) {
    dirs.push_back(inward);
    weights.push_back(q.weights.back());
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total > 1.0) {
    for (double& w : weights) w /= total;
  }
  return directional_weighted_mean(inward, dirs, weights);
}

std::optional<std::size_t> ClusterModel::transparent_wall(int o) const {
  const int p = parent_.at(static_cast<std::size_t>(o));
  if (p < 0) return std::nullopt;
  const auto& walls = neighbors_[static_cast<std::size_t>(o)];
  const auto it = std::find(walls.begin(), walls.end(), p);
  return static_cast<std::size_t>(it - walls.begin());
}

std::vector<int> runtime_assignment(const ClusterModel& model, const FeatureMatrix& features) {
  std::vector<int> labels;
  labels.reserve(features.rows.size());
  for (const auto& row : features.rows) labels.push_back(nearest_center(model.centers(), row.position_norm));
  return labels;
}

ClusterModel fit_cluster_model(const FeatureMatrix& features, int k, std::uint64_t seed,
                               const ClusterModelConfig& config) {
  if (features.rows.size() < static_cast<std::size_t>(k)) {
    throw TrainingError("clustering", "fewer samples than clusters");
  }
  if (!(features.weights.position > 0.0)) throw InputError("position feature weight must be positive");
  const KMeansResult fit = kmeans(features.clustering_features(), k, seed, config.kmeans);

  std::vector<Eigen::Vector2d> centers;
  for (int c = 0; c < k; ++c) {
    centers.emplace_back(Eigen::Vector2d(fit.centers.block<1, 2>(c, 0).transpose()) / features.weights.position);
  }
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      if ((centers[a] - centers[b]).norm() < 1e-9) {
        throw TrainingError("clustering", "two clusters share a position center; try another k");
      }
    }
  }

  std::vector<std::vector<double>> member_distances(static_cast<std::size_t>(k));
  std::vector<double> sequence_sum(static_cast<std::size_t>(k), 0.0);
  for (const auto& row : features.rows) {
    const auto c = static_cast<std::size_t>(nearest_center(centers, row.position_norm));
    member_distances[c].push_back((row.position_norm - centers[c]).norm());
    sequence_sum[c] += row.sequence;
  }
  std::vector<double> mean_sequence(static_cast<std::size_t>(k));
  double spread = 0.0;
  for (std::size_t c = 0; c < static_cast<std::size_t>(k); ++c) {
    if (member_distances[c].empty()) {
      throw TrainingError("clustering", "cluster " + std::to_string(c) + " owns no samples; try another k");
    }
    mean_sequence[c] = sequence_sum[c] / static_cast<double>(member_distances[c].size());
    spread = std::max(spread, quantile(member_distances[c], config.radius_quantile));
  }
  const double radius = config.influence_radius.value_or(config.radius_factor * spread);
  if (!(radius > 0.0)) throw TrainingError("clustering", "degenerate influence radius");

  Eigen::Vector2d attractor = Eigen::Vector2d::Zero();
  std::vector<std::pair<int, const FeatureRow*>> last;
  for (const auto& row : features.rows) {
    auto it = std::find_if(last.begin(), last.end(), [&](const auto& e) { return e.first == row.demo_id; });
    if (it == last.end()) {
      last.emplace_back(row.demo_id, &row);
    } else if (row.sample_index > it->second->sample_index) {
      it->second = &row;
    }
  }
  for (const auto& [id, row] : last) attractor += row->position_norm;
  attractor /= static_cast<double>(last.size());

  return ClusterModel(features.normalization, features.weights, fit.centers, std::move(centers), radius,
                      std::move(mean_sequence), attractor, config.gamma_cap);
}

}  // namespace roamkit

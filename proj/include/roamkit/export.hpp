#pragma once

#include "roamkit/rollout.hpp"

#include <iosfwd>
#include <optional>
#include <vector>

namespace roamkit {

using Polyline = std::vector<Eigen::Vector2d>;

/// `x,y,vx,vy,mask` rows; mask is 1 where the field could not be evaluated
/// (velocity written as nan) and 0 elsewhere.
void write_grid_csv(std::ostream& out, const std::vector<GridSample>& samples);

struct StreamlineOptions {
  int seeds_per_axis = 16;
  double dt = 1e-2;
  int max_steps = 3000;
  double stop_radius = 1e-2;
};

/// RK4 traces from a regular grid of seeds inside `box`, each cut where it
/// leaves the box, reaches the attractor or the field fails. Seeds where
/// the field cannot be evaluated are skipped.
std::vector<Polyline> trace_streamlines(const VectorField& field, const BoundingBox& box,
                                        const Eigen::Vector2d& attractor, const StreamlineOptions& options = {});

struct SvgScene {
  BoundingBox box;
  std::vector<Polyline> outlines;     // closed, filled grey
  std::vector<Polyline> streamlines;  // thin blue
  std::vector<Polyline> paths;        // demonstrations or rollouts, thick
  std::optional<Eigen::Vector2d> attractor;
};

/// Deterministic SVG; the y axis points up.
void write_svg(std::ostream& out, const SvgScene& scene, int width_px = 640);

}  // namespace roamkit

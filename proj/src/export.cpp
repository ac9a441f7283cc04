#include "roamkit/export.hpp"

#include "roamkit/errors.hpp"

#include <cstdio>
#include <ostream>
#include <string>

namespace roamkit {

namespace {

std::string fmt(double v, const char* pattern = "%.10g") {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, pattern, v);
  return buffer;
}

bool inside(const BoundingBox& box, const Eigen::Vector2d& p) {
  return (p.array() >= box.lower.array()).all() && (p.array() <= box.upper.array()).all();
}

}  // namespace

void write_grid_csv(std::ostream& out, const std::vector<GridSample>& samples) {
  out << "x,y,vx,vy,mask\n";
  for (const auto& s : samples) {
    out << fmt(s.position.x()) << ',' << fmt(s.position.y()) << ',';
    if (s.valid) out << fmt(s.velocity.x()) << ',' << fmt(s.velocity.y()) << ",0\n";
    else out << "nan,nan,1\n";
  }
}

std::vector<Polyline> trace_streamlines(const VectorField& field, const BoundingBox& box,
                                        const Eigen::Vector2d& attractor, const StreamlineOptions& options) {
  if (options.seeds_per_axis < 2) throw InputError("streamlines need at least 2 seeds per axis");
  std::vector<Polyline> lines;
  const Eigen::Vector2d span = box.upper - box.lower;
  const int n = options.seeds_per_axis;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      // Cell-centred seeds stay off the box edges.
      Eigen::Vector2d x = box.lower + Eigen::Vector2d(span.x() * (col + 0.5) / n, span.y() * (row + 0.5) / n);
      Polyline line{x};
      try {
        for (int step = 0; step < options.max_steps; ++step) {
          if ((x - attractor).norm() < options.stop_radius) break;
          const Eigen::Vector2d next = rk4_step(field, Vector(x), options.dt).head<2>();
          if (!next.allFinite() || (next - x).norm() < 1e-12) break;
          x = next;
          if (!inside(box, x)) break;
          line.push_back(x);
        }
      } catch (const std::exception&) {
      }
      if (line.size() > 1) lines.push_back(std::move(line));
    }
  }
  return lines;
}

void write_svg(std::ostream& out, const SvgScene& scene, int width_px) {
  const Eigen::Vector2d span = scene.box.upper - scene.box.lower;
  if (!(span.x() > 0.0) || !(span.y() > 0.0)) throw InputError("SVG box must have positive extent");
  const double scale = width_px / span.x();
  const double height = span.y() * scale;
  auto px = [&](const Eigen::Vector2d& p) {
    return fmt((p.x() - scene.box.lower.x()) * scale, "%.2f") + "," +
           fmt((scene.box.upper.y() - p.y()) * scale, "%.2f");
  };
  // Vertices closer than half a pixel to the previous one are dropped.
  auto points = [&](const Polyline& line) {
    std::string s;
    Eigen::Vector2d last = line.front();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const bool ends = i == 0 || i + 1 == line.size();
      if (!ends && (line[i] - last).norm() * scale < 0.5) continue;
      s += (i ? " " : "") + px(line[i]);
      last = line[i];
    }
    return s;
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_px << "\" height=\"" << fmt(height, "%.0f")
      << "\" viewBox=\"0 0 " << width_px << ' ' << fmt(height, "%.2f") << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<g fill=\"none\" stroke=\"#3a6ea5\" stroke-width=\"0.8\" stroke-opacity=\"0.8\">\n";
  for (const auto& line : scene.streamlines) out << "<polyline points=\"" << points(line) << "\"/>\n";
  out << "</g>\n<g fill=\"#bbbbbb\" fill-opacity=\"0.6\" stroke=\"#333333\" stroke-width=\"1.5\">\n";
  for (const auto& line : scene.outlines) out << "<polygon points=\"" << points(line) << "\"/>\n";
  out << "</g>\n<g fill=\"none\" stroke=\"#c0392b\" stroke-width=\"2\">\n";
  for (const auto& line : scene.paths) out << "<polyline points=\"" << points(line) << "\"/>\n";
  out << "</g>\n";
  if (scene.attractor) {
    const auto c = px(*scene.attractor);
    const auto comma = c.find(',');
    out << "<circle cx=\"" << c.substr(0, comma) << "\" cy=\"" << c.substr(comma + 1)
        << "\" r=\"5\" fill=\"black\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace roamkit

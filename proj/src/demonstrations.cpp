#include "roamkit/demonstrations.hpp"

#include "roamkit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace roamkit {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    cells.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  try {
    std::size_t used = 0;
    const double value = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return value;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line_no) + ": not a number: '" + cell + "'");
  }
}

}  // namespace

bool Demonstration::has_velocities() const {
  return !samples.empty() &&
         std::all_of(samples.begin(), samples.end(), [](const DemoSample& s) { return s.velocity.has_value(); });
}

void Demonstration::validate() const {
  const std::string which = "demonstration " + std::to_string(demo_id);
  if (samples.size() < 3) throw InputError(which + " has fewer than 3 samples");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!samples[i].position.allFinite() || !std::isfinite(samples[i].t)) {
      throw InputError(which + " contains non-finite values");
    }
    if (samples[i].velocity && !samples[i].velocity->allFinite()) {
      throw InputError(which + " contains non-finite velocities");
    }
    if (i > 0 && !(samples[i].t > samples[i - 1].t)) {
      throw InputError(which + " time stamps are not strictly increasing");
    }
  }
}

std::vector<Demonstration> read_demonstrations_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("demonstration CSV is empty");
  const auto header = split_csv_line(line);
  const std::vector<std::string> base{"demo_id", "t", "x", "y"};
  const bool with_velocity = header.size() == 6 && header[4] == "vx" && header[5] == "vy";
  if (!(header.size() == 4 || with_velocity) || !std::equal(base.begin(), base.end(), header.begin())) {
    throw InputError("demonstration CSV header must be demo_id,t,x,y[,vx,vy]");
  }

  std::vector<Demonstration> demos;
  std::map<int, std::size_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw InputError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " columns");
    }
    const double id_value = parse_number(cells[0], line_no);
    const int id = static_cast<int>(id_value);
    if (id_value != id) throw InputError("line " + std::to_string(line_no) + ": demo_id must be an integer");
    if (demos.empty() || demos.back().demo_id != id) {
      if (seen.count(id)) {
        throw InputError("line " + std::to_string(line_no) + ": rows of demonstration " + std::to_string(id) +
                         " are not contiguous");
      }
      seen[id] = demos.size();
      demos.push_back(Demonstration{id, {}});
    }
    DemoSample sample;
    sample.t = parse_number(cells[1], line_no);
    sample.position = {parse_number(cells[2], line_no), parse_number(cells[3], line_no)};
    if (with_velocity) sample.velocity = Eigen::Vector2d(parse_number(cells[4], line_no), parse_number(cells[5], line_no));
    demos.back().samples.push_back(sample);
  }
  if (demos.empty()) throw InputError("demonstration CSV has no rows");
  for (const auto& demo : demos) demo.validate();
  return demos;
}

std::vector<Demonstration> read_demonstrations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open demonstration file '" + path + "'");
  return read_demonstrations_csv(in);
}

void write_demonstrations_csv(std::ostream& out, const std::vector<Demonstration>& demos) {
  const bool with_velocity =
      std::all_of(demos.begin(), demos.end(), [](const Demonstration& d) { return d.has_velocities(); });
  out << (with_velocity ? "demo_id,t,x,y,vx,vy\n" : "demo_id,t,x,y\n");
  out << std::setprecision(17);
  for (const auto& demo : demos) {
    for (const auto& s : demo.samples) {
      out << demo.demo_id << ',' << s.t << ',' << s.position.x() << ',' << s.position.y();
      if (with_velocity) out << ',' << s.velocity->x() << ',' << s.velocity->y();
      out << '\n';
    }
  }
}

Demonstration drop_stationary_samples(const Demonstration& demo) {
  Demonstration out{demo.demo_id, {}};
  for (const auto& s : demo.samples) {
    if (s.velocity && s.velocity->norm() > 0.0) out.samples.push_back(s);
  }
  if (out.samples.empty()) {
    throw InputError("demonstration " + std::to_string(demo.demo_id) + " is empty after filtering");
  }
  return out;
}

Demonstration estimate_velocities(const Demonstration& demo, int smoothing_window) {
  if (demo.samples.size() < 3) {
    throw InputError("demonstration " + std::to_string(demo.demo_id) + " has fewer than 3 samples");
  }
  if (smoothing_window < 1) throw InputError("smoothing window must be >= 1");
  const auto& s = demo.samples;
  const std::size_t n = s.size();
  std::vector<Eigen::Vector2d> raw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 == n ? n - 1 : i + 1;
    raw[i] = (s[hi].position - s[lo].position) / (s[hi].t - s[lo].t);
  }
  const auto half = static_cast<std::ptrdiff_t>(smoothing_window / 2);
  Demonstration out = demo;
  for (std::size_t i = 0; i < n; ++i) {
    const auto lo = std::max<std::ptrdiff_t>(0, static_cast<std::ptrdiff_t>(i) - half);
    const auto hi = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n) - 1, static_cast<std::ptrdiff_t>(i) + half);
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (auto j = lo; j <= hi; ++j) sum += raw[static_cast<std::size_t>(j)];
    out.samples[i].velocity = sum / static_cast<double>(hi - lo + 1);
  }
  return drop_stationary_samples(out);
}

Normalization fit_normalization(const std::vector<Demonstration>& demos, ScaleMode mode) {
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  std::size_t count = 0;
  for (const auto& d : demos) {
    for (const auto& s : d.samples) {
      sum += s.position;
      ++count;
    }
  }
  if (count == 0) throw InputError("cannot normalize an empty demonstration set");
  Normalization norm;
  norm.mean = sum / static_cast<double>(count);
  Eigen::Vector2d sq = Eigen::Vector2d::Zero();
  for (const auto& d : demos) {
    for (const auto& s : d.samples) sq += (s.position - norm.mean).cwiseAbs2();
  }
  const Eigen::Vector2d variance = sq / static_cast<double>(count);
  if ((variance.array() <= 0.0).any()) throw InputError("a position component has zero variance");
  norm.scale = mode == ScaleMode::Variance ? variance : Eigen::Vector2d(variance.cwiseSqrt());
  return norm;
}

std::vector<Eigen::Vector2d> unit_directions(const Demonstration& demo) {
  std::vector<Eigen::Vector2d> out;
  out.reserve(demo.samples.size());
  for (const auto& s : demo.samples) {
    if (!s.velocity || !(s.velocity->norm() > 0.0)) {
      throw InputError("unit_directions requires nonzero velocities");
    }
    out.push_back(s.velocity->normalized());
  }
  return out;
}

std::vector<double> sequence_values(const Demonstration& demo) {
  const auto n = static_cast<double>(demo.samples.size());
  std::vector<double> out;
  out.reserve(demo.samples.size());
  for (std::size_t i = 0; i < demo.samples.size(); ++i) out.push_back(static_cast<double>(i + 1) / n);
  return out;
}

std::vector<Demonstration> prepare_demonstrations(const std::vector<Demonstration>& demos,
                                                  const PreprocessConfig& config) {
  if (demos.empty()) throw InputError("no demonstrations");
  if (config.stride < 1) throw InputError("stride must be >= 1");
  std::vector<Demonstration> prepared;
  for (const auto& demo : demos) {
    demo.validate();
    Demonstration filtered =
        demo.has_velocities() ? drop_stationary_samples(demo) : estimate_velocities(demo, config.smoothing_window);
    if (config.stride > 1) {
      Demonstration strided{filtered.demo_id, {}};
      for (std::size_t i = 0; i < filtered.samples.size(); i += static_cast<std::size_t>(config.stride)) {
        strided.samples.push_back(filtered.samples[i]);
      }
      // Keep the final sample so the trajectory end stays represented.
      if ((filtered.samples.size() - 1) % static_cast<std::size_t>(config.stride) != 0) {
        strided.samples.push_back(filtered.samples.back());
      }
      filtered = std::move(strided);
    }
    prepared.push_back(std::move(filtered));
  }
  return prepared;
}

FeatureMatrix build_feature_matrix(const std::vector<Demonstration>& demos, const PreprocessConfig& config) {
  const std::vector<Demonstration> prepared = prepare_demonstrations(demos, config);
  FeatureMatrix matrix;
  matrix.weights = config.weights;
  matrix.normalization = fit_normalization(prepared, config.scale_mode);
  for (const auto& demo : prepared) {
    const auto directions = unit_directions(demo);
    const auto sequence = sequence_values(demo);
    for (std::size_t i = 0; i < demo.samples.size(); ++i) {
      FeatureRow row;
      row.position = demo.samples[i].position;
      row.velocity = *demo.samples[i].velocity;
      row.position_norm = matrix.normalization.normalize(row.position);
      row.direction = directions[i];
      row.sequence = sequence[i];
      row.demo_id = demo.demo_id;
      row.sample_index = static_cast<int>(i);
      matrix.rows.push_back(row);
    }
  }
  return matrix;
}

Eigen::MatrixXd FeatureMatrix::clustering_features() const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x.block<1, 2>(r, 0) = weights.position * rows[i].position_norm.transpose();
    x.block<1, 2>(r, 2) = weights.direction * rows[i].direction.transpose();
    x(r, 4) = weights.sequence * rows[i].sequence;
  }
  return x;
}

}  // namespace roamkit

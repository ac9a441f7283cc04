#include "roamkit/errors.hpp"
#include "roamkit/learned_motion.hpp"
#include "roamkit/rollout.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace roamkit;
using namespace roamkit::testing;

namespace {

using V2 = Eigen::Vector2d;

// Half circles from (-r, 0) over the top to (r, 0), ending at rest.
std::vector<Demonstration> arc_demos() {
  std::vector<Demonstration> demos;
  const double radii[] = {1.0, 1.08, 0.93};
  for (int d = 0; d < 3; ++d) {
    Demonstration demo;
    demo.demo_id = d;
    for (int i = 0; i <= 150; ++i) {
      const double s = static_cast<double>(i) / 150.0;
      const double theta = std::numbers::pi * (1.0 - (3.0 * s * s - 2.0 * s * s * s));
      demo.samples.push_back({0.02 * i, V2(radii[d] * std::cos(theta), radii[d] * std::sin(theta)), std::nullopt});
    }
    demos.push_back(std::move(demo));
  }
  return demos;
}

std::vector<Demonstration> straight_demo() {
  Demonstration demo;
  for (int i = 0; i <= 60; ++i) demo.samples.push_back({0.05 * i, V2(-2.0 + 0.05 * i, 1.0 - 0.01 * i), std::nullopt});
  return {demo};
}

const TrainingResult& arc_model() {
  static const TrainingResult result = train(arc_demos(), 4, 0);
  return result;
}

RolloutOptions rollout_options() {
  RolloutOptions options;
  options.dt = 1e-2;
  options.max_steps = 20000;
  options.convergence_radius = 1e-3;
  return options;
}

}  // namespace

TEST_CASE("the attractor is a fixed point") {
  const auto& dyn = arc_model().dynamics;
  CHECK(dyn.evaluate_normalized(dyn.clusters().attractor()).isZero(0.0));
  CHECK(dyn.evaluate(dyn.attractor()).norm() < 1e-12);
}

TEST_CASE("training report describes the model") {
  const auto& result = arc_model();
  CHECK(result.report.k == 4);
  CHECK(result.report.samples > 400);
  CHECK(result.report.cluster_sizes.size() == 4);
  int total = 0;
  for (int s : result.report.cluster_sizes) total += s;
  CHECK(total == result.report.samples);
  CHECK(result.report.parent == result.dynamics.clusters().parent());
  CHECK(result.report.influence_radius == result.dynamics.clusters().influence_radius());
}

TEST_CASE("a single straight demonstration with one cluster converges") {
  const auto result = train(straight_demo(), 1, 0);
  CHECK(result.dynamics.clusters().k() == 1);
  const auto rollout =
      integrate(result.dynamics.field(), V2(-2.0, 1.0), result.dynamics.attractor(), rollout_options());
  CHECK(rollout.converged);
}

TEST_CASE("rollouts from the demonstration starts converge") {
  const auto& dyn = arc_model().dynamics;
  for (const auto& demo : arc_demos()) {
    const auto rollout = integrate(dyn.field(), demo.samples.front().position, dyn.attractor(), rollout_options());
    CHECK(rollout.converged);
  }
}

TEST_CASE("deep inside a cluster the field follows the local dynamics") {
  const auto& dyn = arc_model().dynamics;
  const auto& clusters = dyn.clusters();
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int i = 0; i < 20000 && checked < 200; ++i) {
    const int o = static_cast<int>(rng() % static_cast<unsigned>(clusters.k()));
    const V2 p = clusters.centers()[o] + 0.05 * random_direction(rng).vector() * uniform(rng, 0, 1);
    if (clusters.predict_cluster(p) != o || clusters.gamma(o, p) < 1e3) continue;
    if (p == dyn.deviations()[o].base_target()) continue;
    const V2 out = dyn.evaluate_normalized(p);
    const V2 local = dyn.local_velocity_normalized(p);
    if (local.isZero(0.0)) continue;
    CHECK(angle_between(UnitDirection(Vector(out)), UnitDirection(Vector(local))) <= 1e-2);
    ++checked;
  }
  CHECK(checked == 200);
}

TEST_CASE("the field does not point out of solid walls") {
  const auto& dyn = arc_model().dynamics;
  const auto& clusters = dyn.clusters();
  std::mt19937_64 rng(12);
  int checked = 0;
  for (int i = 0; i < 5000; ++i) {
    const int o = static_cast<int>(rng() % static_cast<unsigned>(clusters.k()));
    const V2 c = clusters.centers()[o];
    const auto [b, hit] = clusters.boundary_point(o, c + 0.1 * random_direction(rng).vector());
    const int parent = clusters.parent()[o];
    if (parent >= 0 && std::abs(clusters.normal_distance(o, parent, hit)) < 1e-9) continue;
    const V2 p = c + (1.0 - 1e-12) * (hit - c);
    if (clusters.predict_cluster(p) != o) continue;
    if (clusters.gamma(o, p) > 1.0 + 1e-6) continue;
    const V2 out = dyn.evaluate_normalized(p);
    CHECK(out.dot(clusters.cluster_normal(o, p).vector()) >= -1e-9);
    ++checked;
  }
  CHECK(checked > 1000);
}

TEST_CASE("evaluate is finite everywhere and vanishes only at the attractor") {
  const auto& dyn = arc_model().dynamics;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      const V2 p(-1.2 + 2.4 * i / 199.0, -0.2 + 1.4 * j / 199.0);
      const V2 v = dyn.evaluate(p);
      REQUIRE(v.allFinite());
      if (v.norm() == 0.0) CHECK((p - dyn.attractor()).norm() < 1e-3);
    }
  }
  CHECK(dyn.evaluate(V2(1e6, -1e6)).allFinite());
}

TEST_CASE("outside the region of influence the field returns to the nearest center") {
  const auto& dyn = arc_model().dynamics;
  const auto& clusters = dyn.clusters();
  const V2 far(40.0, -30.0);
  REQUIRE(!clusters.predict_cluster(far));
  const V2 near = clusters.centers()[static_cast<std::size_t>(nearest_center(clusters.centers(), far))];
  CHECK((dyn.evaluate_normalized(far) + (far - near)).norm() < 1e-12);
}

TEST_CASE("rollouts stay in the region of influence and progress through the sequence") {
  const auto& dyn = arc_model().dynamics;
  const auto& clusters = dyn.clusters();
  const double step_allowance = 0.05;
  std::mt19937_64 rng(13);
  int rollouts = 0;
  while (rollouts < 20) {
    const int o = static_cast<int>(rng() % static_cast<unsigned>(clusters.k()));
    const V2 start = clusters.centers()[o] + clusters.influence_radius() * uniform(rng, 0, 0.9) *
                                                 random_direction(rng).vector();
    if (!clusters.predict_cluster(start)) continue;
    ++rollouts;
    const auto frame = clusters.normalization();
    const auto rollout = integrate(dyn.field(), frame.denormalize(start), dyn.attractor(), rollout_options());
    CHECK(rollout.converged);
    double previous = -1.0;
    for (const auto& x : rollout.states) {
      const V2 p = frame.normalize(x.head<2>());
      const int nearest = nearest_center(clusters.centers(), p);
      CHECK((p - clusters.centers()[nearest]).norm() <= clusters.influence_radius() + step_allowance);
      const double sequence = clusters.mean_sequence()[nearest];
      CHECK(sequence >= previous);
      previous = sequence;
    }
  }
}

TEST_CASE("training is deterministic") {
  const auto a = train(arc_demos(), 4, 5);
  const auto b = train(arc_demos(), 4, 5);
  std::mt19937_64 rng(14);
  for (int i = 0; i < 100; ++i) {
    const V2 p(uniform(rng, -1.2, 1.2), uniform(rng, -0.2, 1.2));
    CHECK(a.dynamics.evaluate(p) == b.dynamics.evaluate(p));
  }
}

TEST_CASE("training failures carry the stage") {
  Demonstration tiny;
  tiny.samples = {{0.0, V2(0, 0), std::nullopt}, {1.0, V2(1, 0), std::nullopt}};
  try {
    train({tiny}, 1, 0);
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    CHECK(e.stage() == "preprocess");
  }
  CHECK_THROWS_AS(train(straight_demo(), 0, 0), TrainingError);
}

#include "roamkit/errors.hpp"
#include "roamkit/rollout.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace roamkit;
using namespace roamkit::testing;

TEST_CASE("linear system decays exponentially") {
  const auto dynamics = InitialDynamics::linear(vec2(0, 0), 1.0);
  RolloutOptions options;
  options.dt = 1e-3;
  options.max_steps = 1000;
  options.convergence_radius = 0.0;
  const auto result = integrate(dynamics, vec2(1, 0), vec2(0, 0), options);
  REQUIRE(result.steps == 1000);
  CHECK(result.states.size() == 1001);
  CHECK(result.final_distance_to_attractor == doctest::Approx(std::exp(-1.0)).epsilon(0.01));
}

TEST_CASE("start at the attractor converges in zero steps") {
  const auto dynamics = InitialDynamics::linear(vec2(2, 3), 1.0);
  const auto result = integrate(dynamics, vec2(2, 3), vec2(2, 3), {});
  CHECK(result.converged);
  CHECK(result.steps == 0);
  CHECK(result.states.size() == 1);
}

TEST_CASE("ROAM around a circle, head-on start") {
  const auto circle = StarObstacle::circle(vec2(0, 0), 1.0);
  const Obstacle* obstacles[] = {&circle};
  const auto dynamics = InitialDynamics::linear(vec2(4, 0), 1.0);
  const VectorField field = [&](const Vector& x) { return roam_avoid(obstacles, x, dynamics); };
  const auto result = integrate(field, vec2(-4, 0), vec2(4, 0), {}, [&](const Vector& x) { return min_gamma(obstacles, x); });
  CHECK_FALSE(result.aborted);
  CHECK(result.converged);
  CHECK(result.min_gamma_seen >= 1.0 - 1e-6);
}

TEST_CASE("field errors abort the rollout") {
  const VectorField broken = [](const Vector& x) -> Vector {
    if (x[0] > 0.5) throw PenetrationError(0, 0.5);
    return vec2(1, 0);
  };
  const auto result = integrate(broken, vec2(0, 0), vec2(5, 0), {});
  CHECK(result.aborted);
  CHECK_FALSE(result.converged);
  CHECK(result.error.find("penetration") != std::string::npos);
}

TEST_CASE("stall detection") {
  const VectorField slow = [](const Vector& x) -> Vector { return -(x - vec2(1, 0)); };
  RolloutOptions options;
  options.stall_speed = 1e-3;
  options.convergence_radius = 1e-9;
  const auto result = integrate(slow, vec2(0, 0), vec2(5, 0), options);
  CHECK(result.stalled);
  CHECK_FALSE(result.converged);
}

TEST_CASE("grid sampling") {
  const auto dynamics = InitialDynamics::linear(vec2(0.5, 0.5), 2.0);
  const auto grid = sample_grid(dynamics, {{0, 0}, {1, 1}}, 2);
  REQUIRE(grid.size() == 4);
  CHECK(grid[0].position.isApprox(Eigen::Vector2d(0, 0)));
  CHECK(grid[1].position.isApprox(Eigen::Vector2d(1, 0)));
  CHECK(grid[2].position.isApprox(Eigen::Vector2d(0, 1)));
  CHECK(grid[3].position.isApprox(Eigen::Vector2d(1, 1)));

  const auto fine = sample_grid(dynamics, {{-2, -2}, {3, 3}}, 9);
  for (const auto& s : fine) {
    if ((s.position - Eigen::Vector2d(0.5, 0.5)).norm() < 1e-12) continue;
    CHECK(s.velocity.normalized().dot((Eigen::Vector2d(0.5, 0.5) - s.position).normalized()) == doctest::Approx(1.0));
  }

  const auto circle = StarObstacle::circle(vec2(0, 0), 1.0);
  const Obstacle* obstacles[] = {&circle};
  const VectorField avoided = [&](const Vector& x) { return roam_avoid(obstacles, x, InitialDynamics::linear(vec2(3, 0))); };
  const auto masked = sample_grid(avoided, {{-2, -2}, {2, 2}}, 5);
  CHECK_FALSE(masked[12].valid);  // the center cell lies inside the circle
  CHECK(std::isnan(masked[12].velocity.x()));
  CHECK(masked[0].valid);
}

TEST_CASE("arc-length resampling spaces points evenly") {
  const std::vector<Eigen::Vector2d> corner = {{0, 0}, {1, 0}, {1, 0}, {1, 2}};
  const auto r = resample_by_arc_length(corner, 7);
  REQUIRE(r.size() == 7);
  for (int i = 0; i < 7; ++i) {
    const double s = 3.0 * i / 6.0;
    const Eigen::Vector2d expected = s <= 1.0 ? Eigen::Vector2d(s, 0) : Eigen::Vector2d(1, s - 1.0);
    CHECK((r[static_cast<std::size_t>(i)] - expected).norm() < 1e-12);
  }
  const auto still = resample_by_arc_length({{2, 3}}, 4);
  CHECK(still.size() == 4);
  CHECK(still.back() == Eigen::Vector2d(2, 3));
  CHECK_THROWS_AS(resample_by_arc_length({}, 4), InputError);
}

TEST_CASE("mean pointwise distance") {
  const std::vector<Eigen::Vector2d> a = {{0, 0}, {1, 0}};
  const std::vector<Eigen::Vector2d> b = {{0, 1}, {1, 3}};
  CHECK(mean_pointwise_distance(a, b) == doctest::Approx(2.0));
  CHECK_THROWS_AS(mean_pointwise_distance(a, {{0, 0}}), InputError);
}

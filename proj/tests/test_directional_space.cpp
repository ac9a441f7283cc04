#include "roamkit/directional_space.hpp"
#include "roamkit/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace roamkit;
using namespace roamkit::testing;
using std::numbers::pi;

namespace {

void check_close(const UnitDirection& a, const Vector& b, double tol) {
  CHECK((a.vector() - b).norm() <= tol);
}

}  // namespace

TEST_CASE("unit direction normalizes and rejects degenerate input") {
  const UnitDirection d(vec2(3.0, 4.0));
  CHECK(d[0] == doctest::Approx(0.6));
  CHECK(d[1] == doctest::Approx(0.8));
  CHECK_THROWS_AS(UnitDirection(vec2(0.0, 0.0)), DegenerateDirectionError);
  CHECK_THROWS_AS(UnitDirection(Vector::Ones(1)), InputError);
}

TEST_CASE("angle_between") {
  const UnitDirection e1(vec2(1, 0));
  const UnitDirection e2(vec2(0, 1));
  CHECK(angle_between(e1, e1) == doctest::Approx(0.0));
  CHECK(angle_between(e1, -e1) == doctest::Approx(pi));
  CHECK(angle_between(e1, e2) == doctest::Approx(pi / 2));
}

TEST_CASE("geodesic_interpolate endpoints and midpoint") {
  const UnitDirection a(vec2(1, 0));
  const UnitDirection b(vec2(0, 1));
  check_close(geodesic_interpolate(a, b, 0.0), a.vector(), 1e-15);
  check_close(geodesic_interpolate(a, b, 1.0), b.vector(), 1e-15);
  check_close(geodesic_interpolate(a, b, 0.5), vec2(std::sqrt(0.5), std::sqrt(0.5)), 1e-15);
  CHECK_THROWS_AS(geodesic_interpolate(a, -a, 0.5), DegenerateDirectionError);
  CHECK_THROWS_AS(geodesic_interpolate(a, polar(pi - 1e-11), 0.5), DegenerateDirectionError);
}

TEST_CASE("geodesic_interpolate is unit and Lipschitz in the fraction") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 2 + trial % 3;
    const UnitDirection a = random_direction(rng, dim);
    const UnitDirection b = random_direction(rng, dim);
    if (angle_between(a, b) > pi - 1e-3) continue;
    const double w = uniform(rng, 0.0, 0.99);
    const double eps = 1e-3;
    const UnitDirection p = geodesic_interpolate(a, b, w);
    const UnitDirection q = geodesic_interpolate(a, b, w + eps);
    CHECK(std::abs(p.vector().norm() - 1.0) <= 1e-12);
    CHECK(angle_between(p, q) <= angle_between(a, b) * eps + 1e-9);
  }
}

TEST_CASE("rotate_in_plane_2d") {
  check_close(rotate_in_plane_2d(UnitDirection(vec2(1, 0)), pi / 2), vec2(0, 1), 1e-15);
  check_close(rotate_in_plane_2d(UnitDirection(vec2(1, 0)), 0.0), vec2(1, 0), 0.0);
  check_close(rotate_in_plane_2d(UnitDirection(vec2(0, 1)), -pi / 2), vec2(1, 0), 1e-15);

  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const UnitDirection a = random_direction(rng);
    const double theta = uniform(rng, -10.0, 10.0);
    check_close(rotate_in_plane_2d(rotate_in_plane_2d(a, theta), -theta), a.vector(), 1e-12);
  }
}

TEST_CASE("signed_angle_2d recovers rotations") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const UnitDirection a = random_direction(rng);
    const double theta = uniform(rng, -3.0, 3.0);
    CHECK(signed_angle_2d(a, rotate_in_plane_2d(a, theta)) == doctest::Approx(theta).epsilon(1e-12));
  }
  CHECK(signed_angle_2d(polar(0.0), polar(pi)) == doctest::Approx(pi));
}

TEST_CASE("directional_weighted_mean examples") {
  const UnitDirection n(vec2(1, 0));
  check_close(directional_weighted_mean(n, {}, {}), n.vector(), 0.0);

  const std::vector<UnitDirection> one{polar(1.2)};
  const std::vector<double> full{1.0};
  check_close(directional_weighted_mean(n, one, full), one[0].vector(), 1e-12);

  const std::vector<UnitDirection> opposite{UnitDirection(vec2(0, 1)), UnitDirection(vec2(0, -1))};
  const std::vector<double> half{0.5, 0.5};
  check_close(directional_weighted_mean(n, opposite, half), vec2(1, 0), 1e-15);

  const std::vector<UnitDirection> antipodal{-n};
  CHECK_THROWS_AS(directional_weighted_mean(n, antipodal, full), DegenerateDirectionError);
  const std::vector<double> too_much{0.7, 0.7};
  CHECK_THROWS_AS(directional_weighted_mean(n, opposite, too_much), InputError);
}

TEST_CASE("directional_weighted_mean interpolates angles linearly in 2D") {
  // In the plane the tangent space is the angle line, so the mean is the
  // weighted mean of angles measured from the null direction.
  const UnitDirection n = polar(0.3);
  const std::vector<UnitDirection> dirs{polar(0.3 + 1.0), polar(0.3 - 0.4)};
  const std::vector<double> weights{0.25, 0.5};
  const double expected = 0.3 + 0.25 * 1.0 - 0.5 * 0.4;
  check_close(directional_weighted_mean(n, dirs, weights), polar(expected).vector(), 1e-12);
}

TEST_CASE("directional_weighted_mean properties") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    const int dim = 2 + trial % 3;
    const UnitDirection null_dir = random_direction(rng, dim);
    std::vector<UnitDirection> dirs;
    std::vector<double> weights;
    double total = 0.0;
    for (int i = 0; i < 4; ++i) {
      UnitDirection d = random_direction(rng, dim);
      if (angle_between(d, null_dir) > pi - 1e-2) d = null_dir;
      dirs.push_back(d);
      weights.push_back(uniform(rng, 0.0, 1.0));
      total += weights.back();
    }
    const double scale = uniform(rng, 0.1, 1.0) / total;
    for (double& w : weights) w *= scale;

    const UnitDirection mean = directional_weighted_mean(null_dir, dirs, weights);
    CHECK(std::abs(mean.vector().norm() - 1.0) <= 1e-12);

    std::vector<std::size_t> order{3, 1, 0, 2};
    std::vector<UnitDirection> pdirs;
    std::vector<double> pweights;
    for (auto i : order) {
      pdirs.push_back(dirs[i]);
      pweights.push_back(weights[i]);
    }
    check_close(directional_weighted_mean(null_dir, pdirs, pweights), mean.vector(), 1e-12);

    const std::vector<double> single{0.0, 1.0, 0.0, 0.0};
    check_close(directional_weighted_mean(null_dir, dirs, single), dirs[1].vector(), 1e-9);
  }
}

TEST_CASE("orthogonal complement is orthonormal") {
  std::mt19937_64 rng(5);
  for (int dim = 2; dim <= 5; ++dim) {
    const UnitDirection n = random_direction(rng, dim);
    const Eigen::MatrixXd basis = orthogonal_complement(n.vector());
    REQUIRE(basis.cols() == dim - 1);
    CHECK((basis.transpose() * n.vector()).norm() <= 1e-12);
    CHECK((basis.transpose() * basis - Eigen::MatrixXd::Identity(dim - 1, dim - 1)).norm() <= 1e-12);
  }
  const Vector perp = deterministic_orthogonal(vec2(1, 0));
  CHECK(perp[0] == doctest::Approx(0.0));
  CHECK(perp[1] == doctest::Approx(1.0));
}

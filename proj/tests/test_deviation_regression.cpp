#include "roamkit/deviation_regression.hpp"
#include "roamkit/errors.hpp"
#include "test_support.hpp"

#include <doctest.h>

using namespace roamkit;
using namespace roamkit::testing;

namespace {

using V2 = Eigen::Vector2d;

const V2 kTarget(0.5, -0.25);

// Members on a disc around (-1, 1) whose direction is the base direction
// rotated by `offset(p)`.
template <typename Offset>
std::vector<DeviationSample> rotated_members(int n, std::uint64_t seed, Offset offset) {
  std::mt19937_64 rng(seed);
  std::vector<DeviationSample> members;
  while (static_cast<int>(members.size()) < n) {
    const V2 p(uniform(rng, -2, 0), uniform(rng, 0, 2));
    if ((p - V2(-1, 1)).norm() > 1.0) continue;
    const V2 d = rotate_in_plane_2d(base_direction(kTarget, p), offset(p)).vector();
    members.push_back({p, d});
  }
  return members;
}

ClusterModel chain_model() {
  return ClusterModel({}, {}, Eigen::MatrixXd::Zero(3, 5), {V2(0, 0), V2(2, 0), V2(4, 0)}, 1.5, {0.2, 0.5, 0.8},
                      V2(4.2, 0.1));
}

}  // namespace

TEST_CASE("base direction points at the target") {
  CHECK((base_direction(kTarget, kTarget + V2(-1, 0)).vector() - Vector(V2(1, 0))).norm() < 1e-15);
  CHECK(base_direction(kTarget, V2(3, 7)).vector().norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(base_direction(kTarget, kTarget), DegenerateDirectionError);
}

TEST_CASE("members pointing at the target give a zero deviation") {
  const auto fit = fit_deviation(0, kTarget, rotated_members(60, 1, [](const V2&) { return 0.0; }));
  CHECK(fit.rejected == 0);
  std::mt19937_64 rng(2);
  for (int i = 0; i < 200; ++i) {
    CHECK(std::abs(fit.model.predict(V2(uniform(rng, -3, 1), uniform(rng, -1, 3)))) < 1e-9);
  }
}

TEST_CASE("a constant 30 degree offset is learned") {
  const auto members = rotated_members(80, 3, [](const V2&) { return std::numbers::pi / 6; });
  const auto fit = fit_deviation(0, kTarget, members);
  for (const auto& m : members) CHECK(fit.model.predict(m.position) == doctest::Approx(std::numbers::pi / 6).epsilon(0.02));
}

TEST_CASE("a position-dependent deviation is learned by both backends") {
  auto offset = [](const V2& p) { return 0.4 * std::sin(2.0 * p.x()) + 0.2 * p.y(); };
  const auto members = rotated_members(150, 4, offset);
  DeviationConfig ridge;
  ridge.regression.backend = RegressionBackend::KernelRidge;
  for (const auto& config : {DeviationConfig{}, ridge}) {
    const auto fit = fit_deviation(0, kTarget, members, config);
    double worst = 0.0;
    for (const auto& m : members) worst = std::max(worst, std::abs(fit.model.predict(m.position) - offset(m.position)));
    CHECK(worst < 0.1);
  }
}

TEST_CASE("predictions are clipped at the maximal deviation") {
  // Deviations up to 1.5 rad exceed 0.4 pi = 1.2566 without being rejected.
  const auto fit = fit_deviation(0, kTarget, rotated_members(80, 5, [](const V2& p) { return 1.5 * (p.x() + 1.0); }));
  CHECK(fit.rejected == 0);
  double raw = 0.0;
  double clipped = 0.0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const V2 p(-4.0 + 6.0 * i / 99.0, -2.0 + 6.0 * j / 99.0);
      raw = std::max(raw, std::abs(fit.model.predict_raw(p)));
      clipped = std::max(clipped, std::abs(fit.model.predict(p)));
    }
  }
  CHECK(raw > 0.4 * std::numbers::pi);
  CHECK(clipped <= 0.4 * std::numbers::pi + 1e-12);
}

TEST_CASE("local dynamics turns the base direction by the predicted deviation") {
  const auto fit = fit_deviation(0, kTarget, rotated_members(80, 6, [](const V2& p) { return 1.5 * (p.x() + 1.0); }));
  const V2 attractor(3.0, -1.0);
  const SpeedProfile speed{0.5, 2.0};
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const V2 p(uniform(rng, -4, 2), uniform(rng, -2, 4));
    const V2 v = local_dynamics(fit.model, attractor, p, speed);
    const UnitDirection base = base_direction(kTarget, p);
    CHECK(signed_angle_2d(base, UnitDirection(Vector(v))) == doctest::Approx(fit.model.predict(p)).epsilon(1e-9));
    CHECK(v.dot(base.vector()) > 0.0);
    CHECK(v.norm() == doctest::Approx(0.5 * std::min((p - attractor).norm(), 2.0)));
  }
  CHECK(local_dynamics(fit.model, attractor, attractor, speed).isZero(0.0));
}

TEST_CASE("a deviation of +pi/4 rotates the velocity counter-clockwise") {
  const DeviationModel model(0, V2(1, 0),
                             KernelRegressor(RegressionBackend::KernelRidge, 1.0, Eigen::MatrixXd(0, 2),
                                             Eigen::VectorXd(0), std::numbers::pi / 4),
                             0.4 * std::numbers::pi);
  const V2 v = local_dynamics(model, V2(5, 5), V2(0, 0));
  CHECK((v.normalized() - V2(1, 1).normalized()).norm() < 1e-12);
}

TEST_CASE("too many reversed members violate the deviation bound") {
  auto members = rotated_members(50, 8, [](const V2&) { return 0.0; });
  for (int i = 0; i < 11; ++i) members[static_cast<std::size_t>(i)].direction *= -1.0;
  try {
    fit_deviation(3, kTarget, members);
    FAIL("expected a training error");
  } catch (const TrainingError& e) {
    CHECK(e.stage() == "deviation");
    CHECK(std::string(e.what()).find("increase k") != std::string::npos);
  }
  members[10].direction *= -1.0;
  const auto fit = fit_deviation(3, kTarget, members);
  CHECK(fit.rejected == 10);
  CHECK(fit.samples == 50);
}

TEST_CASE("clusters with too few members are rejected") {
  CHECK_THROWS_AS(fit_deviation(0, kTarget, rotated_members(4, 9, [](const V2&) { return 0.0; })), TrainingError);
}

TEST_CASE("base target of the root is the attractor") {
  const auto model = chain_model();
  CHECK(base_target(model, model.root(), {}) == model.attractor());
}

TEST_CASE("base target is the mean wall crossing into the parent") {
  const auto model = chain_model();
  REQUIRE(model.parent()[0] == 1);
  const std::vector<std::vector<V2>> demos = {{V2(0, 0.2), V2(0.5, 0.2), V2(1.5, 0.2), V2(2, 0.2)},
                                              {V2(0, 0.6), V2(0.8, 0.6), V2(1.2, 0.2), V2(2, 0)}};
  // Second crossing: the segment meets x = 1 halfway, at y = 0.4.
  CHECK((base_target(model, 0, demos) - V2(1.0, 0.3)).norm() < 1e-12);
}

TEST_CASE("base target falls back to the wall midpoint and stays inside the wall") {
  const auto model = chain_model();
  CHECK((base_target(model, 0, {}) - V2(1.0, 0.0)).norm() < 1e-12);
  const double half = std::sqrt(1.5 * 1.5 - 1.0);
  const V2 target = base_target(model, 0, {{V2(0.5, 1.1), V2(1.5, 1.1)}});
  CHECK(target.x() == doctest::Approx(1.0));
  CHECK(std::abs(target.y()) == doctest::Approx(0.9 * half));
}

TEST_CASE("deviation fits are reproducible") {
  const auto members = rotated_members(90, 10, [](const V2& p) { return 0.3 * p.y(); });
  const auto a = fit_deviation(0, kTarget, members);
  const auto b = fit_deviation(0, kTarget, members);
  for (const auto& m : members) CHECK(a.model.predict(m.position) == b.model.predict(m.position));
}

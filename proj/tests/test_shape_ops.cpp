#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Geometry>

#include <cmath>

#include "gmshape/shape_ops.hpp"
#include "oracles.hpp"

using namespace gmshape;
using gmshape::testing::random_mixture;

namespace {

// anisotropic mixture with well-separated whole-mixture eigenvalues
GaussianMixture3 anisotropic_mixture(Rng& rng) {
  GaussianMixture3 m;
  Mat3 cov = Mat3::Zero();
  cov.diagonal() << 0.30, 0.08, 0.02;
  m.components.push_back(component_from_moments(0.5, Vec3(0.6, 0.1, 0), cov));
  cov.diagonal() << 0.10, 0.05, 0.015;
  m.components.push_back(component_from_moments(0.3, Vec3(-0.5, 0.3, 0.2), cov));
  cov.diagonal() << 0.05, 0.03, 0.01;
  m.components.push_back(component_from_moments(0.2, Vec3(0.1, -0.6, -0.3), cov));
  // random overall orientation so nothing is axis-aligned
  const Vec3 axis = rng.in_ball(1.0).normalized();
  const Mat3 rot = Eigen::AngleAxisd(rng.uniform(0.0, 3.0), axis).toRotationMatrix();
  RigidTransform t;
  t.rotation = rot;
  return transformed(m, t);
}

double rotation_angle(const Mat3& r) {
  return Eigen::AngleAxisd(r).angle();
}

}  // namespace

TEST_CASE("align: identical mixtures give the identity transform with zero residual") {
  Rng rng(3);
  const GaussianMixture3 a = anisotropic_mixture(rng);
  const AlignResult result = align(a, a, false);
  CHECK(result.residual <= 1e-10);
  CHECK((result.transform.rotation - Mat3::Identity()).norm() < 1e-6);
  CHECK(result.transform.translation.norm() < 1e-9);
  CHECK(!result.ambiguous);
  CHECK(result.candidates.size() == 4);
}

TEST_CASE("align recovers a known rigid transform") {
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const GaussianMixture3 a = anisotropic_mixture(rng);
    RigidTransform t0;
    t0.rotation =
        Eigen::AngleAxisd(rng.uniform(0.2, 2.8), rng.in_ball(1.0).normalized()).toRotationMatrix();
    t0.translation = rng.in_ball(0.8);
    const GaussianMixture3 b = transformed(a, t0);

    const AlignResult result = align(a, b, false);
    // the estimate maps b back onto a, i.e. approximates t0^-1
    CHECK(rotation_angle(result.transform.rotation * t0.rotation) < 1e-3);
    CHECK(result.residual <= 1e-10);

    // apply the estimate to b and compare moments with a
    const GaussianMixture3 back = transformed(b, result.transform);
    const MixtureMoments ma = mixture_moments(a);
    const MixtureMoments mb = mixture_moments(back);
    CHECK((ma.mean - mb.mean).norm() < 1e-9);
    CHECK((ma.covariance - mb.covariance).norm() < 1e-9);
  }
}

TEST_CASE("align with scale: doubled mixture yields scale one half") {
  Rng rng(11);
  const GaussianMixture3 a = anisotropic_mixture(rng);
  RigidTransform doubling;
  doubling.scale = 2.0;
  const GaussianMixture3 b = transformed(a, doubling);
  const AlignResult result = align(a, b, true);
  CHECK(result.transform.scale == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(result.residual <= 1e-8);
}

TEST_CASE("align is inverse-consistent") {
  Rng rng(13);
  const GaussianMixture3 a = anisotropic_mixture(rng);
  RigidTransform t0;
  t0.rotation = Eigen::AngleAxisd(1.1, Vec3(0.2, 0.9, -0.3).normalized()).toRotationMatrix();
  t0.translation = Vec3(0.4, -0.2, 0.7);
  const GaussianMixture3 b = transformed(a, t0);

  const AlignResult ab = align(a, b, false);
  const AlignResult ba = align(b, a, false);
  const Mat3 composed = ab.transform.rotation * ba.transform.rotation;
  CHECK(rotation_angle(composed) < 1e-6);
  const Vec3 t_composed =
      ab.transform.rotation * ba.transform.translation + ab.transform.translation;
  CHECK(t_composed.norm() < 1e-6);
}

TEST_CASE("align flags near-degenerate spectra") {
  GaussianMixture3 iso;
  iso.components.push_back(component_from_moments(1.0, Vec3(0.1, 0.2, 0.3), 0.04 * Mat3::Identity()));
  const AlignResult result = align(iso, iso, false);
  CHECK(result.ambiguous);
  CHECK(result.residual <= 1e-10);  // still a correct answer for b == a
}

TEST_CASE("transformed composes density correctly") {
  Rng rng(17);
  const GaussianMixture3 m = random_mixture(3, rng);
  RigidTransform t;
  t.rotation = Eigen::AngleAxisd(0.8, Vec3(1, 1, 0).normalized()).toRotationMatrix();
  t.translation = Vec3(0.3, -0.1, 0.5);
  t.scale = 1.4;
  const GaussianMixture3 moved = transformed(m, t);
  // density of the pushforward: f_T(x) = f(T^-1 x) / s^3
  const RigidTransform inv = t.inverse();
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = rng.in_ball(2.0);
    const double expected = density(m, inv.apply(x)) / (t.scale * t.scale * t.scale);
    CHECK(density(moved, x) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("reduce: merging identical components is exact with summed weight") {
  GaussianMixture3 m;
  const Mat3 cov = 0.04 * Mat3::Identity();
  m.components.push_back(component_from_moments(0.6, Vec3(0.2, 0.1, 0), cov));
  m.components.push_back(component_from_moments(0.4, Vec3(0.2, 0.1, 0), cov));
  const GaussianMixture3 r = reduce(m, 1);
  REQUIRE(r.size() == 1);
  CHECK(r.components[0].weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((r.components[0].mean - Vec3(0.2, 0.1, 0)).norm() < 1e-12);
  CHECK((r.components[0].covariance() - cov).norm() < 1e-10);
}

TEST_CASE("reduce: symmetric pair merges to the total-covariance component") {
  const double eps = 1e-3;
  GaussianMixture3 m;
  m.components.push_back(component_from_moments(0.5, Vec3(1, 0, 0), eps * Mat3::Identity()));
  m.components.push_back(component_from_moments(0.5, Vec3(-1, 0, 0), eps * Mat3::Identity()));
  const GaussianMixture3 r = reduce(m, 1);
  CHECK(r.components[0].mean.norm() < 1e-12);
  Mat3 expected = eps * Mat3::Identity();
  expected(0, 0) += 1.0;
  CHECK((r.components[0].covariance() - expected).norm() < 1e-9);
}

TEST_CASE("reduce: k_target == K returns the input unchanged; bad targets throw") {
  Rng rng(19);
  const GaussianMixture3 m = random_mixture(4, rng);
  const GaussianMixture3 same = reduce(m, 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(same.components[i].weight == m.components[i].weight);
    CHECK(same.components[i].mean == m.components[i].mean);
  }
  CHECK_THROWS(reduce(m, 0));
  CHECK_THROWS(reduce(m, 5));
}

TEST_CASE("reduce preserves whole-mixture moments at every level") {
  Rng rng(23);
  const GaussianMixture3 m = random_mixture(20, rng);
  const MixtureMoments ref = mixture_moments(m);
  for (int k : {15, 10, 5, 2, 1}) {
    const GaussianMixture3 r = reduce(m, k);
    REQUIRE(r.size() == k);
    const MixtureMoments mom = mixture_moments(r);
    CHECK((mom.mean - ref.mean).norm() < 1e-9);
    CHECK((mom.covariance - ref.covariance).norm() < 1e-9);
    double wsum = 0.0;
    for (const auto& c : r.components) wsum += c.weight;
    CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("reduce keeps the merge cost non-negative (KL bound sanity)") {
  // the bound B >= 0 follows from concavity of log det; indirectly check by
  // verifying reduction never produces non-SPD covariances
  Rng rng(29);
  const GaussianMixture3 m = random_mixture(12, rng);
  const GaussianMixture3 r = reduce(m, 3);
  for (const auto& c : r.components) {
    const Mat3 cov = c.covariance();
    CHECK(cov.determinant() > 0.0);
    CHECK(cov(0, 0) > 0.0);
  }
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "gmshape/metrics.hpp"
#include "gmshape/surface.hpp"
#include "oracles.hpp"

using namespace gmshape;
using gmshape::testing::random_mixture;

namespace {

// O(n^2) reference for the accelerated chamfer path
double chamfer_bruteforce_unnormalized(const PointList& a, const PointList& b) {
  auto one_way = [](const PointList& from, const PointList& to) {
    double acc = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
      acc += std::sqrt(best);
    }
    return acc / from.size();
  };
  return one_way(a, b) + one_way(b, a);
}

VoxelGrid cube_grid(int lo_x, int hi_x) {
  VoxelGrid g = make_voxel_grid(Vec3::Constant(0.0), Vec3::Constant(1.0), Vec3i(8, 8, 8));
  for (int k = 2; k < 6; ++k)
    for (int j = 2; j < 6; ++j)
      for (int i = lo_x; i < hi_x; ++i) g.at(i, j, k) = 1.0;
  return g;
}

}  // namespace

TEST_CASE("binary-grid IoU: identical, disjoint, and half-overlapping cubes") {
  const VoxelGrid a = cube_grid(0, 4);
  CHECK(iou(a, a) == 1.0);
  const VoxelGrid b = cube_grid(4, 8);
  CHECK(iou(a, b) == 0.0);
  const VoxelGrid c = cube_grid(2, 6);  // overlaps half of a
  CHECK(iou(a, c) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("mixture IoU: the mixture's own thresholded volume scores exactly 1") {
  Rng rng(3);
  const GaussianMixture3 m = random_mixture(3, rng);
  const Aabb bounds = default_mesh_bounds(m);
  VoxelGrid gt = voxelize_density(m, Vec3i(32, 32, 32), bounds);
  const double tau = iso_threshold(m, 1.0);
  for (double& v : gt.values) v = v > tau ? 1.0 : 0.0;
  CHECK(iou(m, gt, 1.0) == 1.0);

  // far-away ground truth: zero overlap
  VoxelGrid far = gt;
  far.origin += Vec3::Constant(100.0);
  CHECK(iou(m, far, 1.0) == 0.0);

  VoxelGrid empty = gt;
  for (double& v : empty.values) v = 0.0;
  CHECK_THROWS(iou(m, empty, 1.0));
}

TEST_CASE("chamfer: identical sets score zero, definition holds for single points") {
  Rng rng(5);
  PointList pts;
  for (int i = 0; i < 100; ++i) pts.push_back(rng.in_ball(1.0));
  CHECK(chamfer(pts, pts) == 0.0);

  const PointList a = {Vec3::Zero()};
  const PointList b = {Vec3(0.35, 0, 0)};
  CHECK(chamfer(a, b, CloudNormalization::None) == doctest::Approx(0.7).epsilon(1e-15));
}

TEST_CASE("chamfer: accelerated path equals the brute-force oracle") {
  Rng rng(7);
  PointList a, b;
  for (int i = 0; i < 512; ++i) a.push_back(rng.in_ball(1.0));
  for (int i = 0; i < 512; ++i) b.push_back(rng.in_ball(1.0) + Vec3(0.2, 0, 0));
  const double fast = chamfer(a, b, CloudNormalization::None);
  const double brute = chamfer_bruteforce_unnormalized(a, b);
  CHECK(std::abs(fast - brute) < 1e-12);
}

TEST_CASE("chamfer: symmetric and invariant to joint translation") {
  Rng rng(9);
  PointList a, b;
  for (int i = 0; i < 64; ++i) a.push_back(rng.in_ball(1.0));
  for (int i = 0; i < 64; ++i) b.push_back(rng.in_ball(1.0) * 0.8 + Vec3(0.1, 0.2, 0));
  CHECK(chamfer(a, b) == chamfer(b, a));

  const Vec3 shift(12.0, -3.0, 40.0);
  PointList a2 = a, b2 = b;
  for (Vec3& p : a2) p += shift;
  for (Vec3& p : b2) p += shift;
  CHECK(chamfer(a2, b2) == doctest::Approx(chamfer(a, b)).epsilon(1e-12));
}

TEST_CASE("emd: identical multisets score zero regardless of labeling") {
  Rng rng(11);
  PointList a;
  for (int i = 0; i < 32; ++i) a.push_back(rng.in_ball(1.0));
  PointList swapped = a;
  std::swap(swapped[0], swapped[1]);
  CHECK(emd(a, a, {}).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(emd(a, swapped, {}).value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(emd(a, a, {}).exact);

  PointList bad(a.begin(), a.begin() + 10);
  CHECK_THROWS(emd(a, bad, {}));
}

TEST_CASE("emd: exact solver equals the obvious matching on a shifted cloud") {
  Rng rng(13);
  PointList a;
  for (int i = 0; i < 24; ++i) a.push_back(rng.in_ball(0.2));
  PointList b = a;
  const Vec3 shift(0.01, 0, 0);
  for (Vec3& p : b) p += shift;
  // for a pure translation the identity matching is optimal
  const EmdResult r = emd(a, b, {.normalization = CloudNormalization::None});
  CHECK(r.value <= shift.norm() + 1e-12);
  CHECK(r.value > 0.0);
}

TEST_CASE("emd: approximate solver within 2% of the exact assignment at n = 64") {
  Rng rng(17);
  PointList a, b;
  for (int i = 0; i < 64; ++i) a.push_back(rng.in_ball(1.0));
  for (int i = 0; i < 64; ++i) b.push_back(rng.in_ball(1.0) + Vec3(0.3, -0.1, 0.2));

  EmdOptions exact_opt;
  exact_opt.normalization = CloudNormalization::None;
  const EmdResult exact = emd(a, b, exact_opt);
  REQUIRE(exact.exact);

  EmdOptions approx_opt = exact_opt;
  approx_opt.exact_threshold = 0;  // force the entropic path
  const EmdResult approx = emd(a, b, approx_opt);
  CHECK(!approx.exact);
  CHECK(approx.value >= exact.value - 1e-9);  // feasible plan can't beat the optimum
  CHECK(std::abs(approx.value - exact.value) / exact.value < 0.02);
  CHECK(approx.duality_gap >= 0.0);
}

TEST_CASE("emd is symmetric") {
  Rng rng(19);
  PointList a, b;
  for (int i = 0; i < 48; ++i) a.push_back(rng.in_ball(1.0));
  for (int i = 0; i < 48; ++i) b.push_back(rng.in_ball(0.7) + Vec3(0.2, 0.4, -0.1));
  CHECK(emd(a, b, {}).value == doctest::Approx(emd(b, a, {}).value).epsilon(1e-9));
}

TEST_CASE("silhouette_mse basics") {
  SilhouetteImage a(8, 8, 0.0);
  SilhouetteImage b(8, 8, 1.0);
  CHECK(silhouette_mse(a, a) == 0.0);
  CHECK(silhouette_mse(a, b) == 1.0);
  Rng rng(21);
  for (double& v : a.values) v = rng.uniform();
  for (double& v : b.values) v = rng.uniform();
  CHECK(silhouette_mse(a, b) == silhouette_mse(b, a));
  SilhouetteImage c(8, 4, 0.0);
  CHECK_THROWS(silhouette_mse(a, c));
}

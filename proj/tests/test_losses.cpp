#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "gmshape/detail/parallel.hpp"
#include "gmshape/fitter.hpp"
#include "gmshape/losses.hpp"
#include "oracles.hpp"

using namespace gmshape;
using gmshape::testing::finite_diff_gradient;
using gmshape::testing::max_rel_error;
using gmshape::testing::random_mixture;
using gmshape::testing::random_params;

namespace {

// small synthetic view: the ground truth comes from a nearby parameter set so
// residuals are non-trivial
std::vector<ViewObservation> make_test_views(const MixtureParams& params, long long q,
                                             std::uint64_t seed, int n_views = 1) {
  Rng rng(seed);
  std::vector<ViewObservation> views;
  for (int v = 0; v < n_views; ++v) {
    const Vec3 eye = 2.0 * rng.in_ball(1.0).normalized();
    Camera cam = Camera::look_at(eye, Vec3::Zero(), Vec3(0, 1, 0), 8.0, Vec2(8, 8), 16, 16);
    MixtureParams gt = params;
    for (int i = 0; i < gt.raw.size(); ++i) gt.raw[i] += rng.uniform(-0.15, 0.15);
    views.push_back(
        {cam, soft_silhouette(paraperspective_project(constrain(gt), cam), q, cam)});
  }
  return views;
}

}  // namespace

TEST_CASE("loss_3d: single standard normal, single point at the mean") {
  MixtureParams p{VecX::Zero(10)};
  const PointList pts = {Vec3::Zero()};
  const auto [value, grad] = loss_3d(p, pts);
  CHECK(value == doctest::Approx(2.7568155996140185).epsilon(1e-12));  // 1.5 ln(2 pi)
  CHECK(grad.size() == 10);
}

TEST_CASE("loss_3d gradient matches central finite differences") {
  Rng rng(101);
  for (int trial = 0; trial < 5; ++trial) {
    const int k = 1 + trial % 3;
    const MixtureParams params = random_params(k, rng);
    PointList pts;
    for (int i = 0; i < 50; ++i) pts.push_back(rng.in_ball(1.5));

    const auto [value, grad] = loss_3d(params, pts);
    const VecX fd = finite_diff_gradient(
        [&](const MixtureParams& q) { return loss_3d(q, pts).first; }, params, 1e-5);
    CHECK(max_rel_error(grad, fd) < 1e-4);
  }
}

TEST_CASE("loss_3d is invariant under point and component permutations") {
  Rng rng(7);
  const MixtureParams params = random_params(4, rng);
  PointList pts;
  for (int i = 0; i < 64; ++i) pts.push_back(rng.in_ball(1.0));

  const double base = loss_3d(params, pts).first;

  PointList shuffled = pts;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(loss_3d(params, shuffled).first == doctest::Approx(base).epsilon(1e-13));

  const GaussianMixture3 m = constrain(params);
  GaussianMixture3 perm = m;
  std::reverse(perm.components.begin(), perm.components.end());
  CHECK(loss_3d(unconstrain(perm), pts).first == doctest::Approx(base).epsilon(1e-13));
}

TEST_CASE("loss_3d: points drawn from the mixture sit near a stationary point") {
  Rng rng(55);
  GaussianMixture3 m;
  m.components.push_back(component_from_moments(0.5, Vec3(-0.6, 0, 0), 0.09 * Mat3::Identity()));
  m.components.push_back(component_from_moments(0.5, Vec3(0.6, 0, 0), 0.09 * Mat3::Identity()));
  const MixtureParams params = unconstrain(m);
  const PointList pts = sample(m, 100000, 11);

  const auto [value, grad] = loss_3d(params, pts);
  // value approximates the differential entropy of the mixture
  double entropy_mc = 0.0;
  for (const Vec3& x : pts) entropy_mc -= log_density(m, x);
  entropy_mc /= pts.size();
  CHECK(value == doctest::Approx(entropy_mc).epsilon(1e-12));
  // gradient is small at the generating parameters (MC noise only)
  CHECK(grad.norm() / std::sqrt(static_cast<double>(grad.size())) < 0.02);
}

TEST_CASE("loss_dist values and gradient") {
  // everything inside T: zero loss, zero gradient
  Rng rng(71);
  const MixtureParams inside = random_params(3, rng);  // means within 0.8 < 0.85
  const auto [v0, g0] = loss_dist(inside, 0.85);
  CHECK(v0 == 0.0);
  CHECK(g0.norm() == 0.0);

  // K=1 at distance 1.85 with T=0.85: ReLU(1)^2 = 1
  MixtureParams far{VecX::Zero(10)};
  far.raw[MixtureParams::index_mean(0)] = 1.85;
  CHECK(loss_dist(far, 0.85).first == doctest::Approx(1.0).epsilon(1e-12));

  // finite differences at |mu| = 1.2
  MixtureParams mid{VecX::Zero(10)};
  mid.raw.segment<3>(MixtureParams::index_mean(0)) = Vec3(1.2, 0, 0).normalized() * 1.2;
  const auto [v, g] = loss_dist(mid, 0.85);
  const VecX fd = finite_diff_gradient(
      [&](const MixtureParams& q) { return loss_dist(q, 0.85).first; }, mid, 1e-5);
  CHECK(max_rel_error(g, fd) < 1e-4);
}

TEST_CASE("loss_silhouette: perfect reproduction gives exactly zero loss and gradient") {
  Rng rng(81);
  const MixtureParams params = random_params(2, rng);
  const long long q = 100;
  const Camera cam = Camera::look_at(Vec3(0, 0, -2), Vec3::Zero(), Vec3(0, 1, 0), 8.0,
                                     Vec2(8, 8), 16, 16);
  const ViewObservation view{
      cam, soft_silhouette(paraperspective_project(constrain(params), cam), q, cam)};
  const auto [value, grad] = loss_silhouette(params, {view}, q);
  CHECK(value == 0.0);
  CHECK(grad.norm() == 0.0);
}

TEST_CASE("loss_silhouette: zero ground truth sums the squared soft silhouette") {
  Rng rng(91);
  const MixtureParams params = random_params(2, rng);
  const long long q = 50;
  const Camera cam = Camera::look_at(Vec3(0, 0.5, -2), Vec3::Zero(), Vec3(0, 1, 0), 8.0,
                                     Vec2(8, 8), 16, 16);
  const ViewObservation view{cam, SilhouetteImage(16, 16, 0.0)};
  const auto [value, grad] = loss_silhouette(params, {view}, q);

  const SilhouetteImage s =
      soft_silhouette(paraperspective_project(constrain(params), cam), q, cam);
  double expected = 0.0;
  for (double v : s.values) expected += v * v;
  CHECK(value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(value >= 0.0);
}

TEST_CASE("loss_silhouette gradient matches central finite differences") {
  Rng rng(111);
  for (int trial = 0; trial < 4; ++trial) {
    const MixtureParams params = random_params(2, rng);
    const long long q = 20 + 40 * trial;
    const std::vector<ViewObservation> views = make_test_views(params, q, 1000 + trial);
    const auto [value, grad] = loss_silhouette(params, views, q);
    const VecX fd = finite_diff_gradient(
        [&](const MixtureParams& p) { return loss_silhouette(p, views, q).first; }, params, 1e-5);
    CHECK(max_rel_error(grad, fd) < 1e-3);
  }
}

TEST_CASE("total_loss composes terms linearly") {
  Rng rng(121);
  const MixtureParams params = random_params(2, rng);
  PointList pts;
  for (int i = 0; i < 40; ++i) pts.push_back(rng.in_ball(1.2));
  const std::vector<ViewObservation> views = make_test_views(params, 64, 2000);

  LossConfig cfg;
  cfg.q_points = 64;

  SUBCASE("weights (1,0,0) give exactly the 3D term") {
    cfg.w_3d = 1.0;
    cfg.w_dist = 0.0;
    cfg.w_sil = 0.0;
    const LossReport r = total_loss(params, pts, views, cfg);
    CHECK(r.total == loss_3d(params, pts).first);
    CHECK(r.l_dist == 0.0);
    CHECK(r.l_sil == 0.0);
  }

  SUBCASE("all-zero weights give zero loss and gradient") {
    cfg.w_3d = cfg.w_dist = cfg.w_sil = 0.0;
    const LossReport r = total_loss(params, pts, views, cfg);
    CHECK(r.total == 0.0);
    CHECK(r.gradient.norm() == 0.0);
  }

  SUBCASE("gradient is the weighted sum of term gradients") {
    cfg.w_3d = 0.7;
    cfg.w_dist = 1.3;
    cfg.w_sil = 0.25;
    const LossReport r = total_loss(params, pts, views, cfg);
    const VecX expected = cfg.w_3d * loss_3d(params, pts).second +
                          cfg.w_dist * loss_dist(params, cfg.t_dist).second +
                          cfg.w_sil * loss_silhouette(params, views, cfg.q_points).second;
    CHECK((r.gradient - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    CHECK(r.total == doctest::Approx(cfg.w_3d * r.l_3d + cfg.w_dist * r.l_dist +
                                     cfg.w_sil * r.l_sil).epsilon(1e-12));
  }
}

TEST_CASE("loss evaluation is bitwise identical for any thread count") {
  Rng rng(141);
  const MixtureParams params = random_params(3, rng);
  PointList pts;
  for (int i = 0; i < 1000; ++i) pts.push_back(rng.in_ball(1.2));
  const std::vector<ViewObservation> views = make_test_views(params, 32, 3000, 2);

  set_thread_count(1);
  const auto [v1, g1] = loss_3d(params, pts);
  const auto [s1, sg1] = loss_silhouette(params, views, 32);
  set_thread_count(4);
  const auto [v4, g4] = loss_3d(params, pts);
  const auto [s4, sg4] = loss_silhouette(params, views, 32);
  set_thread_count(0);
  CHECK(v1 == v4);
  CHECK(g1 == g4);
  CHECK(s1 == s4);
  CHECK(sg1 == sg4);
}

TEST_CASE("an exact EM step does not increase loss_3d") {
  Rng rng(131);
  PointList pts;
  for (int i = 0; i < 500; ++i) pts.push_back(rng.in_ball(1.0) + Vec3(0.2, 0, 0));
  for (int i = 0; i < 500; ++i) pts.push_back(0.5 * rng.in_ball(1.0) - Vec3(1.2, 0, 0));

  const MixtureParams params = random_params(3, rng);
  const double before = loss_3d(params, pts).first;
  const GaussianMixture3 stepped = em_run(pts, constrain(params), 1).mixture;
  const double after = loss_3d(unconstrain(stepped), pts).first;
  CHECK(after <= before + 1e-10);
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gmshape/fitter.hpp"
#include "oracles.hpp"

using namespace gmshape;
using gmshape::testing::mc_symmetric_kl;

namespace {

PointList three_clusters(int n, std::uint64_t seed) {
  GaussianMixture3 gen;
  gen.components.push_back(component_from_moments(0.4, Vec3(-0.9, 0, 0), 0.04 * Mat3::Identity()));
  gen.components.push_back(component_from_moments(0.35, Vec3(0.8, 0.5, 0), 0.05 * Mat3::Identity()));
  gen.components.push_back(component_from_moments(0.25, Vec3(0.1, -0.8, 0.4), 0.03 * Mat3::Identity()));
  return sample(gen, n, seed);
}

std::pair<Vec3, Mat3> sample_moments(const PointList& pts) {
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= pts.size();
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts) cov += (p - mean) * (p - mean).transpose();
  cov /= pts.size();
  return {mean, cov};
}

}  // namespace

TEST_CASE("em_run with K = 1 recovers the sample moments in one iteration") {
  Rng rng(3);
  PointList pts;
  for (int i = 0; i < 2000; ++i) pts.push_back(rng.in_ball(1.0) + Vec3(0.3, -0.2, 0.1));
  const auto [mean, cov] = sample_moments(pts);

  GaussianMixture3 start;
  start.components.push_back(component_from_moments(1.0, Vec3::Zero(), Mat3::Identity()));
  const GaussianMixture3 out = em_run(pts, start, 1).mixture;
  CHECK((out.components[0].mean - mean).norm() < 1e-12);
  CHECK((out.components[0].covariance() - cov).norm() < 1e-10);
  CHECK(out.components[0].weight == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("em_fit log-likelihood is non-decreasing") {
  const PointList pts = three_clusters(3000, 17);
  const EmResult result = em_run(pts, em_init(pts, 3, 5), 40);
  for (std::size_t i = 1; i < result.avg_log_likelihood.size(); ++i)
    CHECK(result.avg_log_likelihood[i] >= result.avg_log_likelihood[i - 1] - 1e-10);
}

TEST_CASE("gradient fit with K = 1 converges to the maximum-likelihood Gaussian") {
  Rng rng(23);
  PointList pts;
  for (int i = 0; i < 4000; ++i) pts.push_back(rng.in_ball(0.8) + Vec3(0.25, 0.1, -0.3));
  const auto [mean, cov] = sample_moments(pts);

  FitConfig cfg;
  cfg.k = 1;
  cfg.iters = 1500;
  cfg.lr = 5e-2;
  cfg.seed = 1;
  LossConfig loss;
  loss.w_dist = 0.0;
  loss.w_sil = 0.0;
  loss.sample_batch = 0;  // full batch

  const FitResult result = fit(pts, {}, cfg, loss);
  const GaussianComponent& c = result.mixture.components[0];
  CHECK((c.mean - mean).norm() / mean.norm() < 1e-3);
  CHECK((c.covariance() - cov).norm() / cov.norm() < 1e-3);
  CHECK(result.trace.iterations.size() == 1500);
  CHECK(result.trace.iterations.back().total <= result.trace.iterations.front().total);
}

TEST_CASE("fit is deterministic for a fixed seed") {
  const PointList pts = three_clusters(2000, 29);
  FitConfig cfg;
  cfg.k = 3;
  cfg.iters = 40;
  cfg.seed = 99;
  LossConfig loss;
  loss.w_sil = 0.0;
  loss.sample_batch = 256;

  const FitResult a = fit(pts, {}, cfg, loss);
  const FitResult b = fit(pts, {}, cfg, loss);
  CHECK(a.trace.final_params.raw == b.trace.final_params.raw);
  REQUIRE(a.trace.iterations.size() == b.trace.iterations.size());
  for (std::size_t i = 0; i < a.trace.iterations.size(); ++i)
    CHECK(a.trace.iterations[i].total == b.trace.iterations[i].total);
}

TEST_CASE("fit recovers a known two-component generator (symmetric KL oracle)") {
  GaussianMixture3 gen;
  gen.components.push_back(component_from_moments(0.5, Vec3(-0.55, 0, 0), 0.05 * Mat3::Identity()));
  gen.components.push_back(component_from_moments(0.5, Vec3(0.55, 0.2, 0), 0.07 * Mat3::Identity()));
  const PointList pts = sample(gen, 100000, 41);

  FitConfig cfg;
  cfg.k = 2;
  cfg.iters = 1200;
  cfg.lr = 2e-2;
  cfg.seed = 7;
  cfg.init = InitScheme::EmWarmstart;
  cfg.em_warmstart_iters = 5;
  LossConfig loss;
  loss.w_dist = 0.0;
  loss.w_sil = 0.0;
  loss.sample_batch = 4096;

  const FitResult result = fit(pts, {}, cfg, loss);
  CHECK(mc_symmetric_kl(gen, result.mixture, 20000, 5) < 0.05);
}

TEST_CASE("full-batch gradient fit ends within 1e-6 of the EM optimum from the same init") {
  const PointList pts = three_clusters(10000, 53);
  const GaussianMixture3 start = em_init(pts, 3, 11);

  const GaussianMixture3 em_solution = em_run(pts, start, 400).mixture;
  const double em_loss = loss_3d(unconstrain(em_solution), pts).first;

  FitConfig cfg;
  cfg.k = 3;
  cfg.iters = 4000;
  cfg.lr = 1e-2;
  cfg.seed = 1;
  cfg.init_mixture = start;
  LossConfig loss;
  loss.w_dist = 0.0;
  loss.w_sil = 0.0;
  loss.sample_batch = 0;

  const FitResult result = fit(pts, {}, cfg, loss);
  const double adam_loss = loss_3d(result.trace.final_params, pts).first;
  CHECK(adam_loss <= em_loss + 1e-6);
}

TEST_CASE("fit aborts with a numeric_error on divergence") {
  const PointList pts = three_clusters(500, 61);
  FitConfig cfg;
  cfg.k = 2;
  cfg.iters = 50;
  cfg.lr = 1e12;  // guaranteed blow-up
  LossConfig loss;
  loss.w_sil = 0.0;
  loss.sample_batch = 0;
  CHECK_THROWS_AS((void)fit(pts, {}, cfg, loss), numeric_error);
}

TEST_CASE("fit validates its preconditions") {
  FitConfig cfg;
  LossConfig loss;
  CHECK_THROWS_AS((void)fit(PointList{}, {}, cfg, loss), std::invalid_argument);
  const PointList pts = three_clusters(100, 1);
  LossConfig sil;
  sil.w_sil = 1.0;
  CHECK_THROWS_AS((void)fit(pts, {}, cfg, sil), std::invalid_argument);
}

#include "gmshape/fitter.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "gmshape/detail/parallel.hpp"
#include "gmshape/detail/rng.hpp"

namespace gmshape {

namespace {

MixtureParams random_sphere_init(int k, Rng& rng) {
  VecX raw(10 * k);
  for (int i = 0; i < k; ++i) {
    raw[MixtureParams::index_weight(i)] = 0.0;
    raw.segment<3>(MixtureParams::index_mean(i)) = rng.in_ball(0.5);
    raw.segment<3>(MixtureParams::index_ldiag(i)).setConstant(-1.0);
    raw.segment<3>(MixtureParams::index_lsub(i)).setZero();
  }
  return MixtureParams{std::move(raw)};
}

const char* worst_term(const LossReport& r) {
  if (!std::isfinite(r.l_3d)) return "l_3d";
  if (!std::isfinite(r.l_dist)) return "l_dist";
  if (!std::isfinite(r.l_sil)) return "l_sil";
  return "gradient";
}

// Covariance floored to min eigenvalue 1e-6; untouched when already above.
Mat3 floor_covariance(const Mat3& cov) {
  constexpr double kFloor = 1e-6;
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  if (eig.eigenvalues().minCoeff() >= kFloor) return cov;
  const Vec3 lam = eig.eigenvalues().cwiseMax(kFloor);
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

FitResult fit(std::span<const Vec3> target_points, const std::vector<ViewObservation>& views,
              const FitConfig& cfg, const LossConfig& loss_cfg) {
  if (cfg.k < 1 || cfg.iters < 1 || cfg.lr <= 0.0)
    throw std::invalid_argument("fit: need k >= 1, iters >= 1, lr > 0");
  if (target_points.empty()) throw std::invalid_argument("fit: target point set is empty");
  if (loss_cfg.w_sil > 0.0 && views.empty())
    throw std::invalid_argument("fit: silhouette weight is positive but no views were given");

  const auto t_start = std::chrono::steady_clock::now();
  Rng rng(cfg.seed);

  MixtureParams params;
  if (cfg.init_mixture) {
    if (cfg.init_mixture->size() != cfg.k)
      throw std::invalid_argument("fit: init_mixture size does not match k");
    params = unconstrain(*cfg.init_mixture);
  } else if (cfg.init == InitScheme::RandomSphere) {
    params = random_sphere_init(cfg.k, rng);
  } else {
    const GaussianMixture3 warm =
        em_fit(target_points, cfg.k, cfg.em_warmstart_iters, rng.u64());
    params = unconstrain(warm);
  }

  const int n_params = static_cast<int>(params.raw.size());
  VecX adam_m = VecX::Zero(n_params);
  VecX adam_v = VecX::Zero(n_params);

  const int n_points = static_cast<int>(target_points.size());
  const bool full_batch = loss_cfg.sample_batch <= 0 || loss_cfg.sample_batch >= n_points;
  PointList batch(full_batch ? 0 : loss_cfg.sample_batch);

  FitTrace trace;
  trace.iterations.reserve(cfg.iters);

  for (int iter = 0; iter < cfg.iters; ++iter) {
    std::span<const Vec3> pts = target_points;
    if (!full_batch) {
      for (Vec3& p : batch)
        p = target_points[static_cast<std::size_t>(rng.below(n_points))];
      pts = batch;
    }

    std::vector<ViewObservation> view_subset;
    const std::vector<ViewObservation>* view_ptr = &views;
    if (loss_cfg.w_sil > 0.0 && loss_cfg.n_views < static_cast<int>(views.size())) {
      const std::vector<int> pick =
          rng.sample_without_replacement(static_cast<int>(views.size()), loss_cfg.n_views);
      for (int idx : pick) view_subset.push_back(views[idx]);
      view_ptr = &view_subset;
    }

    const LossReport report = total_loss(params, pts, *view_ptr, loss_cfg);
    if (!std::isfinite(report.total) || !report.gradient.allFinite())
      throw numeric_error("fit: non-finite " + std::string(worst_term(report)) +
                          " at iteration " + std::to_string(iter));
    trace.iterations.push_back({report.total, report.l_3d, report.l_dist, report.l_sil});

    double lr = cfg.lr;
    if (cfg.schedule == LrSchedule::Cosine)
      lr *= 0.5 * (1.0 + std::cos(M_PI * iter / std::max(1, cfg.iters - 1)));

    adam_m = cfg.adam_beta1 * adam_m + (1.0 - cfg.adam_beta1) * report.gradient;
    adam_v = cfg.adam_beta2 * adam_v +
             (1.0 - cfg.adam_beta2) * report.gradient.cwiseProduct(report.gradient);
    const double bias1 = 1.0 - std::pow(cfg.adam_beta1, iter + 1);
    const double bias2 = 1.0 - std::pow(cfg.adam_beta2, iter + 1);
    params.raw -= lr * (adam_m / bias1).cwiseQuotient(
                           ((adam_v / bias2).cwiseSqrt().array() + cfg.adam_eps).matrix());
  }

  trace.final_params = params;
  trace.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {constrain(params), std::move(trace)};
}

GaussianMixture3 em_init(std::span<const Vec3> points, int k, std::uint64_t seed) {
  const int n = static_cast<int>(points.size());
  if (n < k) throw std::invalid_argument("em_init: fewer points than components");
  Rng rng(seed);

  // k-means++ seeding
  std::vector<Vec3> centers;
  centers.reserve(k);
  centers.push_back(points[static_cast<std::size_t>(rng.below(n))]);
  std::vector<double> best_d2(n, std::numeric_limits<double>::infinity());
  while (static_cast<int>(centers.size()) < k) {
    double total = 0.0;
    for (int p = 0; p < n; ++p) {
      best_d2[p] = std::min(best_d2[p], (points[p] - centers.back()).squaredNorm());
      total += best_d2[p];
    }
    if (total <= 0.0) {
      centers.push_back(points[static_cast<std::size_t>(rng.below(n))]);
      continue;
    }
    const double u = rng.uniform() * total;
    double acc = 0.0;
    int chosen = n - 1;
    for (int p = 0; p < n; ++p) {
      acc += best_d2[p];
      if (acc >= u) {
        chosen = p;
        break;
      }
    }
    centers.push_back(points[chosen]);
  }

  // Hard assignment to the nearest center, then per-cluster moments.
  std::vector<int> assign(n);
  for (int p = 0; p < n; ++p) {
    double best = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      const double d2 = (points[p] - centers[c]).squaredNorm();
      if (d2 < best) {
        best = d2;
        assign[p] = c;
      }
    }
  }

  GaussianMixture3 m;
  m.components.resize(k);
  const Aabb box = bounding_box(PointList(points.begin(), points.end()));
  const double spread = std::max(1e-3, 0.01 * box.diagonal());
  for (int c = 0; c < k; ++c) {
    Vec3 mean = Vec3::Zero();
    int count = 0;
    for (int p = 0; p < n; ++p)
      if (assign[p] == c) {
        mean += points[p];
        ++count;
      }
    Mat3 cov;
    if (count < 4) {
      // starved cluster: fall back to an isotropic blob at its seed
      mean = centers[c];
      cov = spread * spread * Mat3::Identity();
      count = std::max(count, 1);
    } else {
      mean /= count;
      cov = Mat3::Zero();
      for (int p = 0; p < n; ++p)
        if (assign[p] == c) cov += (points[p] - mean) * (points[p] - mean).transpose();
      cov = floor_covariance(cov / count);
    }
    m.components[c] = component_from_moments(static_cast<double>(count) / n, mean, cov);
  }
  // renormalize (starved clusters may have inflated counts)
  double wsum = 0.0;
  for (const auto& c : m.components) wsum += c.weight;
  for (auto& c : m.components) c.weight /= wsum;
  return m;
}

EmResult em_run(std::span<const Vec3> points, GaussianMixture3 start, int iters) {
  const int n = static_cast<int>(points.size());
  const int k = start.size();
  if (n < 1) throw std::invalid_argument("em_run: empty point set");

  EmResult result;
  result.mixture = std::move(start);
  result.avg_log_likelihood.reserve(iters);
  Rng reseed_rng(0x9e3779b97f4a7c15ULL);

  std::vector<double> resp(static_cast<std::size_t>(n) * k);
  for (int iter = 0; iter < iters; ++iter) {
    // E step
    struct Acc {
      double ll = 0.0;
      Acc& operator+=(const Acc& o) {
        ll += o.ll;
        return *this;
      }
    };
    std::vector<const GaussianComponent*> comps(k);
    std::vector<double> log_w(k), log_norm(k);
    for (int c = 0; c < k; ++c) {
      comps[c] = &result.mixture.components[c];
      log_w[c] = std::log(comps[c]->weight);
      log_norm[c] = comps[c]->log_norm();
    }
    const Acc ll_acc = parallel_reduce<Acc>(n, Acc{}, [&](std::size_t b, std::size_t e) {
      Acc acc;
      VecX terms(k);
      for (std::size_t p = b; p < e; ++p) {
        double max_t = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < k; ++c) {
          const Vec3 y = comps[c]->precision_factor.transpose() * (points[p] - comps[c]->mean);
          terms[c] = log_w[c] + log_norm[c] - 0.5 * y.squaredNorm();
          max_t = std::max(max_t, terms[c]);
        }
        double z = 0.0;
        for (int c = 0; c < k; ++c) z += std::exp(terms[c] - max_t);
        const double log_f = max_t + std::log(z);
        acc.ll += log_f;
        for (int c = 0; c < k; ++c) resp[p * k + c] = std::exp(terms[c] - log_f);
      }
      return acc;
    });
    result.avg_log_likelihood.push_back(ll_acc.ll / n);

    // M step
    for (int c = 0; c < k; ++c) {
      double rsum = 0.0;
      Vec3 mean = Vec3::Zero();
      for (int p = 0; p < n; ++p) {
        rsum += resp[static_cast<std::size_t>(p) * k + c];
        mean += resp[static_cast<std::size_t>(p) * k + c] * points[p];
      }
      if (rsum < 1e-10) {
        // dead component: re-seed on a random point
        const Vec3 seed_pt = points[static_cast<std::size_t>(reseed_rng.below(n))];
        result.mixture.components[c] =
            component_from_moments(1.0 / n, seed_pt, 1e-4 * Mat3::Identity());
        continue;
      }
      mean /= rsum;
      Mat3 cov = Mat3::Zero();
      for (int p = 0; p < n; ++p)
        cov += resp[static_cast<std::size_t>(p) * k + c] * (points[p] - mean) *
               (points[p] - mean).transpose();
      cov = floor_covariance(cov / rsum);
      result.mixture.components[c] = component_from_moments(rsum / n, mean, cov);
    }
    double wsum = 0.0;
    for (const auto& c : result.mixture.components) wsum += c.weight;
    for (auto& c : result.mixture.components) c.weight /= wsum;
  }
  return result;
}

GaussianMixture3 em_fit(std::span<const Vec3> points, int k, int iters, std::uint64_t seed) {
  return em_run(points, em_init(points, k, seed), iters).mixture;
}

}  // namespace gmshape

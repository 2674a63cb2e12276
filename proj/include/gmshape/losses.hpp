#pragma once

#include <span>
#include <utility>
#include <vector>

#include "gmshape/camera.hpp"
#include "gmshape/gaussian_mixture.hpp"
#include "gmshape/types.hpp"

namespace gmshape {

struct LossConfig {
  double t_dist = 0.85;         // radius of the component-center penalty
  long long q_points = 10000;   // Q in the pseudo soft silhouette
  int n_views = 4;              // views drawn per loss evaluation
  int sample_batch = 4096;      // 3D points per evaluation (0 = full batch)
  double w_3d = 1.0;
  double w_dist = 1.0;
  // the silhouette term sums over pixels, so its natural magnitude is ~W*H
  // times the other terms; the default keeps the three comparable
  double w_sil = 1e-3;
};

/// Loss values plus the exact gradient w.r.t. the raw 10K-vector.
struct LossReport {
  double total = 0.0;
  double l_3d = 0.0;
  double l_dist = 0.0;
  double l_sil = 0.0;
  VecX gradient;
};

/// Negative mean log density of the mixture over the sample points
/// (Monte-Carlo cross entropy against the target volume distribution).
std::pair<double, VecX> loss_3d(const MixtureParams& params, std::span<const Vec3> points);

/// (1/K) sum ReLU(|mu_i| - t)^2; keeps components within distance t of the
/// object center.
std::pair<double, VecX> loss_dist(const MixtureParams& params, double t);

/// Sum over views and pixels of (s_hat - s)^2, averaged over views. s_hat is
/// the pseudo soft silhouette of the para-perspective projection.
std::pair<double, VecX> loss_silhouette(const MixtureParams& params,
                                        const std::vector<ViewObservation>& views, long long q);

/// Weighted combination; zero-weight terms are skipped and reported as 0.
LossReport total_loss(const MixtureParams& params, std::span<const Vec3> points,
                      const std::vector<ViewObservation>& views, const LossConfig& config);

namespace detail {

/// d(a_pi) from d(weights) through the softmax map.
VecX chain_softmax(const std::vector<double>& weights, const VecX& grad_w);

}  // namespace detail

}  // namespace gmshape

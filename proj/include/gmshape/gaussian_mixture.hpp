#pragma once

#include <cstdint>
#include <vector>

#include "gmshape/types.hpp"

namespace gmshape {

/// Bounds applied to the diagonal of the precision factor when mapping raw
/// parameters to a mixture; keeps components from degenerating.
inline constexpr double kPrecisionDiagMin = 1e-6;
inline constexpr double kPrecisionDiagMax = 1e6;

/// One weighted anisotropic 3D Gaussian. The precision matrix (inverse
/// covariance) is stored through its Cholesky factor: precision = L * L^T
/// with L lower triangular and strictly positive diagonal.
struct GaussianComponent {
  double weight = 1.0;
  Vec3 mean = Vec3::Zero();
  Mat3 precision_factor = Mat3::Identity();

  Mat3 precision() const { return precision_factor * precision_factor.transpose(); }

  /// Covariance = (L L^T)^-1, via triangular solves (no explicit inversion).
  Mat3 covariance() const;

  /// log of the normalization constant times the weight is handled by
  /// callers; this is log((2*pi)^-3/2 |Sigma|^-1/2) = -3/2 log(2*pi) + sum log L_kk.
  double log_norm() const;
};

/// Shape representation: a convex combination of K 3D Gaussians.
struct GaussianMixture3 {
  std::vector<GaussianComponent> components;

  int size() const { return static_cast<int>(components.size()); }
};

/// Unconstrained mixture parameters, 10 scalars per component laid out as
/// [a_pi, a_mu(3), a_Ldiag(l11,l22,l33), a_Lsub(l21,l31,l32)].
struct MixtureParams {
  VecX raw;

  MixtureParams() = default;
  explicit MixtureParams(VecX values) : raw(std::move(values)) {}

  int component_count() const { return static_cast<int>(raw.size()) / 10; }

  static constexpr int kPerComponent = 10;
  static int index_weight(int i) { return 10 * i; }
  static int index_mean(int i) { return 10 * i + 1; }
  static int index_ldiag(int i) { return 10 * i + 4; }
  static int index_lsub(int i) { return 10 * i + 7; }
};

/// Total map from raw activations to a valid mixture: softmax over weights,
/// identity on means, exp (clamped) on the factor diagonal, identity on the
/// sub-diagonal.
GaussianMixture3 constrain(const MixtureParams& params);

/// Right inverse of constrain: constrain(unconstrain(m)) == m up to roundoff
/// (weights must sum to 1, diagonals within the clamp bounds).
MixtureParams unconstrain(const GaussianMixture3& m);

/// Mixture density sum_i pi_i phi(x | mu_i, Sigma_i), evaluated through the
/// precision factors.
double density(const GaussianMixture3& m, const Vec3& x);

/// log density via log-sum-exp; finite for any x.
double log_density(const GaussianMixture3& m, const Vec3& x);

/// E[f(X)] = integral of f^2 = sum_ij pi_i pi_j phi(mu_i | mu_j, Sigma_i + Sigma_j).
/// Approximates 1/V for a shape of volume V; basis of the isosurface threshold.
double expected_density(const GaussianMixture3& m);

struct MixtureMoments {
  Vec3 mean;
  Mat3 covariance;
};

/// Whole-mixture mean and covariance (law of total covariance).
MixtureMoments mixture_moments(const GaussianMixture3& m);

/// n i.i.d. draws; deterministic for a fixed seed.
PointList sample(const GaussianMixture3& m, int n, std::uint64_t seed);

/// Component from moment-space values (weight, mean, covariance).
GaussianComponent component_from_moments(double weight, const Vec3& mean, const Mat3& covariance);

/// Gaussian density value phi(a | b, cov_sum); shared by expected_density and
/// the L2 distance between mixtures.
double gaussian_overlap(const Vec3& a, const Vec3& b, const Mat3& cov_sum);

}  // namespace gmshape

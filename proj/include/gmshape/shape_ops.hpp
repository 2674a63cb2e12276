#pragma once

#include <vector>

#include "gmshape/gaussian_mixture.hpp"
#include "gmshape/types.hpp"

namespace gmshape {

/// Similarity transform x -> scale * rotation * x + translation.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double scale = 1.0;

  Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
  RigidTransform inverse() const;
};

/// Mixture of the transformed random variable: means mapped through the
/// transform, covariances by s^2 R Sigma R^T.
GaussianMixture3 transformed(const GaussianMixture3& m, const RigidTransform& t);

/// Closed-form integral of (f_a - f_b)^2 via pairwise Gaussian convolutions.
double l2_density_distance(const GaussianMixture3& a, const GaussianMixture3& b);

struct AlignCandidate {
  RigidTransform transform;
  double residual = 0.0;
};

struct AlignResult {
  RigidTransform transform;   // maps b onto a
  double residual = 0.0;      // L2 density distance between a and transform[b]
  bool ambiguous = false;     // near-degenerate eigenvalue spectrum
  std::vector<AlignCandidate> candidates;  // all four proper sign choices, best first
};

/// Relative pose by whole-mixture moment alignment: candidate rotations from
/// the covariance eigenbases (four proper sign combinations), disambiguated
/// by the closed-form L2 density residual.
AlignResult align(const GaussianMixture3& a, const GaussianMixture3& b, bool with_scale);

/// Level-of-detail by greedy moment-preserving pair merging, picking the pair
/// with the smallest KL-divergence upper bound until k_target remain.
GaussianMixture3 reduce(const GaussianMixture3& m, int k_target);

}  // namespace gmshape

#include "gmshape/shape_ops.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmshape {

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.scale = 1.0 / scale;
  inv.rotation = rotation.transpose();
  inv.translation = -inv.scale * (inv.rotation * translation);
  return inv;
}

GaussianMixture3 transformed(const GaussianMixture3& m, const RigidTransform& t) {
  GaussianMixture3 out;
  out.components.reserve(m.components.size());
  for (const GaussianComponent& c : m.components) {
    const Mat3 cov = t.scale * t.scale * t.rotation * c.covariance() * t.rotation.transpose();
    out.components.push_back(component_from_moments(c.weight, t.apply(c.mean), cov));
  }
  return out;
}

double l2_density_distance(const GaussianMixture3& a, const GaussianMixture3& b) {
  auto covs = [](const GaussianMixture3& m) {
    std::vector<Mat3> c(m.size());
    for (int i = 0; i < m.size(); ++i) c[i] = m.components[i].covariance();
    return c;
  };
  const std::vector<Mat3> cov_a = covs(a);
  const std::vector<Mat3> cov_b = covs(b);

  auto cross = [](const GaussianMixture3& x, const std::vector<Mat3>& cx,
                  const GaussianMixture3& y, const std::vector<Mat3>& cy) {
    double acc = 0.0;
    for (int i = 0; i < x.size(); ++i)
      for (int j = 0; j < y.size(); ++j)
        acc += x.components[i].weight * y.components[j].weight *
               gaussian_overlap(x.components[i].mean, y.components[j].mean, cx[i] + cy[j]);
    return acc;
  };
  const double dist = cross(a, cov_a, a, cov_a) + cross(b, cov_b, b, cov_b) -
                      2.0 * cross(a, cov_a, b, cov_b);
  return std::max(0.0, dist);  // guards cancellation noise for identical inputs
}

namespace {

// Eigenvectors sorted by descending eigenvalue; ties broken lexicographically
// on the eigenvector entries, signs fixed so the largest-|entry| coordinate
// is positive, for a deterministic basis.
void sorted_eigenbasis(const Mat3& cov, Vec3& eigenvalues, Mat3& basis) {
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  if (eig.info() != Eigen::Success) throw std::runtime_error("align: eigendecomposition failed");

  std::array<int, 3> order = {0, 1, 2};
  const Vec3 vals = eig.eigenvalues();
  const Mat3 vecs = eig.eigenvectors();
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    if (vals[x] != vals[y]) return vals[x] > vals[y];
    for (int r = 0; r < 3; ++r)
      if (vecs(r, x) != vecs(r, y)) return vecs(r, x) < vecs(r, y);
    return false;
  });
  for (int c = 0; c < 3; ++c) {
    eigenvalues[c] = vals[order[c]];
    Vec3 v = vecs.col(order[c]);
    int arg_max = 0;
    for (int r = 1; r < 3; ++r)
      if (std::abs(v[r]) > std::abs(v[arg_max])) arg_max = r;
    if (v[arg_max] < 0.0) v = -v;
    basis.col(c) = v;
  }
}

}  // namespace

AlignResult align(const GaussianMixture3& a, const GaussianMixture3& b, bool with_scale) {
  const MixtureMoments mom_a = mixture_moments(a);
  const MixtureMoments mom_b = mixture_moments(b);

  Vec3 eval_a, eval_b;
  Mat3 basis_a, basis_b;
  sorted_eigenbasis(mom_a.covariance, eval_a, basis_a);
  sorted_eigenbasis(mom_b.covariance, eval_b, basis_b);

  constexpr double kGap = 1e-9;
  const bool ambiguous = (eval_a[0] - eval_a[1] < kGap) || (eval_a[1] - eval_a[2] < kGap) ||
                         (eval_b[0] - eval_b[1] < kGap) || (eval_b[1] - eval_b[2] < kGap);

  const double scale =
      with_scale ? std::sqrt(mom_a.covariance.trace() / mom_b.covariance.trace()) : 1.0;

  AlignResult result;
  result.ambiguous = ambiguous;
  result.residual = std::numeric_limits<double>::infinity();

  // Four proper sign matrices; pick the set keeping det(R) = +1.
  const double base_det = basis_a.determinant() * basis_b.determinant();
  for (int sx = -1; sx <= 1; sx += 2)
    for (int sy = -1; sy <= 1; sy += 2)
      for (int sz = -1; sz <= 1; sz += 2) {
        if (base_det * sx * sy * sz < 0.0) continue;
        const Vec3 signs(sx, sy, sz);
        const Mat3 rot = basis_a * signs.asDiagonal() * basis_b.transpose();

        AlignCandidate cand;
        cand.transform.rotation = rot;
        cand.transform.scale = scale;
        cand.transform.translation = mom_a.mean - scale * (rot * mom_b.mean);
        cand.residual = l2_density_distance(a, transformed(b, cand.transform));
        result.candidates.push_back(cand);
      }

  std::sort(result.candidates.begin(), result.candidates.end(),
            [](const AlignCandidate& x, const AlignCandidate& y) { return x.residual < y.residual; });
  result.transform = result.candidates.front().transform;
  result.residual = result.candidates.front().residual;
  return result;
}

GaussianMixture3 reduce(const GaussianMixture3& m, int k_target) {
  const int k = m.size();
  if (k_target < 1 || k_target > k)
    throw std::invalid_argument("reduce: k_target must be in [1, K]");
  if (k_target == k) return m;

  struct Moment {
    double w;
    Vec3 mean;
    Mat3 cov;
    double half_log_det;  // 0.5 * w * log det cov, cached for the bound
  };
  auto half_log_det = [](double w, const Mat3& cov) {
    const Eigen::LLT<Mat3> llt(cov);
    const Mat3 l = llt.matrixL();
    return w * (std::log(l(0, 0)) + std::log(l(1, 1)) + std::log(l(2, 2)));
  };

  std::vector<Moment> comps;
  comps.reserve(k);
  for (const GaussianComponent& c : m.components) {
    const Mat3 cov = c.covariance();
    comps.push_back({c.weight, c.mean, cov, half_log_det(c.weight, cov)});
  }

  auto merged_moments = [](const Moment& x, const Moment& y) {
    Moment out;
    out.w = x.w + y.w;
    out.mean = (x.w * x.mean + y.w * y.mean) / out.w;
    out.cov = (x.w * (x.cov + x.mean * x.mean.transpose()) +
               y.w * (y.cov + y.mean * y.mean.transpose())) /
                  out.w -
              out.mean * out.mean.transpose();
    out.cov = 0.5 * (out.cov + out.cov.transpose());
    return out;
  };

  // Runnalls' upper bound on the KL cost of merging i and j.
  auto bound = [&](const Moment& x, const Moment& y) {
    Moment merged = merged_moments(x, y);
    return half_log_det(merged.w, merged.cov) - x.half_log_det - y.half_log_det;
  };

  const int n0 = k;
  std::vector<bool> alive(n0, true);
  // pairwise bound matrix, refreshed only on rows/columns touched by a merge
  std::vector<double> bounds(static_cast<std::size_t>(n0) * n0,
                             std::numeric_limits<double>::infinity());
  auto bslot = [&](int i, int j) -> double& {
    return bounds[static_cast<std::size_t>(std::min(i, j)) * n0 + std::max(i, j)];
  };
  for (int i = 0; i < n0; ++i)
    for (int j = i + 1; j < n0; ++j) bslot(i, j) = bound(comps[i], comps[j]);

  int remaining = k;
  while (remaining > k_target) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (int i = 0; i < n0; ++i) {
      if (!alive[i]) continue;
      for (int j = i + 1; j < n0; ++j) {
        if (!alive[j]) continue;
        if (bslot(i, j) < best) {
          best = bslot(i, j);
          bi = i;
          bj = j;
        }
      }
    }
    Moment merged = merged_moments(comps[bi], comps[bj]);
    merged.half_log_det = half_log_det(merged.w, merged.cov);
    comps[bi] = merged;
    alive[bj] = false;
    --remaining;
    for (int i = 0; i < n0; ++i)
      if (alive[i] && i != bi) bslot(i, bi) = bound(comps[i], comps[bi]);
  }

  GaussianMixture3 out;
  out.components.reserve(k_target);
  for (int i = 0; i < n0; ++i)
    if (alive[i]) out.components.push_back(component_from_moments(comps[i].w, comps[i].mean, comps[i].cov));
  return out;
}

}  // namespace gmshape

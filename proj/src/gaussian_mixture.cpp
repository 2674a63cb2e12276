#include "gmshape/gaussian_mixture.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "gmshape/detail/rng.hpp"

namespace gmshape {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)
}

Mat3 GaussianComponent::covariance() const {
  // Sigma = L^-T L^-1
  const Mat3 inv_l = precision_factor.triangularView<Eigen::Lower>().solve(Mat3::Identity());
  return inv_l.transpose() * inv_l;
}

double GaussianComponent::log_norm() const {
  return -1.5 * kLog2Pi + std::log(precision_factor(0, 0)) +
         std::log(precision_factor(1, 1)) + std::log(precision_factor(2, 2));
}

GaussianMixture3 constrain(const MixtureParams& params) {
  const int k = params.component_count();
  if (k < 1 || params.raw.size() != 10 * k)
    throw std::invalid_argument("constrain: raw parameter vector must hold 10 scalars per component");

  GaussianMixture3 m;
  m.components.resize(k);

  // softmax over the weight activations, stabilized by the max
  double a_max = params.raw[MixtureParams::index_weight(0)];
  for (int i = 1; i < k; ++i) a_max = std::max(a_max, params.raw[MixtureParams::index_weight(i)]);
  double z = 0.0;
  for (int i = 0; i < k; ++i) z += std::exp(params.raw[MixtureParams::index_weight(i)] - a_max);

  for (int i = 0; i < k; ++i) {
    GaussianComponent& c = m.components[i];
    c.weight = std::exp(params.raw[MixtureParams::index_weight(i)] - a_max) / z;
    c.mean = params.raw.segment<3>(MixtureParams::index_mean(i));

    Mat3 l = Mat3::Zero();
    for (int d = 0; d < 3; ++d) {
      const double v = std::exp(params.raw[MixtureParams::index_ldiag(i) + d]);
      l(d, d) = std::clamp(v, kPrecisionDiagMin, kPrecisionDiagMax);
    }
    l(1, 0) = params.raw[MixtureParams::index_lsub(i) + 0];
    l(2, 0) = params.raw[MixtureParams::index_lsub(i) + 1];
    l(2, 1) = params.raw[MixtureParams::index_lsub(i) + 2];
    c.precision_factor = l;
  }
  return m;
}

MixtureParams unconstrain(const GaussianMixture3& m) {
  const int k = m.size();
  VecX raw(10 * k);
  for (int i = 0; i < k; ++i) {
    const GaussianComponent& c = m.components[i];
    raw[MixtureParams::index_weight(i)] = std::log(c.weight);
    raw.segment<3>(MixtureParams::index_mean(i)) = c.mean;
    for (int d = 0; d < 3; ++d)
      raw[MixtureParams::index_ldiag(i) + d] = std::log(c.precision_factor(d, d));
    raw[MixtureParams::index_lsub(i) + 0] = c.precision_factor(1, 0);
    raw[MixtureParams::index_lsub(i) + 1] = c.precision_factor(2, 0);
    raw[MixtureParams::index_lsub(i) + 2] = c.precision_factor(2, 1);
  }
  return MixtureParams{std::move(raw)};
}

namespace {

inline double component_log_density(const GaussianComponent& c, const Vec3& x) {
  const Vec3 y = c.precision_factor.transpose() * (x - c.mean);
  return c.log_norm() - 0.5 * y.squaredNorm();
}

}  // namespace

double density(const GaussianMixture3& m, const Vec3& x) {
  double f = 0.0;
  for (const GaussianComponent& c : m.components)
    f += c.weight * std::exp(component_log_density(c, x));
  return f;
}

double log_density(const GaussianMixture3& m, const Vec3& x) {
  const int k = m.size();
  double max_term = -std::numeric_limits<double>::infinity();
  VecX terms(k);
  for (int i = 0; i < k; ++i) {
    const GaussianComponent& c = m.components[i];
    terms[i] = std::log(c.weight) + component_log_density(c, x);
    max_term = std::max(max_term, terms[i]);
  }
  if (!std::isfinite(max_term)) return max_term;
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += std::exp(terms[i] - max_term);
  return max_term + std::log(acc);
}

double gaussian_overlap(const Vec3& a, const Vec3& b, const Mat3& cov_sum) {
  const Eigen::LLT<Mat3> llt(cov_sum);
  const Mat3 l = llt.matrixL();
  const Vec3 y = l.triangularView<Eigen::Lower>().solve(a - b);
  const double log_det_half = std::log(l(0, 0)) + std::log(l(1, 1)) + std::log(l(2, 2));
  return std::exp(-1.5 * kLog2Pi - log_det_half - 0.5 * y.squaredNorm());
}

double expected_density(const GaussianMixture3& m) {
  const int k = m.size();
  std::vector<Mat3> cov(k);
  for (int i = 0; i < k; ++i) cov[i] = m.components[i].covariance();

  double e = 0.0;
  for (int i = 0; i < k; ++i) {
    e += m.components[i].weight * m.components[i].weight *
         gaussian_overlap(m.components[i].mean, m.components[i].mean, cov[i] + cov[i]);
    for (int j = i + 1; j < k; ++j) {
      const double pair = gaussian_overlap(m.components[i].mean, m.components[j].mean, cov[i] + cov[j]);
      e += 2.0 * m.components[i].weight * m.components[j].weight * pair;
    }
  }
  return e;
}

MixtureMoments mixture_moments(const GaussianMixture3& m) {
  Vec3 mean = Vec3::Zero();
  for (const GaussianComponent& c : m.components) mean += c.weight * c.mean;
  Mat3 cov = Mat3::Zero();
  for (const GaussianComponent& c : m.components)
    cov += c.weight * (c.covariance() + c.mean * c.mean.transpose());
  cov -= mean * mean.transpose();
  return {mean, 0.5 * (cov + cov.transpose())};
}

PointList sample(const GaussianMixture3& m, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  const int k = m.size();
  std::vector<double> cumulative(k);
  double acc = 0.0;
  for (int i = 0; i < k; ++i) {
    acc += m.components[i].weight;
    cumulative[i] = acc;
  }

  Rng rng(seed);
  PointList points(n);
  for (int s = 0; s < n; ++s) {
    const double u = rng.uniform() * acc;
    int i = static_cast<int>(std::lower_bound(cumulative.begin(), cumulative.end(), u) -
                             cumulative.begin());
    if (i >= k) i = k - 1;
    const GaussianComponent& c = m.components[i];
    // Sigma = L^-T L^-1, so x = mu + L^-T z has covariance Sigma.
    const Vec3 z = rng.normal3();
    points[s] = c.mean + c.precision_factor.transpose().triangularView<Eigen::Upper>().solve(z);
  }
  return points;
}

GaussianComponent component_from_moments(double weight, const Vec3& mean, const Mat3& covariance) {
  const Eigen::LLT<Mat3> llt(covariance);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("component_from_moments: covariance is not positive definite");
  const Mat3 inv_l = Mat3(llt.matrixL()).triangularView<Eigen::Lower>().solve(Mat3::Identity());
  // precision = cov^-1 = L^-T L^-1; its lower Cholesky factor is found by a
  // fresh factorization to keep the stored factor lower triangular.
  const Mat3 precision = inv_l.transpose() * inv_l;
  const Eigen::LLT<Mat3> pllt(0.5 * (precision + precision.transpose()));
  GaussianComponent c;
  c.weight = weight;
  c.mean = mean;
  c.precision_factor = pllt.matrixL();
  return c;
}

}  // namespace gmshape

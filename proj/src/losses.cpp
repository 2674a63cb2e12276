#include "gmshape/losses.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gmshape/detail/parallel.hpp"

namespace gmshape {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

// Gradient of the diagonal activation map l_kk = clamp(exp(a), lo, hi): the
// factor is l_kk inside the bounds, 0 where the clamp is active.
inline double diag_chain(double raw_a, double l_kk) {
  const double e = std::exp(raw_a);
  if (e <= kPrecisionDiagMin || e >= kPrecisionDiagMax) return 0.0;
  return l_kk;
}

// Folds per-component gradients in constrained space (d/d pi, d/d mu, d/d L)
// into the raw parameter layout.
VecX assemble_raw_gradient(const MixtureParams& params, const GaussianMixture3& m,
                           const VecX& g_pi, const std::vector<Vec3>& g_mu,
                           const std::vector<Mat3>& g_l) {
  const int k = m.size();
  std::vector<double> weights(k);
  for (int i = 0; i < k; ++i) weights[i] = m.components[i].weight;
  const VecX g_api = detail::chain_softmax(weights, g_pi);

  VecX grad = VecX::Zero(10 * k);
  for (int i = 0; i < k; ++i) {
    grad[MixtureParams::index_weight(i)] = g_api[i];
    grad.segment<3>(MixtureParams::index_mean(i)) = g_mu[i];
    const Mat3& l = m.components[i].precision_factor;
    for (int d = 0; d < 3; ++d)
      grad[MixtureParams::index_ldiag(i) + d] =
          g_l[i](d, d) * diag_chain(params.raw[MixtureParams::index_ldiag(i) + d], l(d, d));
    grad[MixtureParams::index_lsub(i) + 0] = g_l[i](1, 0);
    grad[MixtureParams::index_lsub(i) + 1] = g_l[i](2, 0);
    grad[MixtureParams::index_lsub(i) + 2] = g_l[i](2, 1);
  }
  return grad;
}

}  // namespace

namespace detail {

VecX chain_softmax(const std::vector<double>& weights, const VecX& grad_w) {
  const int k = static_cast<int>(weights.size());
  double dot = 0.0;
  for (int i = 0; i < k; ++i) dot += weights[i] * grad_w[i];
  VecX g(k);
  for (int i = 0; i < k; ++i) g[i] = weights[i] * (grad_w[i] - dot);
  return g;
}



}  // namespace detail

std::pair<double, VecX> loss_3d(const MixtureParams& params, std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("loss_3d: point set is empty");
  const GaussianMixture3 m = constrain(params);
  const int k = m.size();

  struct Comp {
    Vec3 mean;
    Mat3 l;
    double log_w;
    double log_norm;
  };
  std::vector<Comp> comps(k);
  for (int i = 0; i < k; ++i) {
    const GaussianComponent& c = m.components[i];
    comps[i] = {c.mean, c.precision_factor, std::log(c.weight), c.log_norm()};
  }

  struct Acc {
    double value = 0.0;
    VecX g_pi;
    std::vector<Vec3> g_mu;
    std::vector<Mat3> g_l;

    Acc& operator+=(const Acc& o) {
      value += o.value;
      g_pi += o.g_pi;
      for (std::size_t i = 0; i < g_mu.size(); ++i) {
        g_mu[i] += o.g_mu[i];
        g_l[i] += o.g_l[i];
      }
      return *this;
    }
  };
  Acc zero;
  zero.g_pi = VecX::Zero(k);
  zero.g_mu.assign(k, Vec3::Zero());
  zero.g_l.assign(k, Mat3::Zero());

  const Acc total = parallel_reduce<Acc>(points.size(), zero, [&](std::size_t b, std::size_t e) {
    Acc acc;
    acc.g_pi = VecX::Zero(k);
    acc.g_mu.assign(k, Vec3::Zero());
    acc.g_l.assign(k, Mat3::Zero());
    VecX terms(k);
    std::vector<Vec3> diff(k), y(k);
    for (std::size_t p = b; p < e; ++p) {
      const Vec3& x = points[p];
      double max_term = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < k; ++i) {
        diff[i] = x - comps[i].mean;
        y[i] = comps[i].l.transpose() * diff[i];
        terms[i] = comps[i].log_w + comps[i].log_norm - 0.5 * y[i].squaredNorm();
        max_term = std::max(max_term, terms[i]);
      }
      double z = 0.0;
      for (int i = 0; i < k; ++i) z += std::exp(terms[i] - max_term);
      const double log_f = max_term + std::log(z);
      acc.value -= log_f;

      for (int i = 0; i < k; ++i) {
        const double resp = std::exp(terms[i] - log_f);           // pi_i phi_i / f
        const double phi_over_f = std::exp(terms[i] - comps[i].log_w - log_f);
        acc.g_pi[i] -= phi_over_f;
        acc.g_mu[i] -= resp * (comps[i].l * y[i]);                // P (x - mu)
        Mat3 gl = -diff[i] * y[i].transpose();                    // d log phi / d L, lower part
        gl.diagonal().array() += Eigen::Array3d(1.0 / comps[i].l(0, 0), 1.0 / comps[i].l(1, 1),
                                                1.0 / comps[i].l(2, 2));
        acc.g_l[i] -= resp * gl;
      }
    }
    return acc;
  });

  const double inv_n = 1.0 / static_cast<double>(points.size());
  VecX g_pi = inv_n * total.g_pi;
  std::vector<Vec3> g_mu(k);
  std::vector<Mat3> g_l(k);
  for (int i = 0; i < k; ++i) {
    g_mu[i] = inv_n * total.g_mu[i];
    g_l[i] = inv_n * total.g_l[i];
  }
  return {inv_n * total.value, assemble_raw_gradient(params, m, g_pi, g_mu, g_l)};
}

std::pair<double, VecX> loss_dist(const MixtureParams& params, double t) {
  if (t <= 0.0) throw std::invalid_argument("loss_dist: t must be positive");
  const GaussianMixture3 m = constrain(params);
  const int k = m.size();

  double value = 0.0;
  VecX grad = VecX::Zero(10 * k);
  for (int i = 0; i < k; ++i) {
    const double norm = m.components[i].mean.norm();
    const double excess = norm - t;
    if (excess > 0.0) {
      value += excess * excess;
      grad.segment<3>(MixtureParams::index_mean(i)) =
          (2.0 / k) * excess * m.components[i].mean / norm;
    }
  }
  return {value / k, std::move(grad)};
}

std::pair<double, VecX> loss_silhouette(const MixtureParams& params,
                                        const std::vector<ViewObservation>& views, long long q) {
  if (q < 1) throw std::invalid_argument("loss_silhouette: q must be >= 1");
  if (views.empty()) throw std::invalid_argument("loss_silhouette: no views given");

  const GaussianMixture3 m = constrain(params);
  const int k = m.size();
  std::vector<Mat3> cov_world(k);
  for (int i = 0; i < k; ++i) cov_world[i] = m.components[i].covariance();

  const double qd = static_cast<double>(q);
  const double inv_views = 1.0 / static_cast<double>(views.size());

  double value = 0.0;
  VecX g_pi = VecX::Zero(k);
  std::vector<Vec3> g_mu(k, Vec3::Zero());
  std::vector<Mat3> g_cov(k, Mat3::Zero());  // w.r.t. world covariance

  for (const ViewObservation& view : views) {
    const Camera& cam = view.camera;
    if (view.silhouette.width != cam.width || view.silhouette.height != cam.height)
      throw std::invalid_argument("loss_silhouette: silhouette size does not match its camera");
    const int w = cam.width;
    const int h = cam.height;
    const std::size_t n_px = static_cast<std::size_t>(w) * h;

    // Per-component projection with everything the backward pass needs.
    struct Proj {
      Vec3 mu_c;
      Mat3 cov_c;
      Mat23 jac;
      Vec2 mean2;
      Mat2 inv_cov2;
      double norm2;  // 1 / (2 pi sqrt(det))
    };
    std::vector<Proj> projs(k);
    for (int i = 0; i < k; ++i) {
      const GaussianComponent& c = m.components[i];
      Proj& pr = projs[i];
      pr.mu_c = cam.to_camera(c.mean);
      if (pr.mu_c.z() <= 1e-6)
        throw std::runtime_error("loss_silhouette: component " + std::to_string(i) +
                                 " has non-positive camera depth");
      const double inv_z = 1.0 / pr.mu_c.z();
      pr.jac << 1.0, 0.0, -pr.mu_c.x() * inv_z,
                0.0, 1.0, -pr.mu_c.y() * inv_z;
      pr.jac *= cam.focal_px * inv_z;
      pr.cov_c = cam.rotation * cov_world[i] * cam.rotation.transpose();
      const Mat2 cov2 = pr.jac * pr.cov_c * pr.jac.transpose();
      const double det = cov2.determinant();
      if (det <= 0.0)
        throw std::runtime_error("loss_silhouette: projected covariance not positive definite");
      pr.mean2 = cam.focal_px * Vec2(pr.mu_c.x() * inv_z, pr.mu_c.y() * inv_z) + cam.principal_point;
      pr.inv_cov2 << cov2(1, 1), -cov2(0, 1), -cov2(1, 0), cov2(0, 0);
      pr.inv_cov2 /= det;
      pr.norm2 = 1.0 / (2.0 * M_PI * std::sqrt(det));
    }

    // Forward: cache phi per component per pixel, accumulate d.
    std::vector<double> phi(static_cast<std::size_t>(k) * n_px);
    std::vector<double> d(n_px, 0.0);
    parallel_for(static_cast<std::size_t>(h), [&](std::size_t y0, std::size_t y1) {
      for (std::size_t y = y0; y < y1; ++y)
        for (int x = 0; x < w; ++x) {
          const Vec2 p(x + 0.5, y + 0.5);
          const std::size_t px = y * w + x;
          double acc = 0.0;
          for (int i = 0; i < k; ++i) {
            const Vec2 delta = p - projs[i].mean2;
            const double v = projs[i].norm2 * std::exp(-0.5 * delta.dot(projs[i].inv_cov2 * delta));
            phi[static_cast<std::size_t>(i) * n_px + px] = v;
            acc += m.components[i].weight * v;
          }
          d[px] = acc;
        }
    });

    // Residuals and the upstream derivative d loss / d d(x).
    std::vector<double> up(n_px);
    double view_value = 0.0;
    for (std::size_t px = 0; px < n_px; ++px) {
      const double dc = std::min(d[px], 1.0);
      const double one_minus = 1.0 - dc;
      const double s_hat = 1.0 - std::pow(one_minus, qd);
      const double r = s_hat - view.silhouette.values[px];
      view_value += r * r;
      const double ds_dd = (d[px] < 1.0) ? qd * std::pow(one_minus, qd - 1.0) : 0.0;
      up[px] = 2.0 * r * ds_dd * inv_views;
    }
    value += view_value * inv_views;

    // Backward per component.
    for (int i = 0; i < k; ++i) {
      const Proj& pr = projs[i];
      const double weight = m.components[i].weight;
      double gp = 0.0;
      Vec2 gm2 = Vec2::Zero();
      Mat2 gs2 = Mat2::Zero();
      const double* phi_i = phi.data() + static_cast<std::size_t>(i) * n_px;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const std::size_t px = static_cast<std::size_t>(y) * w + x;
          const double u = up[px];
          if (u == 0.0) continue;
          const double f = phi_i[px];
          const Vec2 delta = Vec2(x + 0.5, y + 0.5) - pr.mean2;
          const Vec2 ad = pr.inv_cov2 * delta;
          gp += u * f;
          gm2 += (u * weight * f) * ad;
          gs2 += (0.5 * u * weight * f) * (ad * ad.transpose() - pr.inv_cov2);
        }

      g_pi[i] += gp;

      // Through Sigma' = J Sigma_c J^T and mu' = project(mu_c).
      const Mat3 g_cov_c = pr.jac.transpose() * gs2 * pr.jac;
      Vec3 g_mu_c = pr.jac.transpose() * gm2;

      const double z = pr.mu_c.z();
      const double inv_z = 1.0 / z;
      const double f_px = view.camera.focal_px;
      // dJ/d mu_c, one 2x3 slice per camera coordinate
      Mat23 dj[3];
      dj[0] << 0, 0, -f_px * inv_z * inv_z, 0, 0, 0;
      dj[1] << 0, 0, 0, 0, 0, -f_px * inv_z * inv_z;
      dj[2] << -f_px * inv_z * inv_z, 0, 2.0 * f_px * pr.mu_c.x() * inv_z * inv_z * inv_z,
               0, -f_px * inv_z * inv_z, 2.0 * f_px * pr.mu_c.y() * inv_z * inv_z * inv_z;
      for (int a = 0; a < 3; ++a) {
        const Mat2 dcov2 = dj[a] * pr.cov_c * pr.jac.transpose();
        g_mu_c[a] += 2.0 * (gs2.array() * dcov2.array()).sum();
      }

      g_mu[i] += cam.rotation.transpose() * g_mu_c;
      g_cov[i] += cam.rotation.transpose() * g_cov_c * cam.rotation;
    }
  }

  // Chain world covariance -> precision factor: Sigma = (L L^T)^-1.
  std::vector<Mat3> g_l(k);
  for (int i = 0; i < k; ++i) {
    const Mat3 g_cov_sym = 0.5 * (g_cov[i] + g_cov[i].transpose());
    const Mat3 g_prec = -cov_world[i] * g_cov_sym * cov_world[i];
    Mat3 gl = (g_prec + g_prec.transpose()) * m.components[i].precision_factor;
    gl = gl.triangularView<Eigen::Lower>();
    g_l[i] = gl;
  }
  return {value, assemble_raw_gradient(params, m, g_pi, g_mu, g_l)};
}

LossReport total_loss(const MixtureParams& params, std::span<const Vec3> points,
                      const std::vector<ViewObservation>& views, const LossConfig& config) {
  if (config.w_3d < 0 || config.w_dist < 0 || config.w_sil < 0)
    throw std::invalid_argument("total_loss: loss weights must be non-negative");

  LossReport report;
  report.gradient = VecX::Zero(params.raw.size());

  if (config.w_3d > 0.0) {
    auto [v, g] = loss_3d(params, points);
    report.l_3d = v;
    report.gradient += config.w_3d * g;
  }
  if (config.w_dist > 0.0) {
    auto [v, g] = loss_dist(params, config.t_dist);
    report.l_dist = v;
    report.gradient += config.w_dist * g;
  }
  if (config.w_sil > 0.0) {
    auto [v, g] = loss_silhouette(params, views, config.q_points);
    report.l_sil = v;
    report.gradient += config.w_sil * g;
  }
  report.total = config.w_3d * report.l_3d + config.w_dist * report.l_dist +
                 config.w_sil * report.l_sil;
  return report;
}

}  // namespace gmshape

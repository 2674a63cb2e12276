#include "gmshape/camera.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "gmshape/detail/parallel.hpp"
#include "gmshape/detail/rng.hpp"

namespace gmshape {

Camera Camera::look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                       double focal_px, const Vec2& principal_point, int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-6) right = forward.cross(Vec3(1.0, 0.0, 0.0));
  right.normalize();
  const Vec3 down = forward.cross(right);  // y axis points down in the image

  Camera cam;
  cam.rotation.row(0) = right;
  cam.rotation.row(1) = down;
  cam.rotation.row(2) = forward;
  cam.translation = -cam.rotation * eye;
  cam.focal_px = focal_px;
  cam.principal_point = principal_point;
  cam.width = width;
  cam.height = height;
  return cam;
}

double focal_from_fov(double fov_deg, int width) {
  const double half = 0.5 * fov_deg * M_PI / 180.0;
  return 0.5 * width / std::tan(half);
}

Camera make_protocol_camera(const Vec3& eye, const Vec3& target) {
  constexpr int kRes = 128;
  const double f = focal_from_fov(68.0, kRes);
  return Camera::look_at(eye, target, Vec3(0.0, 1.0, 0.0), f,
                         Vec2(0.5 * kRes, 0.5 * kRes), kRes, kRes);
}

PointList icosphere_vertices(int subdivisions) {
  return icosphere_mesh(subdivisions).vertices;
}

std::vector<Camera> icosphere_viewpoints(int subdivisions, int count, std::uint64_t seed,
                                         double distance) {
  const PointList verts = icosphere_vertices(subdivisions);
  if (count > static_cast<int>(verts.size()))
    throw std::invalid_argument("icosphere_viewpoints: count " + std::to_string(count) +
                                " exceeds " + std::to_string(verts.size()) + " vertices");
  Rng rng(seed);
  const std::vector<int> chosen = rng.sample_without_replacement(static_cast<int>(verts.size()), count);

  std::vector<Camera> cams;
  cams.reserve(count);
  for (int idx : chosen)
    cams.push_back(make_protocol_camera(distance * verts[idx]));
  return cams;
}

GaussianMixture2 paraperspective_project(const GaussianMixture3& m, const Camera& cam) {
  GaussianMixture2 out;
  out.components.resize(m.size());
  for (int i = 0; i < m.size(); ++i) {
    const GaussianComponent& c = m.components[i];
    const Vec3 mu_c = cam.to_camera(c.mean);
    if (mu_c.z() <= 1e-6)
      throw std::runtime_error("paraperspective_project: component " + std::to_string(i) +
                               " has non-positive camera depth " + std::to_string(mu_c.z()));
    const double inv_z = 1.0 / mu_c.z();
    Mat23 jac;
    jac << 1.0, 0.0, -mu_c.x() * inv_z,
           0.0, 1.0, -mu_c.y() * inv_z;
    jac *= cam.focal_px * inv_z;

    const Mat3 cov_c = cam.rotation * c.covariance() * cam.rotation.transpose();
    Gaussian2& g = out.components[i];
    g.weight = c.weight;
    g.mean = cam.focal_px * Vec2(mu_c.x() * inv_z, mu_c.y() * inv_z) + cam.principal_point;
    g.covariance = jac * cov_c * jac.transpose();
  }
  return out;
}

namespace detail {

std::vector<double> density_image(const GaussianMixture2& m2, int width, int height) {
  struct Eval {
    Vec2 mean;
    Mat2 inv_cov;
    double norm;    // 1 / (2 pi sqrt(det)); the weight is applied separately
    double weight;  // so this path matches the silhouette loss bit for bit
  };
  std::vector<Eval> evals(m2.size());
  for (int i = 0; i < m2.size(); ++i) {
    const Gaussian2& g = m2.components[i];
    const double det = g.covariance.determinant();
    if (det <= 0.0)
      throw std::runtime_error("density_image: projected covariance not positive definite");
    Mat2 inv;
    inv << g.covariance(1, 1), -g.covariance(0, 1),
           -g.covariance(1, 0), g.covariance(0, 0);
    inv /= det;
    evals[i] = {g.mean, inv, 1.0 / (2.0 * M_PI * std::sqrt(det)), g.weight};
  }

  std::vector<double> d(static_cast<std::size_t>(width) * height, 0.0);
  parallel_for(static_cast<std::size_t>(height), [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y)
      for (int x = 0; x < width; ++x) {
        const Vec2 p(x + 0.5, y + 0.5);
        double acc = 0.0;
        for (const Eval& e : evals) {
          const Vec2 delta = p - e.mean;
          acc += e.weight * (e.norm * std::exp(-0.5 * delta.dot(e.inv_cov * delta)));
        }
        d[y * width + x] = acc;
      }
  });
  return d;
}

}  // namespace detail

SilhouetteImage soft_silhouette(const GaussianMixture2& m2, long long q, const Camera& cam) {
  if (q < 1) throw std::invalid_argument("soft_silhouette: q must be >= 1");

  const std::vector<double> d = detail::density_image(m2, cam.width, cam.height);
  SilhouetteImage img(cam.width, cam.height);
  const double qd = static_cast<double>(q);
  for (std::size_t i = 0; i < d.size(); ++i)
    img.values[i] = 1.0 - std::pow(1.0 - std::min(d[i], 1.0), qd);
  return img;
}

SilhouetteImage rasterize_mesh_silhouette(const TriangleMesh& mesh, const Camera& cam) {
  if (mesh.empty()) throw std::invalid_argument("rasterize_mesh_silhouette: empty mesh");

  SilhouetteImage img(cam.width, cam.height);
  struct ScreenTri {
    Vec2 a, b, c;
  };
  std::vector<ScreenTri> tris;
  tris.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    const Vec3 a = cam.to_camera(mesh.vertices[t[0]]);
    const Vec3 b = cam.to_camera(mesh.vertices[t[1]]);
    const Vec3 c = cam.to_camera(mesh.vertices[t[2]]);
    if (a.z() <= 1e-9 || b.z() <= 1e-9 || c.z() <= 1e-9) continue;  // behind the camera
    auto to_px = [&](const Vec3& v) {
      return Vec2(cam.focal_px * v.x() / v.z() + cam.principal_point.x(),
                  cam.focal_px * v.y() / v.z() + cam.principal_point.y());
    };
    tris.push_back({to_px(a), to_px(b), to_px(c)});
  }

  auto edge = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };

  for (const ScreenTri& t : tris) {
    const double x_lo = std::min({t.a.x(), t.b.x(), t.c.x()});
    const double x_hi = std::max({t.a.x(), t.b.x(), t.c.x()});
    const double y_lo = std::min({t.a.y(), t.b.y(), t.c.y()});
    const double y_hi = std::max({t.a.y(), t.b.y(), t.c.y()});
    const int ix0 = std::max(0, static_cast<int>(std::floor(x_lo - 0.5)));
    const int ix1 = std::min(cam.width - 1, static_cast<int>(std::ceil(x_hi - 0.5)));
    const int iy0 = std::max(0, static_cast<int>(std::floor(y_lo - 0.5)));
    const int iy1 = std::min(cam.height - 1, static_cast<int>(std::ceil(y_hi - 0.5)));
    for (int y = iy0; y <= iy1; ++y) {
      for (int x = ix0; x <= ix1; ++x) {
        if (img.at(x, y) > 0.5) continue;
        const Vec2 p(x + 0.5, y + 0.5);
        const double e0 = edge(t.a, t.b, p);
        const double e1 = edge(t.b, t.c, p);
        const double e2 = edge(t.c, t.a, p);
        if ((e0 >= 0 && e1 >= 0 && e2 >= 0) || (e0 <= 0 && e1 <= 0 && e2 <= 0))
          img.at(x, y) = 1.0;
      }
    }
  }
  return img;
}

}  // namespace gmshape

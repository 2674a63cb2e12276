#pragma once

#include <cstdint>
#include <vector>

#include "gmshape/gaussian_mixture.hpp"
#include "gmshape/mesh.hpp"
#include "gmshape/types.hpp"

namespace gmshape {

/// Pinhole camera. `rotation` maps world to camera coordinates (x right,
/// y down, z forward); a world point projects to pixel
/// focal_px * (x_c/z_c, y_c/z_c) + principal_point. Pixel (i, j) has its
/// center at (i + 0.5, j + 0.5).
struct Camera {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double focal_px = 1.0;
  Vec2 principal_point = Vec2::Zero();
  int width = 0;
  int height = 0;

  Vec3 to_camera(const Vec3& p) const { return rotation * p + translation; }
  Vec2 project(const Vec3& p) const {
    const Vec3 c = to_camera(p);
    return focal_px * Vec2(c.x() / c.z(), c.y() / c.z()) + principal_point;
  }
  Vec3 center() const { return -rotation.transpose() * translation; }

  /// Camera at `eye` looking at `target`, roll fixed by `up` (falls back to
  /// (1,0,0) when the view direction is within 1e-6 of +-up).
  static Camera look_at(const Vec3& eye, const Vec3& target, const Vec3& up,
                        double focal_px, const Vec2& principal_point, int width, int height);
};

/// The rendering protocol's camera: 128x128 pixels, 68 degree field of view,
/// principal point at the image center.
Camera make_protocol_camera(const Vec3& eye, const Vec3& target = Vec3::Zero());

/// Field-of-view (degrees, full angle across the width) to focal length.
double focal_from_fov(double fov_deg, int width);

/// Unit-sphere vertices of the subdivided icosahedron (12, 42, 162, 642, ...).
PointList icosphere_vertices(int subdivisions);

/// `count` cameras on distinct icosphere vertices (chosen uniformly without
/// replacement, seeded), each at `distance` from the origin looking at it.
std::vector<Camera> icosphere_viewpoints(int subdivisions, int count, std::uint64_t seed,
                                         double distance = 1.0);

/// One projected component: weight, pixel-space mean, pixel^2 covariance.
struct Gaussian2 {
  double weight = 1.0;
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
};

struct GaussianMixture2 {
  std::vector<Gaussian2> components;

  int size() const { return static_cast<int>(components.size()); }
};

/// Affine (para-perspective) projection of each 3D component about its mean:
/// mu' = f*(x/z, y/z) + pp, Sigma' = J Sigma_c J^T with J the perspective
/// Jacobian at mu_c. Weights carry over. Throws if any component mean has
/// camera depth <= 1e-6.
GaussianMixture2 paraperspective_project(const GaussianMixture3& m, const Camera& cam);

/// Grayscale image with values in [0, 1], row-major (y * width + x).
struct SilhouetteImage {
  int width = 0;
  int height = 0;
  std::vector<double> values;

  SilhouetteImage() = default;
  SilhouetteImage(int w, int h, double fill = 0.0)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, fill) {}

  double at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
};

/// Pseudo soft silhouette s_hat(x) = 1 - (1 - d(x))^q, with d(x) the 2D
/// mixture density at the pixel center (mass per pixel area, clamped to [0,1]).
SilhouetteImage soft_silhouette(const GaussianMixture2& m2, long long q, const Camera& cam);

namespace detail {
/// Raw per-pixel projected density (before clamping); the silhouette loss
/// reproduces this computation bit for bit.
std::vector<double> density_image(const GaussianMixture2& m2, int width, int height);
}  // namespace detail

/// Binary coverage image: pixel 1 iff its center falls inside the perspective
/// projection of some triangle.
SilhouetteImage rasterize_mesh_silhouette(const TriangleMesh& mesh, const Camera& cam);

/// A camera paired with the reference silhouette seen from it.
struct ViewObservation {
  Camera camera;
  SilhouetteImage silhouette;
};

}  // namespace gmshape

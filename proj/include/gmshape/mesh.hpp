#pragma once

#include <array>
#include <cstdint>
#include <utility>

#include "gmshape/types.hpp"

namespace gmshape {

/// Indexed triangle surface.
struct TriangleMesh {
  PointList vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  Vec3 center() const { return 0.5 * (lo + hi); }
  Vec3 extent() const { return hi - lo; }
  double diagonal() const { return extent().norm(); }
};

Aabb bounding_box(const TriangleMesh& mesh);
Aabb bounding_box(const PointList& points);

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c);
double surface_area(const TriangleMesh& mesh);

/// Signed enclosed volume (positive for outward-oriented closed surfaces).
double enclosed_volume(const TriangleMesh& mesh);

/// n points uniform by area on the surface; deterministic per seed.
PointList sample_surface(const TriangleMesh& mesh, int n, std::uint64_t seed);

/// Unit icosphere: subdivided icosahedron with vertices on the unit sphere
/// (12, 42, 162, 642, ... vertices), outward-oriented faces.
TriangleMesh icosphere_mesh(int subdivisions);

/// Axis-aligned box with outward-oriented faces (12 triangles).
TriangleMesh box_mesh(const Vec3& lo, const Vec3& hi);

/// Appends `extra` to `mesh`, offsetting its indices.
void append_mesh(TriangleMesh& mesh, const TriangleMesh& extra);

}  // namespace gmshape

#include "gmshape/mesh.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "gmshape/detail/rng.hpp"

namespace gmshape {

Aabb bounding_box(const TriangleMesh& mesh) { return bounding_box(mesh.vertices); }

Aabb bounding_box(const PointList& points) {
  if (points.empty()) throw std::invalid_argument("bounding_box: empty point set");
  Aabb box{points.front(), points.front()};
  for (const Vec3& p : points) {
    box.lo = box.lo.cwiseMin(p);
    box.hi = box.hi.cwiseMax(p);
  }
  return box;
}

double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

double surface_area(const TriangleMesh& mesh) {
  double area = 0.0;
  for (const auto& t : mesh.triangles)
    area += triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
  return area;
}

double enclosed_volume(const TriangleMesh& mesh) {
  double vol = 0.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    vol += a.dot(b.cross(c));
  }
  return vol / 6.0;
}

PointList sample_surface(const TriangleMesh& mesh, int n, std::uint64_t seed) {
  if (mesh.empty()) throw std::invalid_argument("sample_surface: empty mesh");
  std::vector<double> cumulative(mesh.triangles.size());
  double acc = 0.0;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    acc += triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]);
    cumulative[t] = acc;
  }
  if (acc <= 0.0) throw std::invalid_argument("sample_surface: zero total area");

  Rng rng(seed);
  PointList points(n);
  for (int s = 0; s < n; ++s) {
    const double u = rng.uniform() * acc;
    std::size_t t = std::lower_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin();
    if (t >= mesh.triangles.size()) t = mesh.triangles.size() - 1;
    const auto& tri = mesh.triangles[t];
    double r1 = rng.uniform();
    double r2 = rng.uniform();
    if (r1 + r2 > 1.0) {
      r1 = 1.0 - r1;
      r2 = 1.0 - r2;
    }
    points[s] = mesh.vertices[tri[0]] +
                r1 * (mesh.vertices[tri[1]] - mesh.vertices[tri[0]]) +
                r2 * (mesh.vertices[tri[2]] - mesh.vertices[tri[0]]);
  }
  return points;
}

TriangleMesh icosphere_mesh(int subdivisions) {
  if (subdivisions < 0) throw std::invalid_argument("icosphere_mesh: subdivisions must be >= 0");

  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  TriangleMesh mesh;
  mesh.vertices = {{-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
                   {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
                   {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1}};
  for (Vec3& v : mesh.vertices) v.normalize();
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                    {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                    {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                    {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      const auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      const int idx = static_cast<int>(mesh.vertices.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const auto& f : mesh.triangles) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }
  return mesh;
}

TriangleMesh box_mesh(const Vec3& lo, const Vec3& hi) {
  TriangleMesh mesh;
  for (int c = 0; c < 8; ++c)
    mesh.vertices.push_back(Vec3(c & 1 ? hi.x() : lo.x(), c & 2 ? hi.y() : lo.y(),
                                 c & 4 ? hi.z() : lo.z()));
  mesh.triangles = {{0, 2, 1}, {1, 2, 3},   // z = lo
                    {4, 5, 6}, {5, 7, 6},   // z = hi
                    {0, 1, 4}, {1, 5, 4},   // y = lo
                    {2, 6, 3}, {3, 6, 7},   // y = hi
                    {0, 4, 2}, {2, 4, 6},   // x = lo
                    {1, 3, 5}, {3, 7, 5}};  // x = hi
  return mesh;
}

void append_mesh(TriangleMesh& mesh, const TriangleMesh& extra) {
  const int offset = static_cast<int>(mesh.vertices.size());
  mesh.vertices.insert(mesh.vertices.end(), extra.vertices.begin(), extra.vertices.end());
  for (const auto& t : extra.triangles)
    mesh.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
}

}  // namespace gmshape

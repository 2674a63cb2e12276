#include "gmshape/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

#include "gmshape/detail/parallel.hpp"
#include "gmshape/detail/rng.hpp"
#include "gmshape/io.hpp"

namespace gmshape {

TriangleMesh load_mesh(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
  if (ext == ".obj") return read_obj(path);
  if (ext == ".ply") return read_ply(path);
  throw std::runtime_error(path + ": unsupported mesh format (expected .obj or .ply)");
}

NormalizedMesh normalize_mesh(const TriangleMesh& mesh) {
  if (mesh.vertices.empty()) throw std::invalid_argument("normalize_mesh: empty mesh");
  const Aabb box = bounding_box(mesh);
  NormalizedMesh out;
  out.center = box.center();
  out.diagonal = box.diagonal();
  if (out.diagonal <= 0.0) throw std::invalid_argument("normalize_mesh: degenerate bounding box");
  out.mesh = mesh;
  for (Vec3& v : out.mesh.vertices) v = (v - out.center) / out.diagonal;
  return out;
}

namespace {

// Ray-crossing parities along one axis; rays pass through voxel centers.
// Returns per-voxel occupancy for this direction.
std::vector<unsigned char> parity_sweep(const TriangleMesh& mesh, const VoxelGrid& grid,
                                        int axis, bool* mismatch) {
  const int ua = (axis + 1) % 3;
  const int va = (axis + 2) % 3;
  const int nu = grid.dims[ua];
  const int nv = grid.dims[va];
  const int na = grid.dims[axis];

  // crossing lists per (u, v) row
  std::vector<std::vector<double>> crossings(static_cast<std::size_t>(nu) * nv);

  const double o_u = grid.origin[ua];
  const double o_v = grid.origin[va];
  const double sp = grid.spacing;

  for (const auto& tri : mesh.triangles) {
    const Vec3& p0 = mesh.vertices[tri[0]];
    const Vec3& p1 = mesh.vertices[tri[1]];
    const Vec3& p2 = mesh.vertices[tri[2]];
    const Vec2 a(p0[ua], p0[va]);
    const Vec2 b(p1[ua], p1[va]);
    const Vec2 c(p2[ua], p2[va]);
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (area == 0.0) continue;  // parallel to the ray direction

    const double u_lo = std::min({a.x(), b.x(), c.x()});
    const double u_hi = std::max({a.x(), b.x(), c.x()});
    const double v_lo = std::min({a.y(), b.y(), c.y()});
    const double v_hi = std::max({a.y(), b.y(), c.y()});
    const int iu0 = std::max(0, static_cast<int>(std::ceil((u_lo - o_u) / sp)));
    const int iu1 = std::min(nu - 1, static_cast<int>(std::floor((u_hi - o_u) / sp)));
    const int iv0 = std::max(0, static_cast<int>(std::ceil((v_lo - o_v) / sp)));
    const int iv1 = std::min(nv - 1, static_cast<int>(std::floor((v_hi - o_v) / sp)));

    const double inv_area = 1.0 / area;
    for (int iv = iv0; iv <= iv1; ++iv) {
      for (int iu = iu0; iu <= iu1; ++iu) {
        const Vec2 p(o_u + iu * sp, o_v + iv * sp);
        // barycentric weights, orientation-normalized
        const double w0 = ((b.x() - p.x()) * (c.y() - p.y()) - (b.y() - p.y()) * (c.x() - p.x())) * inv_area;
        const double w1 = ((c.x() - p.x()) * (a.y() - p.y()) - (c.y() - p.y()) * (a.x() - p.x())) * inv_area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0.0 || w1 < 0.0 || w2 < 0.0) continue;
        const double t = w0 * p0[axis] + w1 * p1[axis] + w2 * p2[axis];
        crossings[static_cast<std::size_t>(iv) * nu + iu].push_back(t);
      }
    }
  }

  std::vector<unsigned char> occ(grid.size(), 0);
  const double dedup_tol = 1e-9 * sp;
  for (int iv = 0; iv < nv; ++iv)
    for (int iu = 0; iu < nu; ++iu) {
      auto& ts = crossings[static_cast<std::size_t>(iv) * nu + iu];
      if (ts.empty()) continue;
      std::sort(ts.begin(), ts.end());
      // coincident hits (e.g. a ray through the shared diagonal of a
      // triangulated quad) collapse to one crossing
      std::vector<double> uniq;
      uniq.reserve(ts.size());
      for (double t : ts)
        if (uniq.empty() || t - uniq.back() > dedup_tol) uniq.push_back(t);
      if (uniq.size() % 2 != 0 && mismatch) *mismatch = true;

      std::size_t next = 0;
      bool inside = false;
      for (int ia = 0; ia < na; ++ia) {
        const double t_center = grid.origin[axis] + ia * sp;
        while (next < uniq.size() && uniq[next] < t_center) {
          inside = !inside;
          ++next;
        }
        if (inside) {
          int idx[3];
          idx[axis] = ia;
          idx[ua] = iu;
          idx[va] = iv;
          occ[grid.index(idx[0], idx[1], idx[2])] = 1;
        }
      }
    }
  return occ;
}

}  // namespace

VoxelGrid voxelize_solid(const TriangleMesh& mesh, const Vec3i& dims,
                         const std::optional<Aabb>& bounds, VoxelizeStats* stats) {
  Aabb box;
  if (bounds) {
    box = *bounds;
  } else if (!mesh.vertices.empty()) {
    box = bounding_box(mesh);
    const Vec3 pad = Vec3::Constant(1e-6 + 1e-3 * box.diagonal());
    box.lo -= pad;
    box.hi += pad;
  } else {
    box = {Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  }
  VoxelGrid grid = make_voxel_grid(box.lo, box.hi, dims);
  if (mesh.empty()) return grid;

  bool mismatch = false;
  std::vector<unsigned char> votes[3];
  for (int axis = 0; axis < 3; ++axis) votes[axis] = parity_sweep(mesh, grid, axis, &mismatch);
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    grid.values[i] = (votes[0][i] + votes[1][i] + votes[2][i] >= 2) ? 1.0 : 0.0;
  if (stats) stats->parity_mismatch = mismatch;
  return grid;
}

PointList sample_volume_points(const VoxelGrid& grid, int n, std::uint64_t seed) {
  std::vector<std::size_t> occupied;
  for (std::size_t i = 0; i < grid.values.size(); ++i)
    if (grid.values[i] > 0.5) occupied.push_back(i);
  if (occupied.empty())
    throw std::invalid_argument("sample_volume_points: grid has no occupied voxels");

  const int nx = grid.dims.x();
  const int ny = grid.dims.y();
  Rng rng(seed);
  PointList points(n);
  for (int s = 0; s < n; ++s) {
    const std::size_t flat = occupied[static_cast<std::size_t>(rng.below(occupied.size()))];
    const int i = static_cast<int>(flat % nx);
    const int j = static_cast<int>((flat / nx) % ny);
    const int k = static_cast<int>(flat / (static_cast<std::size_t>(nx) * ny));
    const Vec3 center = grid.position(i, j, k);
    const Vec3 jitter(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
    points[s] = center + grid.spacing * jitter;
  }
  return points;
}

std::vector<ViewObservation> make_view_set(const TriangleMesh& mesh, int n_views,
                                           int subdivisions, std::uint64_t seed, double distance) {
  if (mesh.empty()) throw std::invalid_argument("make_view_set: empty mesh");
  const double dist = distance > 0.0 ? distance : bounding_box(mesh).diagonal();
  const std::vector<Camera> cams = icosphere_viewpoints(subdivisions, n_views, seed, dist);
  std::vector<ViewObservation> views;
  views.reserve(cams.size());
  for (const Camera& cam : cams)
    views.push_back({cam, rasterize_mesh_silhouette(mesh, cam)});
  return views;
}

ShapeTarget load_shape_target(const std::string& path, const Vec3i& dims, int n_points,
                              std::uint64_t seed, bool normalize) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot);

  ShapeTarget target;
  target.provenance = path;

  if (ext == ".obj" || ext == ".ply") {
    TriangleMesh mesh = load_mesh(path);
    if (normalize) mesh = normalize_mesh(mesh).mesh;
    target.grid = voxelize_solid(mesh, dims);
    target.points = sample_volume_points(target.grid, n_points, seed);
    target.bbox_diag = bounding_box(mesh).diagonal();
  } else if (ext == ".vox") {
    target.grid = read_voxel_grid(path);
    target.points = sample_volume_points(target.grid, n_points, seed);
    target.bbox_diag = occupied_bounds(target.grid).diagonal();
  } else if (ext == ".binvox") {
    target.grid = read_binvox(path);
    target.points = sample_volume_points(target.grid, n_points, seed);
    target.bbox_diag = occupied_bounds(target.grid).diagonal();
  } else if (ext == ".xyz") {
    target.points = read_xyz(path);
    if (target.points.empty()) throw std::runtime_error(path + ": no points");
    Aabb box = bounding_box(target.points);
    const Vec3 pad = Vec3::Constant(1e-6 + 1e-3 * box.diagonal());
    box.lo -= pad;
    box.hi += pad;
    target.grid = make_voxel_grid(box.lo, box.hi, dims);
    for (const Vec3& p : target.points) {
      const Vec3 rel = (p - target.grid.origin) / target.grid.spacing;
      const int i = std::clamp(static_cast<int>(std::lround(rel.x())), 0, dims.x() - 1);
      const int j = std::clamp(static_cast<int>(std::lround(rel.y())), 0, dims.y() - 1);
      const int k = std::clamp(static_cast<int>(std::lround(rel.z())), 0, dims.z() - 1);
      target.grid.at(i, j, k) = 1.0;
    }
    target.bbox_diag = box.diagonal();
  } else {
    throw std::runtime_error(path + ": unsupported target format (.obj/.ply/.vox/.binvox/.xyz)");
  }
  return target;
}

namespace {

std::string view_image_name(int index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d.pgm", index);
  return buf;
}

}  // namespace

void save_view_set(const std::string& dir, const std::vector<ViewObservation>& views) {
  std::filesystem::create_directories(dir);
  std::vector<Camera> cams;
  cams.reserve(views.size());
  for (const ViewObservation& v : views) cams.push_back(v.camera);
  write_cameras(dir + "/cameras.txt", cams);
  for (std::size_t i = 0; i < views.size(); ++i)
    write_pgm(dir + "/" + view_image_name(static_cast<int>(i)), views[i].silhouette);
}

std::vector<ViewObservation> load_view_set(const std::string& dir) {
  const std::vector<Camera> cams = read_cameras(dir + "/cameras.txt");
  std::vector<ViewObservation> views;
  views.reserve(cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    ViewObservation view;
    view.camera = cams[i];
    view.silhouette = read_pgm(dir + "/" + view_image_name(static_cast<int>(i)));
    views.push_back(std::move(view));
  }
  return views;
}

}  // namespace gmshape

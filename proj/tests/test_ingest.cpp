#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "gmshape/ingest.hpp"
#include "gmshape/io.hpp"
#include "oracles.hpp"

using namespace gmshape;

namespace {

std::string test_dir() {
  const std::string dir = std::filesystem::temp_directory_path() / "gmshape_ingest_test";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("OBJ loader: minimal triangle, quad fan, malformed input") {
  const std::string dir = test_dir();
  const std::string path = dir + "/tri.obj";
  std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
  const TriangleMesh tri = load_mesh(path);
  CHECK(tri.vertices.size() == 3);
  CHECK(tri.triangles.size() == 1);

  std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
  const TriangleMesh quad = load_mesh(path);
  CHECK(quad.triangles.size() == 2);

  std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2/\n";
  CHECK_THROWS_WITH_AS(load_mesh(path), doctest::Contains(":4"), std::runtime_error);

  std::ofstream(path) << "v 0 0 0\nf 1 2 3\n";
  CHECK_THROWS(load_mesh(path));
}

TEST_CASE("OBJ and PLY round trips preserve geometry") {
  const std::string dir = test_dir();
  const TriangleMesh mesh = icosphere_mesh(1);

  write_obj(dir + "/m.obj", mesh);
  const TriangleMesh obj_back = read_obj(dir + "/m.obj");
  REQUIRE(obj_back.vertices.size() == mesh.vertices.size());
  REQUIRE(obj_back.triangles == mesh.triangles);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    CHECK((obj_back.vertices[i] - mesh.vertices[i]).norm() < 1e-12);

  write_ply(dir + "/m.ply", mesh);
  const TriangleMesh ply_back = read_ply(dir + "/m.ply");
  REQUIRE(ply_back.vertices.size() == mesh.vertices.size());
  REQUIRE(ply_back.triangles == mesh.triangles);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    CHECK((ply_back.vertices[i] - mesh.vertices[i]).norm() < 1e-6);  // float storage
}

TEST_CASE("ASCII PLY is accepted") {
  const std::string dir = test_dir();
  const std::string path = dir + "/a.ply";
  std::ofstream(path) << "ply\nformat ascii 1.0\nelement vertex 3\n"
                      << "property float x\nproperty float y\nproperty float z\n"
                      << "element face 1\nproperty list uchar int vertex_indices\n"
                      << "end_header\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";
  const TriangleMesh mesh = read_ply(path);
  CHECK(mesh.vertices.size() == 3);
  CHECK(mesh.triangles.size() == 1);
}

TEST_CASE("voxelize_solid: unit cube occupancy matches the analytic count") {
  const TriangleMesh cube = box_mesh(Vec3::Constant(-0.5), Vec3::Constant(0.5));
  const Aabb bounds{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  VoxelizeStats stats;
  const VoxelGrid grid = voxelize_solid(cube, Vec3i(16, 16, 16), bounds, &stats);
  // centers at -0.9375 + 0.125 i; strictly inside |x| < 0.5 for 8 per axis
  CHECK(occupied_count(grid) == 512);
  CHECK(!stats.parity_mismatch);
}

TEST_CASE("voxelize_solid: empty mesh gives an all-zero grid") {
  const VoxelGrid grid = voxelize_solid(TriangleMesh{}, Vec3i(8, 8, 8));
  CHECK(occupied_count(grid) == 0);
}

TEST_CASE("voxelize_solid: sphere occupancy within 5% of the analytic volume") {
  TriangleMesh sphere = icosphere_mesh(3);
  for (Vec3& v : sphere.vertices) v *= 0.5;
  const Aabb bounds{Vec3::Constant(-1.0), Vec3::Constant(1.0)};
  const VoxelGrid grid = voxelize_solid(sphere, Vec3i(64, 64, 64), bounds);
  const double frac = static_cast<double>(occupied_count(grid)) / grid.size();
  const double analytic = 4.0 / 3.0 * M_PI * 0.125 / 8.0;
  CHECK(std::abs(frac - analytic) / analytic < 0.05);
}

TEST_CASE("voxelize_solid is invariant under triangle order and vertex relabeling") {
  TriangleMesh mesh = icosphere_mesh(1);
  const VoxelGrid base = voxelize_solid(mesh, Vec3i(24, 24, 24));

  TriangleMesh shuffled = mesh;
  std::reverse(shuffled.triangles.begin(), shuffled.triangles.end());
  for (auto& t : shuffled.triangles) std::rotate(t.begin(), t.begin() + 1, t.end());
  const VoxelGrid perm = voxelize_solid(shuffled, Vec3i(24, 24, 24));
  CHECK(base.values == perm.values);
}

TEST_CASE("voxelize_solid flags open meshes") {
  TriangleMesh open;  // single triangle: every crossing ray sees odd parity
  open.vertices = {Vec3(-1, -1, 0), Vec3(1, -1, 0), Vec3(0, 1, 0)};
  open.triangles = {{0, 1, 2}};
  VoxelizeStats stats;
  (void)voxelize_solid(open, Vec3i(8, 8, 8), Aabb{Vec3::Constant(-2.0), Vec3::Constant(2.0)},
                       &stats);
  CHECK(stats.parity_mismatch);
}

TEST_CASE("sample_volume_points stays inside occupied voxels and is deterministic") {
  VoxelGrid grid = make_voxel_grid(Vec3::Constant(0.0), Vec3::Constant(1.0), Vec3i(4, 4, 4));
  grid.at(1, 2, 3) = 1.0;
  const PointList pts = sample_volume_points(grid, 200, 9);
  const Vec3 center = grid.position(1, 2, 3);
  for (const Vec3& p : pts)
    CHECK(((p - center).cwiseAbs().array() <= 0.5 * grid.spacing + 1e-12).all());

  CHECK(sample_volume_points(grid, 50, 4) == sample_volume_points(grid, 50, 4));

  VoxelGrid empty = grid;
  empty.at(1, 2, 3) = 0.0;
  CHECK_THROWS(sample_volume_points(empty, 10, 1));
}

TEST_CASE("sample_volume_points empirical mean matches the occupied centroid") {
  VoxelGrid grid = make_voxel_grid(Vec3::Constant(-1.0), Vec3::Constant(1.0), Vec3i(32, 32, 32));
  Vec3 centroid = Vec3::Zero();
  int count = 0;
  for (int k = 10; k < 14; ++k)
    for (int j = 8; j < 12; ++j)
      for (int i = 20; i < 24; ++i) {
        grid.at(i, j, k) = 1.0;
        centroid += grid.position(i, j, k);
        ++count;
      }
  centroid /= count;
  const PointList pts = sample_volume_points(grid, 1000000, 31);
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : pts) mean += p;
  mean /= pts.size();
  CHECK((mean - centroid).norm() < 0.01 * grid.spacing);
}

TEST_CASE("make_view_set: counts, binary values, and origin-directed rays") {
  const TriangleMesh mesh = normalize_mesh(icosphere_mesh(2)).mesh;
  const std::vector<ViewObservation> views = make_view_set(mesh, 100, 2, 3);
  REQUIRE(views.size() == 100);
  for (const ViewObservation& v : views) {
    for (double px : v.silhouette.values) CHECK((px == 0.0 || px == 1.0));
    const Vec3 c = v.camera.center();
    const Vec3 axis = v.camera.rotation.row(2);
    CHECK((c - c.dot(axis) * axis).norm() < 1e-9);  // ray through the origin
    CHECK(std::abs(c.norm() - 1.0) < 1e-9);         // unit bbox diagonal
  }
}

TEST_CASE("rasterized cube from an axis-aligned view is a filled square of known size") {
  // normalized cube: side 1/sqrt(3), camera at unit distance
  const TriangleMesh cube =
      normalize_mesh(box_mesh(Vec3::Constant(-0.5), Vec3::Constant(0.5))).mesh;
  const Camera cam = make_protocol_camera(Vec3(0, 0, -1));
  const SilhouetteImage img = rasterize_mesh_silhouette(cube, cam);

  const double side = 1.0 / std::sqrt(3.0);
  const double depth = 1.0 - 0.5 * side;  // front face
  const double half_px = cam.focal_px * (0.5 * side) / depth;

  // measure the lit width along the center row
  int lo = img.width, hi = -1;
  const int row = img.height / 2;
  for (int x = 0; x < img.width; ++x)
    if (img.at(x, row) > 0.5) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  const double measured = hi - lo + 1;
  CHECK(std::abs(measured - 2.0 * half_px) <= 2.0);

  // filled: every pixel between the extremes is lit
  for (int x = lo; x <= hi; ++x) CHECK(img.at(x, row) == 1.0);
}

TEST_CASE("binvox reader decodes the RLE layout") {
  const std::string dir = test_dir();
  const std::string path = dir + "/g.binvox";
  {
    std::ofstream out(path, std::ios::binary);
    out << "#binvox 1\ndim 2 2 2\ntranslate -1 -1 -1\nscale 2\ndata\n";
    // binvox order: y fastest, then z, then x
    const unsigned char rle[] = {1, 1, 0, 7};  // first voxel set, rest empty
    out.write(reinterpret_cast<const char*>(rle), sizeof(rle));
  }
  const VoxelGrid grid = read_binvox(path);
  CHECK(grid.dims == Vec3i(2, 2, 2));
  CHECK(grid.spacing == doctest::Approx(1.0));
  CHECK(occupied_count(grid) == 1);
  CHECK(grid.at(0, 0, 0) == 1.0);
  CHECK_THROWS(read_binvox(dir + "/missing.binvox"));
}

TEST_CASE("load_shape_target: normalized mesh target keeps points inside the grid") {
  const std::string dir = test_dir();
  TriangleMesh mesh = icosphere_mesh(2);
  for (Vec3& v : mesh.vertices) v = 3.0 * v + Vec3(10, -5, 2);  // off-center, large
  write_obj(dir + "/shape.obj", mesh);

  const ShapeTarget target = load_shape_target(dir + "/shape.obj", Vec3i(32, 32, 32), 5000, 5);
  CHECK(target.bbox_diag == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(target.points.size() == 5000);
  const Aabb box = occupied_bounds(target.grid);
  for (const Vec3& p : target.points) {
    CHECK((p.array() >= box.lo.array() - 1e-9).all());
    CHECK((p.array() <= box.hi.array() + 1e-9).all());
  }
}

TEST_CASE("view-set directory round trip") {
  const std::string dir = test_dir() + "/views";
  const TriangleMesh mesh = normalize_mesh(icosphere_mesh(1)).mesh;
  const std::vector<ViewObservation> views = make_view_set(mesh, 5, 1, 7);
  save_view_set(dir, views);
  const std::vector<ViewObservation> back = load_view_set(dir);
  REQUIRE(back.size() == views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    CHECK(back[i].camera.rotation == views[i].camera.rotation);
    CHECK(back[i].silhouette.values == views[i].silhouette.values);  // binary survives 8-bit
  }
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gmshape/camera.hpp"
#include "gmshape/mesh.hpp"
#include "gmshape/voxel_grid.hpp"

namespace gmshape {

/// Dispatches on extension: .obj or .ply.
TriangleMesh load_mesh(const std::string& path);

struct NormalizedMesh {
  TriangleMesh mesh;
  Vec3 center = Vec3::Zero();  // subtracted before scaling
  double diagonal = 1.0;       // original bounding-box diagonal (the scale)
};

/// Re-centers to the bounding-box center and scales so the bbox diagonal is 1
/// (the fitting protocol; T = 0.85 then covers the object).
NormalizedMesh normalize_mesh(const TriangleMesh& mesh);

struct VoxelizeStats {
  bool parity_mismatch = false;  // some ray saw an odd crossing count (open mesh?)
};

/// Solid occupancy by ray-crossing parity through voxel centers, majority
/// vote over the three axis directions. Non-watertight input degrades
/// gracefully and is flagged through `stats`.
VoxelGrid voxelize_solid(const TriangleMesh& mesh, const Vec3i& dims,
                         const std::optional<Aabb>& bounds = std::nullopt,
                         VoxelizeStats* stats = nullptr);

/// n uniform draws of occupied voxel centers (with replacement), jittered
/// uniformly within each voxel cube; deterministic per seed.
PointList sample_volume_points(const VoxelGrid& grid, int n, std::uint64_t seed);

/// Ground-truth views: icosphere cameras at `distance` (default: the mesh
/// bounding-box diagonal) with the protocol intrinsics, silhouettes
/// rasterized from the mesh.
std::vector<ViewObservation> make_view_set(const TriangleMesh& mesh, int n_views,
                                           int subdivisions, std::uint64_t seed,
                                           double distance = -1.0);

/// Fitting target: volume points plus the binary occupancy grid they came
/// from.
struct ShapeTarget {
  PointList points;
  VoxelGrid grid;
  double bbox_diag = 1.0;
  std::string provenance;
};

/// Loads a fitting target from .obj/.ply (normalized + voxelized), .vox,
/// .binvox, or .xyz. `dims` controls voxelization (and point binning for
/// xyz); `n_points` the sampled volume cloud size.
ShapeTarget load_shape_target(const std::string& path, const Vec3i& dims, int n_points,
                              std::uint64_t seed, bool normalize = true);

/// View-set directory layout: cameras.txt plus one 000.pgm, 001.pgm, ... per
/// camera.
void save_view_set(const std::string& dir, const std::vector<ViewObservation>& views);
std::vector<ViewObservation> load_view_set(const std::string& dir);

}  // namespace gmshape

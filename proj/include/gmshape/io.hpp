#pragma once

#include <string>
#include <vector>

#include "gmshape/camera.hpp"
#include "gmshape/gaussian_mixture.hpp"
#include "gmshape/mesh.hpp"
#include "gmshape/voxel_grid.hpp"

namespace gmshape {

/// GMM files: JSON {k, components:[{weight, mean[3],
/// precision_factor_lower[6]}]} with the lower factor row-major
/// (l11,l21,l22,l31,l32,l33); the writer emits 17 significant digits.
void write_gmm(const std::string& path, const GaussianMixture3& m);
GaussianMixture3 read_gmm(const std::string& path);

/// 8-bit binary PGM (P5); values quantized to [0, 255].
void write_pgm(const std::string& path, const SilhouetteImage& image);
SilhouetteImage read_pgm(const std::string& path);

/// Binary voxel grid: u32 dims[3], f32 spacing, f32 origin[3], f32 values
/// (x-fastest, little-endian).
void write_voxel_grid(const std::string& path, const VoxelGrid& grid);
VoxelGrid read_voxel_grid(const std::string& path);

/// binvox-format occupancy (ASCII header + run-length byte pairs).
VoxelGrid read_binvox(const std::string& path);

/// Camera list: one camera per line, 17 numbers (rotation row-major,
/// translation, focal_px, principal point, width, height).
void write_cameras(const std::string& path, const std::vector<Camera>& cameras);
std::vector<Camera> read_cameras(const std::string& path);

void write_obj(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_obj(const std::string& path);

/// Binary little-endian PLY writer; the reader also accepts ASCII.
void write_ply(const std::string& path, const TriangleMesh& mesh);
TriangleMesh read_ply(const std::string& path);

void write_xyz(const std::string& path, const PointList& points);
PointList read_xyz(const std::string& path);

}  // namespace gmshape

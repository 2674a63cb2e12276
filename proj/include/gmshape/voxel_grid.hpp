#pragma once

#include <cstddef>
#include <vector>

#include "gmshape/mesh.hpp"
#include "gmshape/types.hpp"

namespace gmshape {

/// Regular scalar grid with cubic cells. `origin` is the world position of
/// sample (0,0,0); sample (i,j,k) sits at origin + spacing*(i,j,k). Values
/// are stored x-fastest.
struct VoxelGrid {
  Vec3i dims = Vec3i::Zero();
  Vec3 origin = Vec3::Zero();
  double spacing = 1.0;
  std::vector<double> values;

  std::size_t size() const {
    return static_cast<std::size_t>(dims.x()) * dims.y() * dims.z();
  }
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(k) * dims.y() * dims.x() +
           static_cast<std::size_t>(j) * dims.x() + i;
  }
  double at(int i, int j, int k) const { return values[index(i, j, k)]; }
  double& at(int i, int j, int k) { return values[index(i, j, k)]; }
  Vec3 position(int i, int j, int k) const {
    return origin + spacing * Vec3(i, j, k);
  }
};

/// Grid whose samples are the centers of dims^3 voxels tiling [lo, hi]
/// (cubified around the box center when extents differ, since spacing is one
/// scalar). Values initialized to zero.
VoxelGrid make_voxel_grid(const Vec3& lo, const Vec3& hi, const Vec3i& dims);

/// Bounding box of the occupied (> 0.5) samples, padded by half a voxel.
Aabb occupied_bounds(const VoxelGrid& grid);
std::size_t occupied_count(const VoxelGrid& grid);

}  // namespace gmshape

#include "gmshape/voxel_grid.hpp"

#include <stdexcept>

namespace gmshape {

VoxelGrid make_voxel_grid(const Vec3& lo, const Vec3& hi, const Vec3i& dims) {
  if ((dims.array() < 1).any()) throw std::invalid_argument("make_voxel_grid: dims must be >= 1");
  if (((hi - lo).array() <= 0.0).any())
    throw std::invalid_argument("make_voxel_grid: degenerate bounds");

  const Vec3 extent = hi - lo;
  double spacing = 0.0;
  for (int a = 0; a < 3; ++a) spacing = std::max(spacing, extent[a] / dims[a]);

  VoxelGrid grid;
  grid.dims = dims;
  grid.spacing = spacing;
  const Vec3 center = 0.5 * (lo + hi);
  grid.origin = center - 0.5 * spacing * Vec3(dims.x() - 1, dims.y() - 1, dims.z() - 1);
  grid.values.assign(grid.size(), 0.0);
  return grid;
}

Aabb occupied_bounds(const VoxelGrid& grid) {
  bool any = false;
  Vec3 lo, hi;
  for (int k = 0; k < grid.dims.z(); ++k)
    for (int j = 0; j < grid.dims.y(); ++j)
      for (int i = 0; i < grid.dims.x(); ++i)
        if (grid.at(i, j, k) > 0.5) {
          const Vec3 p = grid.position(i, j, k);
          if (!any) {
            lo = hi = p;
            any = true;
          } else {
            lo = lo.cwiseMin(p);
            hi = hi.cwiseMax(p);
          }
        }
  if (!any) throw std::invalid_argument("occupied_bounds: grid has no occupied voxels");
  const Vec3 half(0.5 * grid.spacing, 0.5 * grid.spacing, 0.5 * grid.spacing);
  return {lo - half, hi + half};
}

std::size_t occupied_count(const VoxelGrid& grid) {
  std::size_t n = 0;
  for (double v : grid.values)
    if (v > 0.5) ++n;
  return n;
}

}  // namespace gmshape

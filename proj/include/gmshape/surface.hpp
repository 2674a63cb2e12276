#pragma once

#include "gmshape/gaussian_mixture.hpp"
#include "gmshape/mesh.hpp"
#include "gmshape/voxel_grid.hpp"

namespace gmshape {

/// Default isosurface level multiplier, determined experimentally: converged
/// per-shape fits have bumpy interiors, so E[f] = integral of f^2 exceeds 1/V
/// and a sub-unit c recovers the intended volume.
inline constexpr double kDefaultIsoLevel = 0.35;

/// Density level defining the object surface: c * E[f] (E[f] ~ 1/V).
double iso_threshold(const GaussianMixture3& m, double c);

/// Mixture density sampled at every grid position.
VoxelGrid voxelize_density(const GaussianMixture3& m, const Vec3i& dims, const Aabb& bounds);

/// Cubic box spanning mixture mean +- 4 whole-mixture standard deviations,
/// padded 10%.
Aabb default_mesh_bounds(const GaussianMixture3& m);

/// Standard marching cubes over the grid cells. Vertices are linear
/// interpolations along cut edges, shared between cells; triangles wind so
/// normals point outward (toward lower values). A grid with no crossing
/// yields an empty mesh.
TriangleMesh marching_cubes(const VoxelGrid& grid, double tau);

/// voxelize_density + marching_cubes at iso_threshold(m, c).
TriangleMesh extract_mesh(const GaussianMixture3& m, double c, const Vec3i& dims, const Aabb& bounds);
TriangleMesh extract_mesh(const GaussianMixture3& m, double c, const Vec3i& dims);

}  // namespace gmshape

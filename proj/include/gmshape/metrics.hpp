#pragma once

#include <span>
#include <string>

#include "gmshape/camera.hpp"
#include "gmshape/gaussian_mixture.hpp"
#include "gmshape/surface.hpp"
#include "gmshape/voxel_grid.hpp"

namespace gmshape {

/// Volumetric overlap between the mixture thresholded at iso_threshold(m, c)
/// on the ground-truth grid's lattice and the (binary) ground truth.
double iou(const GaussianMixture3& m, const VoxelGrid& gt, double c = kDefaultIsoLevel);

/// |A intersect B| / |A union B| of two binary grids with identical dims.
double iou(const VoxelGrid& a, const VoxelGrid& b);

enum class CloudNormalization { None, PerCloud, Joint };

/// Bidirectional mean nearest-neighbor distance. Clouds are scaled to fit a
/// unit cube first (per-cloud by default, per the evaluation protocol).
double chamfer(std::span<const Vec3> pa, std::span<const Vec3> pb,
               CloudNormalization normalization = CloudNormalization::PerCloud);

struct EmdOptions {
  // point counts up to this bound use the exact assignment solver
  int exact_threshold = 256;
  // entropic regularization, as a fraction of the mean pairwise cost
  double epsilon_scale = 5e-3;
  int max_sinkhorn_iters = 2000;
  CloudNormalization normalization = CloudNormalization::PerCloud;
};

struct EmdResult {
  double value = 0.0;
  double duality_gap = 0.0;  // primal minus dual bound; 0 for the exact solver
  bool exact = true;
};

/// Earth mover's distance: mean matched edge length under the optimal
/// one-to-one assignment (exact for small n, entropic approximation with a
/// reported duality gap above the threshold). Requires |pa| == |pb|.
EmdResult emd(std::span<const Vec3> pa, std::span<const Vec3> pb, const EmdOptions& options = {});

/// Mean squared pixel difference; images must have equal dimensions.
double silhouette_mse(const SilhouetteImage& a, const SilhouetteImage& b);

struct EvalReport {
  double iou = 0.0;
  double chamfer = 0.0;
  double emd = 0.0;
  double sil_mse = std::numeric_limits<double>::quiet_NaN();
  // configuration echo for reproducibility
  Vec3i grid_dims = Vec3i::Zero();
  int point_count = 0;
  std::uint64_t seed = 0;
};

}  // namespace gmshape

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "gmshape/losses.hpp"

namespace gmshape {

/// Raised when an optimization produces a non-finite loss; carries the
/// iteration and offending term in the message.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class InitScheme { RandomSphere, EmWarmstart };
enum class LrSchedule { Constant, Cosine };

struct FitConfig {
  int k = 16;
  int iters = 500;
  double lr = 1e-2;  // per-shape default; the network-training value 1e-4 also works
  LrSchedule schedule = LrSchedule::Cosine;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  InitScheme init = InitScheme::EmWarmstart;
  int em_warmstart_iters = 25;
  // explicit starting mixture; overrides `init` when set (k must match)
  std::optional<GaussianMixture3> init_mixture;
};

struct IterStats {
  double total = 0.0;
  double l_3d = 0.0;
  double l_dist = 0.0;
  double l_sil = 0.0;
};

struct FitTrace {
  std::vector<IterStats> iterations;
  double wall_seconds = 0.0;
  MixtureParams final_params;
};

struct FitResult {
  GaussianMixture3 mixture;
  FitTrace trace;
};

/// Adam over the raw parameters, minimizing the weighted total loss with a
/// fresh point batch and view subset each iteration. Deterministic per seed.
FitResult fit(std::span<const Vec3> target_points, const std::vector<ViewObservation>& views,
              const FitConfig& cfg, const LossConfig& loss_cfg);

/// k-means++-style moment initialization used by EM (and the fit warm start).
GaussianMixture3 em_init(std::span<const Vec3> points, int k, std::uint64_t seed);

struct EmResult {
  GaussianMixture3 mixture;
  std::vector<double> avg_log_likelihood;  // one entry per iteration, non-decreasing
};

/// EM iterations from a given starting mixture.
EmResult em_run(std::span<const Vec3> points, GaussianMixture3 start, int iters);

/// Full EM baseline: em_init followed by em_run.
GaussianMixture3 em_fit(std::span<const Vec3> points, int k, int iters, std::uint64_t seed);

}  // namespace gmshape

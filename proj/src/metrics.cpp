#include "gmshape/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "gmshape/detail/kdtree.hpp"
#include "gmshape/detail/parallel.hpp"
#include "gmshape/surface.hpp"

namespace gmshape {

double iou(const GaussianMixture3& m, const VoxelGrid& gt, double c) {
  if (occupied_count(gt) == 0) throw std::invalid_argument("iou: ground-truth grid is empty");

  const double tau = iso_threshold(m, c);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (int k = 0; k < gt.dims.z(); ++k)
    for (int j = 0; j < gt.dims.y(); ++j)
      for (int i = 0; i < gt.dims.x(); ++i) {
        const bool in_gt = gt.at(i, j, k) > 0.5;
        const bool in_m = density(m, gt.position(i, j, k)) > tau;
        inter += in_gt && in_m;
        uni += in_gt || in_m;
      }
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double iou(const VoxelGrid& a, const VoxelGrid& b) {
  if (a.dims != b.dims) throw std::invalid_argument("iou: grid dims differ");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const bool in_a = a.values[i] > 0.5;
    const bool in_b = b.values[i] > 0.5;
    inter += in_a && in_b;
    uni += in_a || in_b;
  }
  if (uni == 0) throw std::invalid_argument("iou: both grids are empty");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

PointList normalized_to_unit_cube(std::span<const Vec3> points) {
  Vec3 lo = points.front();
  Vec3 hi = points.front();
  for (const Vec3& p : points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3 center = 0.5 * (lo + hi);
  const double extent = (hi - lo).maxCoeff();
  const double inv = extent > 0.0 ? 1.0 / extent : 1.0;
  PointList out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) out[i] = (points[i] - center) * inv;
  return out;
}

void apply_normalization(CloudNormalization mode, std::span<const Vec3> pa,
                         std::span<const Vec3> pb, PointList& na, PointList& nb) {
  switch (mode) {
    case CloudNormalization::None:
      na.assign(pa.begin(), pa.end());
      nb.assign(pb.begin(), pb.end());
      break;
    case CloudNormalization::PerCloud:
      na = normalized_to_unit_cube(pa);
      nb = normalized_to_unit_cube(pb);
      break;
    case CloudNormalization::Joint: {
      PointList all(pa.begin(), pa.end());
      all.insert(all.end(), pb.begin(), pb.end());
      const PointList norm = normalized_to_unit_cube(all);
      na.assign(norm.begin(), norm.begin() + pa.size());
      nb.assign(norm.begin() + pa.size(), norm.end());
      break;
    }
  }
}

}  // namespace

double chamfer(std::span<const Vec3> pa, std::span<const Vec3> pb,
               CloudNormalization normalization) {
  if (pa.empty() || pb.empty()) throw std::invalid_argument("chamfer: empty point set");
  PointList a, b;
  apply_normalization(normalization, pa, pb, a, b);

  const detail::KdTree tree_a(a);
  const detail::KdTree tree_b(b);

  struct Acc {
    double sum = 0.0;
    Acc& operator+=(const Acc& o) {
      sum += o.sum;
      return *this;
    }
  };
  const Acc a_to_b = parallel_reduce<Acc>(a.size(), Acc{}, [&](std::size_t lo, std::size_t hi) {
    Acc acc;
    for (std::size_t i = lo; i < hi; ++i) acc.sum += std::sqrt(tree_b.nearest_sq(a[i]));
    return acc;
  });
  const Acc b_to_a = parallel_reduce<Acc>(b.size(), Acc{}, [&](std::size_t lo, std::size_t hi) {
    Acc acc;
    for (std::size_t i = lo; i < hi; ++i) acc.sum += std::sqrt(tree_a.nearest_sq(b[i]));
    return acc;
  });
  return a_to_b.sum / a.size() + b_to_a.sum / b.size();
}

namespace {

// Exact rectangular assignment via shortest augmenting paths with potentials
// (Jonker-Volgenant style). cost is row-major n x n; returns the column
// matched to each row.
std::vector<int> solve_assignment(const std::vector<double>& cost, int n) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> row_of_col(n + 1, n);  // n = virtual free row
  std::vector<int> way(n + 1, 0);

  for (int row = 0; row < n; ++row) {
    row_of_col[n] = row;
    int j0 = n;
    std::vector<double> min_v(n + 1, kInf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = row_of_col[j0];
      double delta = kInf;
      int j1 = n;
      for (int j = 0; j < n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(i0) * n + j] - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != n);
    do {
      const int j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != n);
  }

  std::vector<int> match(n);
  for (int j = 0; j < n; ++j)
    if (row_of_col[j] != n) match[row_of_col[j]] = j;
  return match;
}

// Log-domain Sinkhorn with epsilon scaling, rounded to a feasible transport
// plan; reports primal cost and the gap to the dual bound. The plan is
// parameterized as P_ij = a_i b_j exp((f_i + g_j - C_ij) / eps) with uniform
// marginals a = b = 1/n.
EmdResult sinkhorn_emd(const std::vector<double>& cost, int n, double epsilon_scale,
                       int max_iters) {
  double mean_cost = 0.0;
  for (double c : cost) mean_cost += c;
  mean_cost /= cost.size();
  const double eps_final = std::max(1e-12, epsilon_scale * mean_cost);

  const double log_marginal = -std::log(static_cast<double>(n));  // log(1/n)
  std::vector<double> f(n, 0.0), g(n, 0.0);

  auto lse_row = [&](const std::vector<double>& dual, int i, double e) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      mx = std::max(mx, (dual[j] - cost[static_cast<std::size_t>(i) * n + j]) / e);
    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      acc += std::exp((dual[j] - cost[static_cast<std::size_t>(i) * n + j]) / e - mx);
    return mx + std::log(acc);
  };
  auto lse_col = [&](const std::vector<double>& dual, int j, double e) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      mx = std::max(mx, (dual[i] - cost[static_cast<std::size_t>(i) * n + j]) / e);
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += std::exp((dual[i] - cost[static_cast<std::size_t>(i) * n + j]) / e - mx);
    return mx + std::log(acc);
  };

  // worst relative row-marginal violation after a g update
  auto row_violation = [&](double e) {
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
      const double log_row = log_marginal + f[i] / e + log_marginal + lse_row(g, i, e);
      worst = std::max(worst, std::abs(std::exp(log_row - log_marginal) - 1.0));
    }
    return worst;
  };

  auto iterate = [&](double e, int iters) {
    for (int it = 0; it < iters; ++it) {
      for (int i = 0; i < n; ++i) f[i] = -e * (log_marginal + lse_row(g, i, e));
      for (int j = 0; j < n; ++j) g[j] = -e * (log_marginal + lse_col(f, j, e));
      if (it % 10 == 9 && row_violation(e) < 1e-10) break;
    }
  };

  // epsilon scaling: warm-start the potentials at decreasing temperature
  double eps = std::max(eps_final, 0.2 * mean_cost);
  while (eps > eps_final * 1.001) {
    iterate(eps, std::max(20, max_iters / 20));
    eps = std::max(eps_final, eps * 0.25);
  }
  iterate(eps_final, max_iters);

  // transport plan, rounded to the feasible polytope (Altschuler et al.)
  std::vector<double> plan(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      plan[static_cast<std::size_t>(i) * n + j] =
          std::exp((f[i] + g[j] - cost[static_cast<std::size_t>(i) * n + j]) / eps_final +
                   2.0 * log_marginal);

  const double marginal = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += plan[static_cast<std::size_t>(i) * n + j];
    const double s = row > 0.0 ? std::min(1.0, marginal / row) : 0.0;
    for (int j = 0; j < n; ++j) plan[static_cast<std::size_t>(i) * n + j] *= s;
  }
  std::vector<double> col_sum(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) col_sum[j] += plan[static_cast<std::size_t>(i) * n + j];
  for (int j = 0; j < n; ++j) {
    const double s = col_sum[j] > 0.0 ? std::min(1.0, marginal / col_sum[j]) : 0.0;
    for (int i = 0; i < n; ++i) plan[static_cast<std::size_t>(i) * n + j] *= s;
  }
  // distribute the residual mass uniformly
  std::vector<double> row_def(n, marginal), col_def(n, marginal);
  double deficit = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      row_def[i] -= plan[static_cast<std::size_t>(i) * n + j];
      col_def[j] -= plan[static_cast<std::size_t>(i) * n + j];
    }
  for (int i = 0; i < n; ++i) deficit += row_def[i];
  if (deficit > 1e-15) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        plan[static_cast<std::size_t>(i) * n + j] += row_def[i] * col_def[j] / deficit;
  }

  double primal = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      primal += plan[static_cast<std::size_t>(i) * n + j] * cost[static_cast<std::size_t>(i) * n + j];

  // dual feasible bound: sum of potentials with non-positive slack enforced
  double dual = 0.0;
  for (int i = 0; i < n; ++i) dual += marginal * f[i];
  for (int j = 0; j < n; ++j) dual += marginal * g[j];
  double worst_slack = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      worst_slack = std::max(worst_slack,
                             f[i] + g[j] - cost[static_cast<std::size_t>(i) * n + j]);
  dual -= worst_slack;

  // total plan mass is 1, so the primal cost is already the mean edge length
  EmdResult result;
  result.value = primal;
  result.duality_gap = primal - dual;
  result.exact = false;
  return result;
}

}  // namespace

EmdResult emd(std::span<const Vec3> pa, std::span<const Vec3> pb, const EmdOptions& options) {
  if (pa.size() != pb.size())
    throw std::invalid_argument("emd: point sets must have equal size");
  if (pa.empty()) throw std::invalid_argument("emd: empty point set");

  PointList a, b;
  apply_normalization(options.normalization, pa, pb, a, b);
  const int n = static_cast<int>(a.size());

  std::vector<double> cost(static_cast<std::size_t>(n) * n);
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (int j = 0; j < n; ++j)
        cost[i * n + j] = (a[i] - b[j]).norm();
  });

  if (n <= options.exact_threshold) {
    const std::vector<int> match = solve_assignment(cost, n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += cost[static_cast<std::size_t>(i) * n + match[i]];
    return {total / n, 0.0, true};
  }
  return sinkhorn_emd(cost, n, options.epsilon_scale, options.max_sinkhorn_iters);
}

double silhouette_mse(const SilhouetteImage& a, const SilhouetteImage& b) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument("silhouette_mse: image dimensions differ");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const double d = a.values[i] - b.values[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.values.size());
}

}  // namespace gmshape

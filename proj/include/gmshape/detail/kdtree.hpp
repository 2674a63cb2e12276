#pragma once

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

#include "gmshape/types.hpp"

namespace gmshape::detail {

/// Median-split kd-tree over 3D points, for nearest-neighbor queries.
class KdTree {
 public:
  explicit KdTree(const PointList& points) : points_(points) {
    indices_.resize(points.size());
    std::iota(indices_.begin(), indices_.end(), 0);
    nodes_.reserve(points.size() * 2);
    root_ = build(0, static_cast<int>(points.size()), 0);
  }

  /// Squared distance to the nearest stored point.
  double nearest_sq(const Vec3& query) const {
    double best = std::numeric_limits<double>::infinity();
    search(root_, query, 0, best);
    return best;
  }

 private:
  struct Node {
    int point = -1;
    int left = -1;
    int right = -1;
  };

  int build(int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    const int axis = depth % 3;
    const int mid = (lo + hi) / 2;
    std::nth_element(indices_.begin() + lo, indices_.begin() + mid, indices_.begin() + hi,
                     [&](int a, int b) { return points_[a][axis] < points_[b][axis]; });
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({indices_[mid], -1, -1});
    nodes_[id].left = build(lo, mid, depth + 1);
    nodes_[id].right = build(mid + 1, hi, depth + 1);
    return id;
  }

  void search(int node, const Vec3& query, int depth, double& best) const {
    if (node < 0) return;
    const Vec3& p = points_[nodes_[node].point];
    best = std::min(best, (query - p).squaredNorm());
    const int axis = depth % 3;
    const double delta = query[axis] - p[axis];
    const int near = delta < 0.0 ? nodes_[node].left : nodes_[node].right;
    const int far = delta < 0.0 ? nodes_[node].right : nodes_[node].left;
    search(near, query, depth + 1, best);
    if (delta * delta < best) search(far, query, depth + 1, best);
  }

  const PointList& points_;
  std::vector<int> indices_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace gmshape::detail

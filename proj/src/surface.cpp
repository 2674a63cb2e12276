#include "gmshape/surface.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "gmshape/detail/parallel.hpp"

namespace gmshape {

double iso_threshold(const GaussianMixture3& m, double c) {
  if (c <= 0.0) throw std::invalid_argument("iso_threshold: c must be positive");
  return c * expected_density(m);
}

VoxelGrid voxelize_density(const GaussianMixture3& m, const Vec3i& dims, const Aabb& bounds) {
  VoxelGrid grid = make_voxel_grid(bounds.lo, bounds.hi, dims);
  const int nx = grid.dims.x();
  const int ny = grid.dims.y();
  const int nz = grid.dims.z();
  parallel_for(static_cast<std::size_t>(nz), [&](std::size_t k0, std::size_t k1) {
    for (std::size_t k = k0; k < k1; ++k)
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
          grid.values[grid.index(i, j, static_cast<int>(k))] =
              density(m, grid.position(i, j, static_cast<int>(k)));
  });
  return grid;
}

Aabb default_mesh_bounds(const GaussianMixture3& m) {
  const MixtureMoments mom = mixture_moments(m);
  double sigma = 0.0;
  for (int a = 0; a < 3; ++a) sigma = std::max(sigma, std::sqrt(std::max(0.0, mom.covariance(a, a))));
  const double half = 1.1 * 4.0 * sigma;
  return {mom.mean - Vec3::Constant(half), mom.mean + Vec3::Constant(half)};
}

namespace {

// Cube corners in the conventional order; corner c sits at offsets
// (c&1 ? 1:0 on x after the zig-zag below).
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};

constexpr int kEdgeEnds[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                  {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

// Faces as corner loops (used to pair cut edges consistently); the edge
// between loop positions p and p+1 is kFaceEdges[f][p].
constexpr int kFaceCorners[6][4] = {{0, 1, 2, 3}, {4, 7, 6, 5}, {0, 4, 5, 1},
                                    {1, 5, 6, 2}, {2, 6, 7, 3}, {3, 7, 4, 0}};
constexpr int kFaceEdges[6][4] = {{0, 1, 2, 3},  {7, 6, 5, 4},  {8, 4, 9, 0},
                                  {9, 5, 10, 1}, {10, 6, 11, 2}, {11, 7, 8, 3}};

struct CaseTable {
  // per configuration: flat list of edge-index triples
  std::array<std::vector<int>, 256> tris;
};

// Builds the 256-case table by walking cut-edge cycles. On a face with four
// cut edges the pairing always isolates the inside corners, which depends
// only on the face's sign pattern, so neighboring cells agree and the
// surface closes.
CaseTable build_case_table() {
  CaseTable table;
  for (int config = 0; config < 256; ++config) {
    const auto inside = [&](int corner) { return (config >> corner) & 1; };

    bool cut[12];
    for (int e = 0; e < 12; ++e)
      cut[e] = inside(kEdgeEnds[e][0]) != inside(kEdgeEnds[e][1]);

    // For every face, pair its cut edges; each cut edge gets one partner per
    // adjacent face, giving every cut edge exactly two links.
    std::array<std::array<int, 2>, 12> links;
    std::array<int, 12> n_links{};
    auto add_link = [&](int a, int b) {
      links[a][n_links[a]++] = b;
      links[b][n_links[b]++] = a;
    };
    for (int f = 0; f < 6; ++f) {
      int face_cut[4];
      int n_cut = 0;
      for (int p = 0; p < 4; ++p)
        if (cut[kFaceEdges[f][p]]) face_cut[n_cut++] = p;
      if (n_cut == 2) {
        add_link(kFaceEdges[f][face_cut[0]], kFaceEdges[f][face_cut[1]]);
      } else if (n_cut == 4) {
        // ambiguous face: corners alternate in/out around the loop
        if (inside(kFaceCorners[f][0])) {
          add_link(kFaceEdges[f][3], kFaceEdges[f][0]);  // isolate corner 0
          add_link(kFaceEdges[f][1], kFaceEdges[f][2]);  // isolate corner 2
        } else {
          add_link(kFaceEdges[f][0], kFaceEdges[f][1]);  // isolate corner 1
          add_link(kFaceEdges[f][2], kFaceEdges[f][3]);  // isolate corner 3
        }
      }
    }

    // Trace cycles and fan-triangulate each.
    bool used[12] = {};
    for (int start = 0; start < 12; ++start) {
      if (!cut[start] || used[start]) continue;
      std::vector<int> cycle;
      int prev = -1;
      int cur = start;
      do {
        cycle.push_back(cur);
        used[cur] = true;
        const int next = (links[cur][0] == prev) ? links[cur][1] : links[cur][0];
        prev = cur;
        cur = next;
      } while (cur != start);

      if (cycle.size() < 3) continue;

      // Orient so normals point from inside (high values) outward: the
      // cycle's inside endpoints must fall behind the polygon.
      Vec3 normal = Vec3::Zero();
      auto midpoint = [&](int e) {
        const Vec3 a(kCorner[kEdgeEnds[e][0]][0], kCorner[kEdgeEnds[e][0]][1],
                     kCorner[kEdgeEnds[e][0]][2]);
        const Vec3 b(kCorner[kEdgeEnds[e][1]][0], kCorner[kEdgeEnds[e][1]][1],
                     kCorner[kEdgeEnds[e][1]][2]);
        return Vec3(0.5 * (a + b));
      };
      for (std::size_t i = 0; i < cycle.size(); ++i) {
        const Vec3 a = midpoint(cycle[i]);
        const Vec3 b = midpoint(cycle[(i + 1) % cycle.size()]);
        normal += a.cross(b);
      }
      Vec3 inside_dir = Vec3::Zero();
      for (int e : cycle) {
        const int c_in = inside(kEdgeEnds[e][0]) ? kEdgeEnds[e][0] : kEdgeEnds[e][1];
        const int c_out = inside(kEdgeEnds[e][0]) ? kEdgeEnds[e][1] : kEdgeEnds[e][0];
        inside_dir += Vec3(kCorner[c_in][0] - kCorner[c_out][0], kCorner[c_in][1] - kCorner[c_out][1],
                           kCorner[c_in][2] - kCorner[c_out][2]);
      }
      if (normal.dot(inside_dir) > 0.0) std::reverse(cycle.begin(), cycle.end());

      for (std::size_t i = 1; i + 1 < cycle.size(); ++i) {
        table.tris[config].push_back(cycle[0]);
        table.tris[config].push_back(cycle[i]);
        table.tris[config].push_back(cycle[i + 1]);
      }
    }
  }
  return table;
}

const CaseTable& case_table() {
  static const CaseTable table = build_case_table();
  return table;
}

}  // namespace

TriangleMesh marching_cubes(const VoxelGrid& grid, double tau) {
  if ((grid.dims.array() < 2).any())
    throw std::invalid_argument("marching_cubes: grid dims must be >= 2");

  const CaseTable& table = case_table();
  const int nx = grid.dims.x();
  const int ny = grid.dims.y();
  const int nz = grid.dims.z();

  // One shared vertex slot per lattice edge (node id x axis).
  const std::size_t n_nodes = grid.size();
  std::vector<int> edge_vertex(n_nodes * 3, -1);
  auto node_id = [&](int i, int j, int k) {
    return (static_cast<std::size_t>(k) * ny + j) * nx + i;
  };

  TriangleMesh mesh;
  auto edge_vertex_index = [&](int ci, int cj, int ck, int edge) {
    const int a = kEdgeEnds[edge][0];
    const int b = kEdgeEnds[edge][1];
    const int ai = ci + kCorner[a][0], aj = cj + kCorner[a][1], ak = ck + kCorner[a][2];
    const int bi = ci + kCorner[b][0], bj = cj + kCorner[b][1], bk = ck + kCorner[b][2];
    int axis;
    if (ai != bi) axis = 0;
    else if (aj != bj) axis = 1;
    else axis = 2;
    const int ni = std::min(ai, bi), nj = std::min(aj, bj), nk = std::min(ak, bk);
    const std::size_t slot = node_id(ni, nj, nk) * 3 + axis;
    int idx = edge_vertex[slot];
    if (idx >= 0) return idx;

    const double va = grid.at(ai, aj, ak);
    const double vb = grid.at(bi, bj, bk);
    const double t = (tau - va) / (vb - va);
    const Vec3 pa = grid.position(ai, aj, ak);
    const Vec3 pb = grid.position(bi, bj, bk);
    mesh.vertices.push_back(pa + t * (pb - pa));
    idx = static_cast<int>(mesh.vertices.size()) - 1;
    edge_vertex[slot] = idx;
    return idx;
  };

  for (int k = 0; k + 1 < nz; ++k)
    for (int j = 0; j + 1 < ny; ++j)
      for (int i = 0; i + 1 < nx; ++i) {
        int config = 0;
        for (int c = 0; c < 8; ++c)
          if (grid.at(i + kCorner[c][0], j + kCorner[c][1], k + kCorner[c][2]) > tau)
            config |= 1 << c;
        const std::vector<int>& tris = table.tris[config];
        for (std::size_t t = 0; t + 2 < tris.size(); t += 3) {
          const int v0 = edge_vertex_index(i, j, k, tris[t]);
          const int v1 = edge_vertex_index(i, j, k, tris[t + 1]);
          const int v2 = edge_vertex_index(i, j, k, tris[t + 2]);
          if (v0 == v1 || v1 == v2 || v0 == v2) continue;
          mesh.triangles.push_back({v0, v1, v2});
        }
      }
  return mesh;
}

TriangleMesh extract_mesh(const GaussianMixture3& m, double c, const Vec3i& dims, const Aabb& bounds) {
  return marching_cubes(voxelize_density(m, dims, bounds), iso_threshold(m, c));
}

TriangleMesh extract_mesh(const GaussianMixture3& m, double c, const Vec3i& dims) {
  return extract_mesh(m, c, dims, default_mesh_bounds(m));
}

}  // namespace gmshape

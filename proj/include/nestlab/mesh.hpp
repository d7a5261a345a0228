#pragma once

#include "nestlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

namespace nestlab {

/// Size limits shared by the mesh and spectral stages.
struct Budget {
  Index max_cells = 16384;     ///< M^n limit for build_mesh / enumerate_simplices
  Index dense_limit = 4000;    ///< vertex limit for a full dense eigendecomposition
};

struct Simplex {
  Word word;
  Index index = 0;              ///< lexicographic index among level-m words
  std::vector<Index> vertex_ids;  ///< the m-cell psi_w(V0), in V0 order
  double measure = 0.0;         ///< M^{-m} (times M^t on a truncation)
  double diameter = 0.0;        ///< L^{-m} diam K (times L^t)
};

struct Edge {
  Index u = 0;
  Index v = 0;
  int orbit = 0;
};

/// Uniform grids over the vertex coordinates at a few resolutions; a query
/// uses the grid whose bucket side is closest to the radius.
class SpatialIndex {
public:
  SpatialIndex() = default;
  SpatialIndex(const std::vector<double>& coords, int dim, double finest_side);

  /// Vertices with d(x, v) <= r (closed, relative slack 1e-9), ascending id.
  void query(const double* x, double r, std::vector<Index>& out) const;

  /// Calls fn(id, distance) for every vertex in the closed ball, unordered.
  template <class Fn>
  void visit(const double* x, double r, Fn&& fn) const;

  int levels() const { return static_cast<int>(grids_.size()); }

private:
  struct Grid {
    double side = 1.0;
    std::vector<std::int64_t> extent;  // buckets per axis
    std::vector<Index> offsets;        // CSR over buckets
    std::vector<Index> ids;
  };
  const Grid& pick(double r) const;

  std::vector<double> coords_;
  int dim_ = 0;
  std::vector<double> lo_;
  std::vector<Grid> grids_;
};

/// Level-n vertex set of K^<t> = L^t K with quadrature weights and cell incidence.
struct LevelMesh {
  std::shared_ptr<const FractalSpec> spec;
  int level = 0;
  int truncation = 0;
  int dim = 2;
  double scale = 1.0;  ///< L^t

  std::vector<double> coords;    ///< vertex-major, dim entries per vertex
  std::vector<double> weights;   ///< per-vertex measure
  std::vector<Index> cells;      ///< M^n x #V0 corner ids, cell-major
  std::vector<Index> incidence_offsets;  ///< vertex -> incident cells (CSR)
  std::vector<Index> incidence;
  std::vector<Edge> edges;       ///< every V0 pair of every cell
  std::vector<Index> boundary_ids;  ///< mesh ids of L^t V0
  SpatialIndex index;
  std::vector<double> outer_cloud;  ///< sample of X outside K^<t> near it
  double outer_margin = 0.0;

  Index vertex_count() const { return static_cast<Index>(weights.size()); }
  Index cell_count() const { return static_cast<Index>(cells.size()) / spec->boundary_size(); }
  const double* point(Index v) const { return &coords[static_cast<std::size_t>(v * dim)]; }
  Vec point_vec(Index v) const { return Eigen::Map<const Vec>(point(v), dim); }
  double distance(Index a, Index b) const;
  double distance(const double* x, Index b) const;
  /// Diameter of a level-m simplex in mesh coordinates.
  double cell_diameter(int m) const;
  double total_mass() const;

  /// Corner k of the level-m simplex with index idx.
  Index corner(int m, Index idx, int k) const;
  /// Level-n cells inside the level-m simplex idx: [first, last).
  std::pair<Index, Index> cell_range(int m, Index idx) const;
  Simplex simplex(int m, Index idx) const;
  /// Vertices of K_w (ascending).
  std::vector<Index> simplex_vertices(int m, Index idx) const;
  /// Level-m simplices sharing a corner with idx (excluding idx, ascending).
  std::vector<Index> neighbors(int m, Index idx) const;

  std::vector<Index> ball(const double* x, double r) const {
    std::vector<Index> out;
    index.query(x, r, out);
    return out;
  }
  Index nearest_vertex(const double* x, double* dist = nullptr) const;
};

LevelMesh build_mesh(std::shared_ptr<const FractalSpec> spec, int n, int t = 0, const Budget& budget = {});
std::shared_ptr<const LevelMesh> make_mesh(std::shared_ptr<const FractalSpec> spec, int n, int t = 0,
                                           const Budget& budget = {});

/// Real values on the vertices of a mesh.
struct DiscreteFunction {
  std::shared_ptr<const LevelMesh> mesh;
  Vec values;
};
std::vector<Simplex> enumerate_simplices(const FractalSpec& spec, int n, const Budget& budget = {});

/// Result of locate: level-m simplex indices.
struct Location {
  Index simplex = 0;                 ///< K_m(x), lowest index if x is a junction point
  std::vector<Index> star;           ///< K_m*(x)
  std::vector<Index> double_star;    ///< K_m**(x)
  std::vector<Index> meeting;        ///< all level-m simplices containing x
  bool junction = false;
};

Location locate(const LevelMesh& mesh, const double* x, int m);

/// Union of the vertex sets of several level-m simplices (ascending).
std::vector<Index> simplices_vertices(const LevelMesh& mesh, int m, const std::vector<Index>& ids);

/// True when the closed ball B(x, r) avoids the part of the blow-up outside
/// the truncation (conservative: uses a point cloud of the outer pieces).
bool ball_in_domain(const LevelMesh& mesh, const double* x, double r);

/// CSV export: vertex_id,x...,weight and u,v,orbit.
void write_mesh_csv(const LevelMesh& mesh, const std::string& vertices_path, const std::string& edges_path);

// ---------------------------------------------------------------------------

template <class Fn>
void SpatialIndex::visit(const double* x, double r, Fn&& fn) const {
  const Grid& g = pick(r);
  std::int64_t lo[8], hi[8], cur[8];
  for (int k = 0; k < dim_; ++k) {
    lo[k] = static_cast<std::int64_t>(std::floor((x[k] - r - lo_[k]) / g.side));
    hi[k] = static_cast<std::int64_t>(std::floor((x[k] + r - lo_[k]) / g.side));
    lo[k] = std::max<std::int64_t>(lo[k], 0);
    hi[k] = std::min<std::int64_t>(hi[k], g.extent[k] - 1);
    if (lo[k] > hi[k]) return;
    cur[k] = lo[k];
  }
  const double rr = r * (1.0 + 1e-9);
  const std::vector<double>& c = coords_;
  while (true) {
    std::int64_t b = 0;
    for (int k = dim_ - 1; k >= 0; --k) b = b * g.extent[k] + cur[k];
    for (Index p = g.offsets[b]; p < g.offsets[b + 1]; ++p) {
      const Index id = g.ids[p];
      const double* q = &c[static_cast<std::size_t>(id * dim_)];
      double s = 0.0;
      for (int k = 0; k < dim_; ++k) s += (x[k] - q[k]) * (x[k] - q[k]);
      const double d = std::sqrt(s);
      if (d <= rr) fn(id, d);
    }
    int k = 0;
    while (k < dim_ && cur[k] == hi[k]) {
      cur[k] = lo[k];
      ++k;
    }
    if (k == dim_) break;
    ++cur[k];
  }
}

}  // namespace nestlab

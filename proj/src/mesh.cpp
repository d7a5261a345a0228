#include "nestlab/mesh.hpp"

#include "nestlab/error.hpp"
#include "point_hash.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace nestlab {

namespace {

Index ipow(Index b, int e) {
  Index r = 1;
  for (int k = 0; k < e; ++k) r *= b;
  return r;
}

Index checked_cells(const FractalSpec& spec, int n, const Budget& budget, const char* stage) {
  if (n < 0) throw DomainError(std::string(stage) + ": level must be >= 0");
  Index c = 1;
  for (int k = 0; k < n; ++k) {
    c *= spec.M;
    if (c > budget.max_cells)
      throw BudgetError(stage, "level " + std::to_string(n) + " needs " + std::to_string(ipow(spec.M, n)) +
                                   " cells, above the limit max_cells=" + std::to_string(budget.max_cells));
  }
  return c;
}

// Affine parts of all level-n word maps: psi_w(x) = lin * x + trans[w].
void word_translations(const FractalSpec& spec, int n, Mat& lin, std::vector<Vec>& trans) {
  const int M = spec.M;
  lin = Mat::Identity(spec.dim, spec.dim);
  trans.assign(1, Vec::Zero(spec.dim));
  for (int k = 0; k < n; ++k) {
    std::vector<Vec> next;
    next.reserve(trans.size() * static_cast<std::size_t>(M));
    for (const Vec& a : trans)
      for (int i = 0; i < M; ++i) next.push_back(a + lin * spec.maps[i].translation);
    trans = std::move(next);
    lin = lin * (spec.maps[0].contraction * spec.maps[0].unitary);
  }
}

}  // namespace

// ---------------------------------------------------------------- SpatialIndex

SpatialIndex::SpatialIndex(const std::vector<double>& coords, int dim, double finest_side)
    : coords_(coords), dim_(dim) {
  const Index V = static_cast<Index>(coords.size()) / dim;
  lo_.assign(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  for (Index v = 0; v < V; ++v)
    for (int k = 0; k < dim; ++k) {
      lo_[k] = std::min(lo_[k], coords[v * dim + k]);
      hi[k] = std::max(hi[k], coords[v * dim + k]);
    }
  if (V == 0) return;
  double span = 0.0;
  for (int k = 0; k < dim; ++k) span = std::max(span, hi[k] - lo_[k]);
  double side = std::max(finest_side, 1e-12 * std::max(span, 1.0));
  auto bucket_count = [&](double s) {
    double total = 1.0;
    for (int k = 0; k < dim; ++k) total *= std::floor((hi[k] - lo_[k]) / s) + 1.0;
    return total;
  };
  while (bucket_count(side) > 4.0 * static_cast<double>(V) + 1024.0) side *= 2.0;
  while (true) {
    Grid g;
    g.side = side;
    Index total = 1;
    for (int k = 0; k < dim; ++k) {
      g.extent.push_back(static_cast<std::int64_t>(std::floor((hi[k] - lo_[k]) / side)) + 1);
      total *= g.extent.back();
    }
    g.offsets.assign(static_cast<std::size_t>(total + 1), 0);
    std::vector<Index> key(static_cast<std::size_t>(V));
    for (Index v = 0; v < V; ++v) {
      std::int64_t b = 0;
      for (int k = dim - 1; k >= 0; --k) {
        auto c = static_cast<std::int64_t>(std::floor((coords[v * dim + k] - lo_[k]) / side));
        c = std::clamp<std::int64_t>(c, 0, g.extent[k] - 1);
        b = b * g.extent[k] + c;
      }
      key[v] = b;
      ++g.offsets[b + 1];
    }
    for (Index b = 0; b < total; ++b) g.offsets[b + 1] += g.offsets[b];
    g.ids.resize(static_cast<std::size_t>(V));
    std::vector<Index> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (Index v = 0; v < V; ++v) g.ids[fill[key[v]]++] = v;
    grids_.push_back(std::move(g));
    if (total == 1) break;
    side *= 2.0;
  }
}

const SpatialIndex::Grid& SpatialIndex::pick(double r) const {
  for (const Grid& g : grids_)
    if (g.side >= 0.5 * r) return g;
  return grids_.back();
}

void SpatialIndex::query(const double* x, double r, std::vector<Index>& out) const {
  out.clear();
  if (grids_.empty()) return;
  visit(x, r, [&](Index id, double) { out.push_back(id); });
  std::sort(out.begin(), out.end());
}

// ---------------------------------------------------------------- LevelMesh

double LevelMesh::distance(Index a, Index b) const { return distance(point(a), b); }

double LevelMesh::distance(const double* x, Index b) const {
  const double* q = point(b);
  double s = 0.0;
  for (int k = 0; k < dim; ++k) s += (x[k] - q[k]) * (x[k] - q[k]);
  return std::sqrt(s);
}

double LevelMesh::cell_diameter(int m) const { return spec->diameter * scale * std::pow(spec->L, -m); }

double LevelMesh::total_mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

Index LevelMesh::corner(int m, Index idx, int k) const {
  const int M = spec->M;
  const Index span = ipow(M, level - m);
  const Index s = spec->boundary[static_cast<std::size_t>(k)];
  const Index cell = idx * span + s * ((span - 1) / (M - 1));
  return cells[static_cast<std::size_t>(cell * spec->boundary_size() + k)];
}

std::pair<Index, Index> LevelMesh::cell_range(int m, Index idx) const {
  const Index span = ipow(spec->M, level - m);
  return {idx * span, (idx + 1) * span};
}

Simplex LevelMesh::simplex(int m, Index idx) const {
  if (m < 0 || m > level) throw DomainError("simplex level outside [0, n]");
  if (idx < 0 || idx >= ipow(spec->M, m)) throw DomainError("simplex index out of range");
  Simplex s;
  s.word = Word::from_index(idx, m, spec->M);
  s.index = idx;
  for (int k = 0; k < spec->boundary_size(); ++k) s.vertex_ids.push_back(corner(m, idx, k));
  s.measure = std::pow(static_cast<double>(spec->M), truncation - m);
  s.diameter = cell_diameter(m);
  return s;
}

std::vector<Index> LevelMesh::simplex_vertices(int m, Index idx) const {
  auto [a, b] = cell_range(m, idx);
  const int B = spec->boundary_size();
  std::vector<Index> out(cells.begin() + a * B, cells.begin() + b * B);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Index> LevelMesh::neighbors(int m, Index idx) const {
  const Index span = ipow(spec->M, level - m);
  std::vector<Index> out;
  for (int k = 0; k < spec->boundary_size(); ++k) {
    const Index v = corner(m, idx, k);
    for (Index p = incidence_offsets[v]; p < incidence_offsets[v + 1]; ++p) {
      const Index anc = incidence[p] / span;
      if (anc != idx) out.push_back(anc);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Index LevelMesh::nearest_vertex(const double* x, double* dist) const {
  double r = cell_diameter(level);
  const double limit = 4.0 * cell_diameter(0);
  while (true) {
    Index best = -1;
    double bd = std::numeric_limits<double>::infinity();
    index.visit(x, r, [&](Index id, double d) {
      if (d < bd || (d == bd && id < best)) {
        bd = d;
        best = id;
      }
    });
    if (best >= 0) {
      if (dist) *dist = bd;
      return best;
    }
    if (r > limit) break;
    r *= 2.0;
  }
  if (dist) *dist = std::numeric_limits<double>::infinity();
  return -1;
}

LevelMesh build_mesh(std::shared_ptr<const FractalSpec> spec, int n, int t, const Budget& budget) {
  if (!spec) throw DomainError("build_mesh: null spec");
  if (t < 0) throw DomainError("build_mesh: truncation must be >= 0");
  const Index C = checked_cells(*spec, n, budget, "build_mesh");
  const int B = spec->boundary_size();
  const int M = spec->M;
  if (t > 0 && spec->fixed_points[0].norm() > 1e-12 * spec->diameter)
    throw DomainError("build_mesh: truncations need the first similitude to fix the origin");

  LevelMesh mesh;
  mesh.spec = spec;
  mesh.level = n;
  mesh.truncation = t;
  mesh.dim = spec->dim;
  mesh.scale = std::pow(spec->L, t);
  const int d = spec->dim;

  Mat lin;
  std::vector<Vec> trans;
  word_translations(*spec, n, lin, trans);

  const double h = mesh.cell_diameter(n);
  const double tol = 1e-9 * h;
  const double ambiguous = 1e-6 * h;
  detail::PointHash hash(d, 0.25 * h);
  mesh.cells.resize(static_cast<std::size_t>(C * B));
  std::vector<Vec> corner_base;
  for (const Vec& q : spec->boundary_points) corner_base.push_back(lin * q);
  Vec z(d);
  for (Index c = 0; c < C; ++c) {
    for (int k = 0; k < B; ++k) {
      z = mesh.scale * (corner_base[k] + trans[c]);
      double dist = 0.0;
      Index id = hash.nearest(z.data(), ambiguous, &dist);
      if (id >= 0 && dist > tol) {
        std::ostringstream os;
        os << "build_mesh: vertex dedup ambiguity between vertex " << id << " and corner " << k + 1
           << " of cell " << Word::from_index(c, n, M).to_string() << " (distance " << dist
           << "); IFS is ill-conditioned";
        throw ValidationError(os.str());
      }
      if (id < 0) {
        id = mesh.vertex_count();
        hash.insert(z.data(), id);
        mesh.coords.insert(mesh.coords.end(), z.data(), z.data() + d);
        mesh.weights.push_back(0.0);
      }
      mesh.cells[c * B + k] = id;
    }
  }
  const double w = std::pow(static_cast<double>(M), t - n) / B;
  for (Index v : mesh.cells) mesh.weights[v] += w;

  const Index V = mesh.vertex_count();
  mesh.incidence_offsets.assign(static_cast<std::size_t>(V + 1), 0);
  for (Index v : mesh.cells) ++mesh.incidence_offsets[v + 1];
  for (Index v = 0; v < V; ++v) mesh.incidence_offsets[v + 1] += mesh.incidence_offsets[v];
  mesh.incidence.resize(mesh.cells.size());
  {
    std::vector<Index> fill(mesh.incidence_offsets.begin(), mesh.incidence_offsets.end() - 1);
    for (Index c = 0; c < C; ++c)
      for (int k = 0; k < B; ++k) mesh.incidence[fill[mesh.cells[c * B + k]]++] = c;
  }
  mesh.edges.reserve(static_cast<std::size_t>(C) * spec->pairs.size());
  for (Index c = 0; c < C; ++c)
    for (const auto& pr : spec->pairs) mesh.edges.push_back({mesh.cells[c * B + pr.a], mesh.cells[c * B + pr.b], pr.orbit});

  mesh.index = SpatialIndex(mesh.coords, d, h);

  for (const Vec& q : spec->boundary_points) {
    Vec p = mesh.scale * q;
    double dist = 0.0;
    Index id = mesh.nearest_vertex(p.data(), &dist);
    if (id < 0 || dist > tol) throw ValidationError("build_mesh: boundary point missing from mesh");
    mesh.boundary_ids.push_back(id);
  }

  // outer pieces L^{t+1} psi_i(K), i != 0, sampled on a vertex cloud
  if (spec->fixed_points[0].norm() <= 1e-12 * spec->diameter) {
    int R = 0;
    while (R < n + 1 && detail::level_vertex_cloud(*spec, R + 1).cols() * (M - 1) <= 40000) ++R;
    const Mat cloud = detail::level_vertex_cloud(*spec, R);
    const double big = mesh.scale * spec->L;
    for (int i = 1; i < M; ++i)
      for (Index j = 0; j < cloud.cols(); ++j) {
        Vec p = big * spec->maps[i].apply(cloud.col(j));
        mesh.outer_cloud.insert(mesh.outer_cloud.end(), p.data(), p.data() + d);
      }
    mesh.outer_margin = big * spec->diameter * std::pow(spec->L, -(R + 1));
  }
  return mesh;
}

std::shared_ptr<const LevelMesh> make_mesh(std::shared_ptr<const FractalSpec> spec, int n, int t,
                                           const Budget& budget) {
  return std::make_shared<const LevelMesh>(build_mesh(std::move(spec), n, t, budget));
}

std::vector<Simplex> enumerate_simplices(const FractalSpec& spec, int n, const Budget& budget) {
  const Index C = checked_cells(spec, n, budget, "enumerate_simplices");
  Mat lin;
  std::vector<Vec> trans;
  word_translations(spec, n, lin, trans);
  // vertex ids by coordinate hashing, same convention as build_mesh with t = 0
  const double h = spec.diameter * std::pow(spec.L, -n);
  detail::PointHash hash(spec.dim, 0.25 * h);
  Index next = 0;
  std::vector<Simplex> out;
  out.reserve(static_cast<std::size_t>(C));
  for (Index c = 0; c < C; ++c) {
    Simplex s;
    s.word = Word::from_index(c, n, spec.M);
    s.index = c;
    s.measure = std::pow(static_cast<double>(spec.M), -n);
    s.diameter = h;
    for (const Vec& q : spec.boundary_points) {
      Vec z = lin * q + trans[c];
      Index id = hash.nearest(z.data(), 1e-9 * h);
      if (id < 0) {
        id = next++;
        hash.insert(z.data(), id);
      }
      s.vertex_ids.push_back(id);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Index> simplices_vertices(const LevelMesh& mesh, int m, const std::vector<Index>& ids) {
  std::vector<Index> out;
  for (Index s : ids) {
    auto v = mesh.simplex_vertices(m, s);
    out.insert(out.end(), v.begin(), v.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Location locate(const LevelMesh& mesh, const double* x, int m) {
  if (m < 0 || m > mesh.level) throw DomainError("locate: level outside [0, n]");
  Location loc;
  double dist = 0.0;
  const Index v = mesh.nearest_vertex(x, &dist);
  const double h = mesh.cell_diameter(mesh.level);
  if (v < 0 || dist > h) throw DomainError("locate: point is not on the attractor (within mesh resolution)");
  const Index span = ipow(mesh.spec->M, mesh.level - m);
  Index cell = -1;
  if (dist <= 1e-9 * h) {
    std::vector<Index> anc;
    for (Index p = mesh.incidence_offsets[v]; p < mesh.incidence_offsets[v + 1]; ++p)
      anc.push_back(mesh.incidence[p] / span);
    std::sort(anc.begin(), anc.end());
    anc.erase(std::unique(anc.begin(), anc.end()), anc.end());
    loc.meeting = anc;
    loc.junction = anc.size() > 1;
    loc.simplex = anc.front();
  } else {
    // choose the level-n cell whose refined cloud passes closest to x
    std::vector<Index> near = mesh.ball(x, h);
    std::set<Index> cand;
    for (Index u : near)
      for (Index p = mesh.incidence_offsets[u]; p < mesh.incidence_offsets[u + 1]; ++p) cand.insert(mesh.incidence[p]);
    const Mat cloud = detail::level_vertex_cloud(*mesh.spec, 2);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Map<const Vec> xv(x, mesh.dim);
    for (Index c : cand) {
      Similitude s = mesh.spec->word_map(Word::from_index(c, mesh.level, mesh.spec->M));
      for (Index j = 0; j < cloud.cols(); ++j) {
        const double d = (mesh.scale * s.apply(cloud.col(j)) - xv).norm();
        if (d < best) {
          best = d;
          cell = c;
        }
      }
    }
    loc.simplex = cell / span;
    loc.meeting = {loc.simplex};
  }
  if (m == 0) {
    loc.star = loc.double_star = {0};
    return loc;
  }
  loc.star = mesh.neighbors(m, loc.simplex);
  loc.star.push_back(loc.simplex);
  std::sort(loc.star.begin(), loc.star.end());
  std::vector<Index> ds = loc.star;
  for (Index s : loc.star) {
    auto nb = mesh.neighbors(m, s);
    ds.insert(ds.end(), nb.begin(), nb.end());
  }
  std::sort(ds.begin(), ds.end());
  ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
  loc.double_star = std::move(ds);
  return loc;
}

bool ball_in_domain(const LevelMesh& mesh, const double* x, double r) {
  const double lim = r + mesh.outer_margin;
  const std::size_t d = static_cast<std::size_t>(mesh.dim);
  for (std::size_t p = 0; p < mesh.outer_cloud.size(); p += d) {
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (x[k] - mesh.outer_cloud[p + k]) * (x[k] - mesh.outer_cloud[p + k]);
    if (s <= lim * lim) return false;
  }
  return true;
}

void write_mesh_csv(const LevelMesh& mesh, const std::string& vertices_path, const std::string& edges_path) {
  std::ofstream vf(vertices_path, std::ios::binary);
  if (!vf) throw UsageError("cannot write '" + vertices_path + "'");
  vf << "vertex_id";
  const char* axes = "xyzuvwpq";
  for (int k = 0; k < mesh.dim; ++k) vf << ',' << axes[k];
  vf << ",weight\n";
  char buf[64];
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    vf << v;
    for (int k = 0; k < mesh.dim; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", mesh.point(v)[k]);
      vf << ',' << buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", mesh.weights[v]);
    vf << ',' << buf << '\n';
  }
  std::ofstream ef(edges_path, std::ios::binary);
  if (!ef) throw UsageError("cannot write '" + edges_path + "'");
  ef << "u,v,orbit\n";
  for (const Edge& e : mesh.edges) ef << e.u << ',' << e.v << ',' << e.orbit << '\n';
}

}  // namespace nestlab

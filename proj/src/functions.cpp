#include "nestlab/functions.hpp"

#include "nestlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace nestlab {

double Region::mass() const {
  double s = 0.0;
  for (Index v : ids) s += weight[static_cast<std::size_t>(v)];
  return s;
}

Region region_all(const LevelMesh& mesh) {
  Region r;
  r.weight = mesh.weights;
  r.ids.resize(static_cast<std::size_t>(mesh.vertex_count()));
  for (Index v = 0; v < mesh.vertex_count(); ++v) r.ids[v] = v;
  return r;
}

Region region_simplices(const LevelMesh& mesh, int m, const std::vector<Index>& ids) {
  const int B = mesh.spec->boundary_size();
  const double w = std::pow(static_cast<double>(mesh.spec->M), mesh.truncation - mesh.level) / B;
  Region r;
  r.weight.assign(static_cast<std::size_t>(mesh.vertex_count()), 0.0);
  std::vector<Index> sorted = ids;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (Index s : sorted) {
    auto [a, b] = mesh.cell_range(m, s);
    for (Index c = a; c < b; ++c)
      for (int k = 0; k < B; ++k) r.weight[mesh.cells[c * B + k]] += w;
  }
  for (Index v = 0; v < mesh.vertex_count(); ++v)
    if (r.weight[v] > 0.0) r.ids.push_back(v);
  return r;
}

Region region_simplex(const LevelMesh& mesh, int m, Index idx) { return region_simplices(mesh, m, {idx}); }

Region region_vertices(const LevelMesh& mesh, std::vector<Index> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  Region r;
  r.weight.assign(static_cast<std::size_t>(mesh.vertex_count()), 0.0);
  for (Index v : ids) r.weight[v] = mesh.weights[v];
  r.ids = std::move(ids);
  return r;
}

Region region_ball(const LevelMesh& mesh, const double* x, double r) {
  return region_vertices(mesh, mesh.ball(x, r));
}

DiscreteFunction make_test_function(const std::string& kind, const TestFunctionParams& params, const EnergyForm& form,
                                    const SpectralData* spectral) {
  const LevelMesh& mesh = form.mesh();
  const Index V = mesh.vertex_count();
  if (kind == "harmonic") {
    std::vector<double> b = params.boundary;
    if (b.empty()) {
      b.assign(static_cast<std::size_t>(mesh.spec->boundary_size()), 0.0);
      b[0] = 1.0;
    }
    return harmonic_extension(form, b);
  }
  if (kind == "eigenfunction") {
    if (!spectral) throw UsageError("eigenfunction test functions need spectral data");
    if (params.eigen_index < 0 || params.eigen_index >= spectral->count())
      throw UsageError("eigenfunction index out of range");
    return {form.mesh_ptr(), spectral->eigenvectors.col(params.eigen_index)};
  }
  if (kind == "indicator") {
    Vec f = Vec::Zero(V);
    if (!params.set.empty()) {
      for (Index v : params.set) {
        if (v < 0 || v >= V) throw UsageError("indicator set contains an invalid vertex id");
        f[v] = 1.0;
      }
    } else {
      if (params.simplex_level < 0 || params.simplex_level > mesh.level)
        throw UsageError("indicator simplex level outside [0, n]");
      for (Index v : mesh.simplex_vertices(params.simplex_level, params.simplex_index)) f[v] = 1.0;
    }
    return {form.mesh_ptr(), f};
  }
  if (kind == "random-cellwise") {
    const int j = std::clamp(params.cell_level, 0, mesh.level);
    std::vector<Index> nodes;
    Index cells = 1;
    for (int k = 0; k < j; ++k) cells *= mesh.spec->M;
    for (Index s = 0; s < cells; ++s)
      for (int k = 0; k < mesh.spec->boundary_size(); ++k) nodes.push_back(mesh.corner(j, s, k));
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::mt19937_64 rng(params.seed);
    Vec vals(static_cast<Index>(nodes.size()));
    for (Index k = 0; k < vals.size(); ++k) vals[k] = std::generate_canonical<double, 53>(rng);
    return {form.mesh_ptr(), dirichlet_solve(form, nodes, vals)};
  }
  if (kind == "coordinate") {
    if (params.axis < 0 || params.axis >= mesh.dim) throw UsageError("coordinate axis out of range");
    Vec f(V);
    for (Index v = 0; v < V; ++v) f[v] = mesh.point(v)[params.axis];
    return {form.mesh_ptr(), f};
  }
  throw UsageError("unknown test function kind '" + kind +
                   "' (expected harmonic, eigenfunction, indicator, random-cellwise, coordinate)");
}

double lp_norm(const Vec& f, const Region& F, double p) {
  double s = 0.0;
  for (Index v : F.ids) {
    const double a = std::abs(f[v]);
    s += (p == 1.0 ? a : p == 2.0 ? a * a : std::pow(a, p)) * F.weight[v];
  }
  return std::pow(s, 1.0 / p);
}

double sup_norm(const Vec& f, const Region& F) {
  double s = 0.0;
  for (Index v : F.ids) s = std::max(s, std::abs(f[v]));
  return s;
}

double region_mean(const Vec& f, const Region& F) {
  double s = 0.0, m = 0.0;
  for (Index v : F.ids) {
    s += f[v] * F.weight[v];
    m += F.weight[v];
  }
  return s / m;
}

double mesh_mean(const Vec& f, const LevelMesh& mesh) {
  double s = 0.0, m = 0.0;
  for (Index v = 0; v < mesh.vertex_count(); ++v) {
    s += f[v] * mesh.weights[v];
    m += mesh.weights[v];
  }
  return s / m;
}

}  // namespace nestlab

#include "nestlab/dirichlet.hpp"

#include "nestlab/error.hpp"
#include "point_hash.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>

namespace nestlab {

namespace {

struct Level1Network {
  Index vertices = 0;
  std::vector<Index> corner_ids;  // M x B
  std::vector<Index> boundary;    // mesh id of each V0 point
};

Level1Network level1_network(const FractalSpec& spec) {
  const int B = spec.boundary_size();
  const double h = spec.diameter / spec.L;
  detail::PointHash hash(spec.dim, 0.25 * h);
  Level1Network net;
  for (int i = 0; i < spec.M; ++i) {
    for (int b = 0; b < B; ++b) {
      Vec z = spec.maps[i].apply(spec.boundary_points[b]);
      Index id = hash.nearest(z.data(), 1e-9 * h);
      if (id < 0) {
        id = net.vertices++;
        hash.insert(z.data(), id);
      }
      net.corner_ids.push_back(id);
    }
  }
  for (const Vec& q : spec.boundary_points) {
    Index id = hash.nearest(q.data(), 1e-9 * h);
    if (id < 0) throw ValidationError("boundary point is not a level-1 vertex");
    net.boundary.push_back(id);
  }
  return net;
}

}  // namespace

std::vector<double> level1_trace(const FractalSpec& spec, const std::vector<double>& pattern) {
  const int B = spec.boundary_size();
  Level1Network net = level1_network(spec);
  const Index V = net.vertices;
  Mat lap = Mat::Zero(V, V);
  for (int i = 0; i < spec.M; ++i)
    for (const auto& pr : spec.pairs) {
      const Index u = net.corner_ids[i * B + pr.a];
      const Index v = net.corner_ids[i * B + pr.b];
      const double c = pattern[pr.orbit];
      lap(u, u) += c;
      lap(v, v) += c;
      lap(u, v) -= c;
      lap(v, u) -= c;
    }
  std::vector<char> is_b(static_cast<std::size_t>(V), 0);
  for (Index b : net.boundary) is_b[b] = 1;
  std::vector<Index> interior;
  for (Index v = 0; v < V; ++v)
    if (!is_b[v]) interior.push_back(v);
  const Index I = static_cast<Index>(interior.size());
  Mat Lbb(B, B), Lbi(B, I), Lii(I, I);
  for (int a = 0; a < B; ++a) {
    for (int b = 0; b < B; ++b) Lbb(a, b) = lap(net.boundary[a], net.boundary[b]);
    for (Index j = 0; j < I; ++j) Lbi(a, j) = lap(net.boundary[a], interior[j]);
  }
  for (Index i = 0; i < I; ++i)
    for (Index j = 0; j < I; ++j) Lii(i, j) = lap(interior[i], interior[j]);
  Mat S = Lbb;
  if (I > 0) {
    Eigen::LDLT<Mat> ldlt(Lii);
    if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14 * std::max(1.0, Lii.norm()))
      throw ConvergenceError("renormalization: interior system of the level-1 network is singular", 0.0);
    S -= Lbi * ldlt.solve(Lbi.transpose());
  }
  std::vector<double> out;
  for (const auto& pr : spec.pairs) out.push_back(-S(pr.a, pr.b));
  return out;
}

Renormalization renormalize_conductances(const FractalSpec& spec, double tol, int max_iter) {
  const int K = spec.orbit_count;
  std::vector<double> c(static_cast<std::size_t>(K), 1.0);
  std::vector<int> members(static_cast<std::size_t>(K), 0);
  for (const auto& pr : spec.pairs) ++members[pr.orbit];
  Renormalization out;
  double change = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    std::vector<double> tr = level1_trace(spec, c);
    std::vector<double> avg(static_cast<std::size_t>(K), 0.0);
    for (std::size_t k = 0; k < spec.pairs.size(); ++k) avg[spec.pairs[k].orbit] += tr[k];
    double mx = 0.0;
    for (int o = 0; o < K; ++o) {
      avg[o] /= members[o];
      if (avg[o] < 0.0 && avg[o] > -1e-14) avg[o] = 0.0;
      mx = std::max(mx, avg[o]);
    }
    if (!(mx > 0.0)) throw ConvergenceError("renormalization: trace vanished", 0.0);
    change = 0.0;
    for (int o = 0; o < K; ++o) {
      const double next = std::max(avg[o] / mx, 0.0);
      change = std::max(change, std::abs(next - c[o]));
      c[o] = next;
    }
    out.iterations = it;
    if (change <= tol) {
      std::vector<double> final_tr = level1_trace(spec, c);
      double tmax = 0.0;
      for (double v : final_tr) tmax = std::max(tmax, v);
      out.rho = 1.0 / tmax;
      double res = 0.0;
      for (std::size_t k = 0; k < spec.pairs.size(); ++k)
        res = std::max(res, std::abs(final_tr[k] - c[spec.pairs[k].orbit] / out.rho));
      out.residual = res;
      out.conductance = c;
      if (res > 1e-10)
        throw ConvergenceError("renormalization: trace is not proportional to the pattern", res);
      return out;
    }
  }
  throw ConvergenceError("renormalization did not converge in " + std::to_string(max_iter) + " iterations", change);
}

EnergyForm::EnergyForm(std::shared_ptr<const LevelMesh> mesh) : mesh_(std::move(mesh)) {
  const FractalSpec& spec = *mesh_->spec;
  factor_ = std::pow(spec.rho, mesh_->level - mesh_->truncation);
  const Index V = mesh_->vertex_count();
  cond_.reserve(mesh_->edges.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh_->edges.size() * 4);
  for (const Edge& e : mesh_->edges) {
    const double c = factor_ * spec.conductance[e.orbit];
    cond_.push_back(c);
    if (c == 0.0) continue;
    trip.emplace_back(e.u, e.u, c);
    trip.emplace_back(e.v, e.v, c);
    trip.emplace_back(e.u, e.v, -c);
    trip.emplace_back(e.v, e.u, -c);
  }
  lap_.resize(V, V);
  lap_.setFromTriplets(trip.begin(), trip.end());
  lap_.makeCompressed();
}

double EnergyForm::energy(const Vec& f) const {
  if (f.size() != mesh_->vertex_count()) throw DomainError("energy: function does not live on this mesh");
  double s = 0.0;
  for (std::size_t k = 0; k < cond_.size(); ++k) {
    const Edge& e = mesh_->edges[k];
    const double d = f[e.u] - f[e.v];
    s += cond_[k] * d * d;
  }
  return s;
}

double EnergyForm::energy(const DiscreteFunction& f) const {
  if (f.mesh && f.mesh.get() != mesh_.get() && f.mesh->vertex_count() != mesh_->vertex_count())
    throw DomainError("energy: function does not live on this mesh");
  return energy(f.values);
}

Vec dirichlet_solve(const EnergyForm& form, const std::vector<Index>& fixed, const Vec& fixed_values) {
  const Index V = form.mesh().vertex_count();
  if (static_cast<Index>(fixed.size()) != fixed_values.size())
    throw DomainError("dirichlet_solve: value count mismatch");
  for (Index k = 0; k < fixed_values.size(); ++k)
    if (!std::isfinite(fixed_values[k])) throw DomainError("dirichlet_solve: boundary values must be finite");
  std::vector<Index> pos(static_cast<std::size_t>(V), -1);
  std::vector<char> fixed_mask(static_cast<std::size_t>(V), 0);
  for (Index v : fixed) fixed_mask[v] = 1;
  Index I = 0;
  for (Index v = 0; v < V; ++v)
    if (!fixed_mask[v]) pos[v] = I++;
  Vec f = Vec::Zero(V);
  for (std::size_t k = 0; k < fixed.size(); ++k) f[fixed[k]] = fixed_values[static_cast<Index>(k)];
  if (I == 0) return f;

  const SpMat& lap = form.laplacian();
  std::vector<Eigen::Triplet<double>> trip;
  Vec rhs = Vec::Zero(I);
  for (Index col = 0; col < lap.outerSize(); ++col)
    for (SpMat::InnerIterator it(lap, col); it; ++it) {
      const Index r = it.row();
      if (fixed_mask[r]) continue;
      if (fixed_mask[col])
        rhs[pos[r]] -= it.value() * f[col];
      else
        trip.emplace_back(pos[r], pos[col], it.value());
    }
  SpMat A(I, I);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SpMat> solver(A);
  if (solver.info() != Eigen::Success || solver.vectorD().minCoeff() <= 0.0)
    throw ConvergenceError("dirichlet_solve: interior system is singular (disconnected mesh?)", 0.0);
  Vec u = solver.solve(rhs);
  for (Index v = 0; v < V; ++v)
    if (!fixed_mask[v]) f[v] = u[pos[v]];
  return f;
}

DiscreteFunction harmonic_extension(const EnergyForm& form, const std::vector<double>& boundary_values) {
  const LevelMesh& mesh = form.mesh();
  if (static_cast<int>(boundary_values.size()) != mesh.spec->boundary_size())
    throw DomainError("harmonic_extension: need one value per boundary point");
  std::vector<std::pair<Index, double>> pairs;
  for (std::size_t k = 0; k < boundary_values.size(); ++k) pairs.emplace_back(mesh.boundary_ids[k], boundary_values[k]);
  std::sort(pairs.begin(), pairs.end());
  std::vector<Index> ids;
  Vec vals(static_cast<Index>(pairs.size()));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    ids.push_back(pairs[k].first);
    vals[static_cast<Index>(k)] = pairs[k].second;
  }
  return {form.mesh_ptr(), dirichlet_solve(form, ids, vals)};
}

}  // namespace nestlab

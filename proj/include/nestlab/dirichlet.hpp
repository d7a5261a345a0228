#pragma once

#include "nestlab/geometry.hpp"
#include "nestlab/mesh.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace nestlab {

using SpMat = Eigen::SparseMatrix<double>;

struct Renormalization {
  std::vector<double> conductance;  ///< per orbit, max 1
  double rho = 1.0;
  int iterations = 0;
  double residual = 0.0;  ///< max |trace - rho^{-1} * level-0 form| entry
};

/// Fixed point of the pattern map c -> orbit-averaged trace of the level-1
/// network on V0. Needs boundary, pairs and orbits already filled.
Renormalization renormalize_conductances(const FractalSpec& spec, double tol = 1e-12, int max_iter = 500);

/// Trace (Schur complement onto V0) of the level-1 network built from `pattern`;
/// returned as conductances per V0 pair (same order as spec.pairs).
std::vector<double> level1_trace(const FractalSpec& spec, const std::vector<double>& pattern);

/// E_n(f) = rho^{n-t} sum_cells sum_{pairs} c_orbit (f(x) - f(y))^2.
class EnergyForm {
public:
  explicit EnergyForm(std::shared_ptr<const LevelMesh> mesh);

  const LevelMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const LevelMesh> mesh_ptr() const { return mesh_; }
  /// Conductance of every mesh edge (orbit value times the level factor).
  const std::vector<double>& edge_conductance() const { return cond_; }
  double level_factor() const { return factor_; }

  double energy(const Vec& f) const;
  double energy(const DiscreteFunction& f) const;
  /// Graph Laplacian: (Lap f)(x) = sum_y c_xy (f(x) - f(y)); E(f) = f^T Lap f.
  const SpMat& laplacian() const { return lap_; }

private:
  std::shared_ptr<const LevelMesh> mesh_;
  std::vector<double> cond_;
  double factor_ = 1.0;
  SpMat lap_;
};

/// Minimizer of E_n with prescribed values on `fixed` (ascending ids).
Vec dirichlet_solve(const EnergyForm& form, const std::vector<Index>& fixed, const Vec& fixed_values);

/// Harmonic function on the mesh with the given values on V0 (V0 order).
DiscreteFunction harmonic_extension(const EnergyForm& form, const std::vector<double>& boundary_values);

}  // namespace nestlab

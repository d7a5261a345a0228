#pragma once

#include "nestlab/dirichlet.hpp"
#include "nestlab/mesh.hpp"
#include "nestlab/spectral.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nestlab {

/// A vertex subset F with its quadrature weights (dense, zero outside F).
struct Region {
  std::vector<Index> ids;  ///< ascending
  std::vector<double> weight;

  bool contains(Index v) const { return weight[static_cast<std::size_t>(v)] > 0.0; }
  double mass() const;
  Index size() const { return static_cast<Index>(ids.size()); }
};

Region region_all(const LevelMesh& mesh);
/// K_w for a level-m simplex: weights of the cells inside it only, so mass = M^{t-m}.
Region region_simplex(const LevelMesh& mesh, int m, Index idx);
/// Union of level-m simplices, same weight convention.
Region region_simplices(const LevelMesh& mesh, int m, const std::vector<Index>& ids);
/// Closed ball B(x, r) with the full vertex weights.
Region region_ball(const LevelMesh& mesh, const double* x, double r);
/// Arbitrary vertex subset with the full vertex weights.
Region region_vertices(const LevelMesh& mesh, std::vector<Index> ids);

/// Parameters for make_test_function. Unused fields are ignored by a kind.
struct TestFunctionParams {
  std::vector<double> boundary;  ///< harmonic: values on V0 (default 1, 0, ..., 0)
  int eigen_index = 1;           ///< eigenfunction
  int simplex_level = 1;         ///< indicator of a simplex
  Index simplex_index = 0;
  std::vector<Index> set;        ///< indicator of an explicit vertex set (when non-empty)
  std::uint64_t seed = 0;        ///< random-cellwise
  int cell_level = 2;            ///< random-cellwise: level of the random nodes
  int axis = 0;                  ///< coordinate
};

/// kind: "harmonic", "eigenfunction", "indicator", "random-cellwise", "coordinate".
/// The eigenfunction kind needs spectral data. Unknown kinds raise UsageError.
DiscreteFunction make_test_function(const std::string& kind, const TestFunctionParams& params, const EnergyForm& form,
                                    const SpectralData* spectral = nullptr);

double lp_norm(const Vec& f, const Region& F, double p);
double sup_norm(const Vec& f, const Region& F);
double region_mean(const Vec& f, const Region& F);
/// Weighted mean over the whole mesh.
double mesh_mean(const Vec& f, const LevelMesh& mesh);

}  // namespace nestlab

#pragma once

#include "nestlab/dirichlet.hpp"
#include "nestlab/fit.hpp"
#include "nestlab/mesh.hpp"

#include <memory>
#include <string>
#include <vector>

namespace nestlab {

/// Eigenpairs of the generator W^{-1} Lap, ascending; eigenvectors are
/// orthonormal in the weighted inner product <f, g>_w = sum f g w.
struct SpectralData {
  std::shared_ptr<const LevelMesh> mesh;
  Vec eigenvalues;
  Mat eigenvectors;  ///< V x k, column j is phi_j
  Vec residuals;     ///< ||L phi_j - lambda_j phi_j||_w
  bool full = true;
  double lambda_max = 0.0;  ///< largest generator eigenvalue (estimated when partial)

  Index count() const { return eigenvalues.size(); }
  /// Mesh-resolvable time window [10 / lambda_max, 0.1 L^{t d_w}]; for a
  /// partial spectrum the lower end is also at least 30 / lambda_{k-1}.
  double window_lo() const;
  double window_hi() const;
  void check_window(double t) const;
  /// Bound on |p_t(x,y)| contributed by the discarded eigenpairs (0 when full).
  double tail_bound(double t) const;
};

/// k < 0 requests the full spectrum (dense, vertex count within the dense
/// budget); otherwise the k smallest pairs by shift-invert Lanczos.
SpectralData spectral_decompose(const EnergyForm& form, int k = -1, const Budget& budget = {});

struct HeatKernelSlice {
  double t = 0.0;
  Mat values;  ///< p_t(x, y)
};

HeatKernelSlice heat_kernel(const SpectralData& sd, double t, const Budget& budget = {});
double heat_kernel_entry(const SpectralData& sd, Index x, Index y, double t);
Vec heat_kernel_row(const SpectralData& sd, Index x, double t);
Vec semigroup_apply(const SpectralData& sd, const Vec& f, double t);
DiscreteFunction semigroup_apply(const SpectralData& sd, const DiscreteFunction& f, double t);

/// sup_{x != y} |P_t g(x) - P_t g(y)| / (d(x,y)^{d_w - d_h} t^{-(1 - d_h/d_w)} ||g||_inf).
double weak_be_ratio(const SpectralData& sd, const Vec& g, double t);

struct HeatAsymptotics {
  ExponentFit diagonal;             ///< log p_t(x,x) vs log t, target -d_h/d_w
  std::vector<double> times;
  std::vector<double> weak_be;      ///< max over the supplied g, per time
  bool off_diagonal_fitted = false;
  ExponentFit off_diagonal;         ///< log(-log(p_t(x,y)/p_t(x,x))) vs log(d^{d_w}/t), target 1/(d_w-1)
};

/// Throws WindowError when a grid time lies outside the resolvable window.
HeatAsymptotics heat_asymptotics(const SpectralData& sd, const std::vector<double>& times, Index x,
                                 const std::vector<Vec>& gs, double tolerance = 0.1);

/// `count` log-spaced times spanning [lo, hi] (defaults: the resolvable window).
std::vector<double> time_grid(const SpectralData& sd, int count, double lo = 0.0, double hi = 0.0);

void write_spectrum_csv(const SpectralData& sd, const std::string& path);
void write_heat_csv(const HeatKernelSlice& slice, const std::string& path);

}  // namespace nestlab

#include "nestlab/spectral.hpp"

#include "nestlab/error.hpp"
#include "nestlab/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <random>

namespace nestlab {

namespace {

// Make the entry of largest magnitude (lowest index on ties) positive.
void fix_sign(Eigen::Ref<Vec> v) {
  Index best = 0;
  for (Index i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best]) * (1.0 + 1e-9)) best = i;
  if (v[best] < 0.0) v = -v;
}

SpMat symmetrized(const EnergyForm& form, Vec& inv_sqrt_w) {
  const LevelMesh& mesh = form.mesh();
  const Index V = mesh.vertex_count();
  inv_sqrt_w.resize(V);
  for (Index v = 0; v < V; ++v) inv_sqrt_w[v] = 1.0 / std::sqrt(mesh.weights[v]);
  SpMat S = form.laplacian();
  for (Index col = 0; col < S.outerSize(); ++col)
    for (SpMat::InnerIterator it(S, col); it; ++it) it.valueRef() *= inv_sqrt_w[it.row()] * inv_sqrt_w[col];
  return S;
}

// Largest eigenvalue of S by plain Lanczos (no reorthogonalization needed for the extreme value).
double largest_eigenvalue(const SpMat& S) {
  const Index V = S.rows();
  const int steps = static_cast<int>(std::min<Index>(V, 80));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Vec q(V);
  for (Index i = 0; i < V; ++i) q[i] = U(rng);
  q.normalize();
  Vec qprev = Vec::Zero(V);
  std::vector<double> alpha, beta;
  double b = 0.0;
  Mat Q(V, steps);
  for (int j = 0; j < steps; ++j) {
    Q.col(j) = q;
    Vec z = S * q;
    const double a = q.dot(z);
    z -= a * q + b * qprev;
    z -= Q.leftCols(j + 1) * (Q.leftCols(j + 1).transpose() * z);
    alpha.push_back(a);
    b = z.norm();
    if (b < 1e-14 * std::abs(a) || j + 1 == steps) break;
    beta.push_back(b);
    qprev = q;
    q = z / b;
  }
  const Index m = static_cast<Index>(alpha.size());
  Mat T = Mat::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    T(i, i) = alpha[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(T, Eigen::EigenvaluesOnly);
  // Ritz values approach lambda_max from below; pad by the last residual coupling.
  return es.eigenvalues().maxCoeff() * (1.0 + 1e-6);
}

SpectralData dense_decompose(const EnergyForm& form) {
  Vec isw;
  SpMat S = symmetrized(form, isw);
  Mat D = Mat(S);
  Eigen::SelfAdjointEigenSolver<Mat> es(D);
  if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
  SpectralData sd;
  sd.mesh = form.mesh_ptr();
  sd.full = true;
  sd.eigenvalues = es.eigenvalues();
  Mat U = es.eigenvectors();
  const Index V = D.rows();
  Mat R = D * U - U * sd.eigenvalues.asDiagonal();
  sd.residuals = R.colwise().norm().transpose();
  for (Index j = 0; j < V; ++j) fix_sign(U.col(j));
  sd.eigenvectors = isw.asDiagonal() * U;
  sd.lambda_max = sd.eigenvalues[V - 1];
  return sd;
}

// Block shift-invert subspace iteration: handles the repeated eigenvalues of
// symmetric fractals, which a single-vector Krylov space cannot resolve.
SpectralData subspace_decompose(const EnergyForm& form, int k) {
  Vec isw;
  SpMat S = symmetrized(form, isw);
  const Index V = S.rows();
  const LevelMesh& mesh = form.mesh();
  double avg_diag = 0.0;
  for (Index i = 0; i < V; ++i) avg_diag += S.coeff(i, i);
  avg_diag /= V;
  const double tau = 1e-6 * avg_diag;

  // (S + tau)^{-1} = W^{1/2} (Lap + tau W)^{-1} W^{1/2}
  SpMat A = form.laplacian();
  for (Index v = 0; v < V; ++v) A.coeffRef(v, v) += tau * mesh.weights[v];
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw ConvergenceError("shift-invert factorization failed", 0.0);
  const Vec sw = isw.cwiseInverse();

  const Index b = std::min<Index>(V, std::max<Index>(2 * k, k + 20));
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> Ud(-1.0, 1.0);
  Mat X(V, b);
  for (Index j = 0; j < b; ++j)
    for (Index i = 0; i < V; ++i) X(i, j) = Ud(rng);
  X.col(0).setOnes();

  SpectralData sd;
  sd.mesh = form.mesh_ptr();
  sd.full = false;
  double worst = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 400; ++iter) {
    Mat Y = sw.asDiagonal() * X;
    Y = ldlt.solve(Y);
    Y = sw.asDiagonal() * Y;
    Eigen::HouseholderQR<Mat> qr(Y);
    Mat Q = qr.householderQ() * Mat::Identity(V, b);
    Mat SQ = S * Q;
    Mat H = Q.transpose() * SQ;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Mat> es(H);
    X = Q * es.eigenvectors();  // ascending Ritz values
    Mat SX = SQ * es.eigenvectors();
    worst = 0.0;
    Vec res(k);
    for (Index j = 0; j < k; ++j) {
      res[j] = (SX.col(j) - es.eigenvalues()[j] * X.col(j)).norm();
      worst = std::max(worst, res[j] / std::max(1.0, std::abs(es.eigenvalues()[j])));
    }
    if (worst <= 1e-10 || iter == 399) {
      if (worst > 1e-8) throw ConvergenceError("subspace iteration did not reach the residual target", worst);
      sd.eigenvalues = es.eigenvalues().head(k);
      sd.residuals = res;
      Mat U = X.leftCols(k);
      for (Index j = 0; j < k; ++j) fix_sign(U.col(j));
      sd.eigenvectors = isw.asDiagonal() * U;
      break;
    }
  }
  sd.lambda_max = largest_eigenvalue(S);
  return sd;
}

}  // namespace

double SpectralData::window_lo() const {
  double lo = 10.0 / lambda_max;
  if (!full && count() > 1) lo = std::max(lo, 30.0 / eigenvalues[count() - 1]);
  return lo;
}

double SpectralData::window_hi() const {
  return 0.1 * std::pow(mesh->scale, mesh->spec->d_w);
}

void SpectralData::check_window(double t) const {
  const double lo = window_lo(), hi = window_hi();
  if (!(t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12))) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "time %.6g outside the resolvable window [%.6g, %.6g]", t, lo, hi);
    throw WindowError(buf);
  }
}

double SpectralData::tail_bound(double t) const {
  if (full) return 0.0;
  double wmin = *std::min_element(mesh->weights.begin(), mesh->weights.end());
  return std::exp(-eigenvalues[count() - 1] * t) / wmin;
}

SpectralData spectral_decompose(const EnergyForm& form, int k, const Budget& budget) {
  const Index V = form.mesh().vertex_count();
  if (k < 0 || k >= V) {
    if (V > budget.dense_limit)
      throw BudgetError("spectral_decompose", std::to_string(V) + " vertices exceed the dense limit " +
                                                  std::to_string(budget.dense_limit) + "; request a partial spectrum");
    return dense_decompose(form);
  }
  if (k > 200) throw BudgetError("spectral_decompose", "partial spectra are limited to k <= 200");
  if (k == 0) throw DomainError("spectral_decompose: k must be positive");
  return subspace_decompose(form, k);
}

HeatKernelSlice heat_kernel(const SpectralData& sd, double t, const Budget& budget) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  const Index V = sd.mesh->vertex_count();
  if (V > budget.dense_limit) throw BudgetError("heat_kernel", "kernel matrix exceeds the dense limit");
  Vec e = (-t * sd.eigenvalues.array()).exp().matrix();
  // modes below 1e-20 of the constant one are invisible in double precision; dropping
  // them also keeps subnormals out of the product
  Index k = 0;
  while (k < e.size() && e[k] >= 1e-20) ++k;
  HeatKernelSlice s;
  s.t = t;
  const Mat scaled = sd.eigenvectors.leftCols(k) * e.head(k).asDiagonal();
  s.values.noalias() = scaled * sd.eigenvectors.leftCols(k).transpose();
  return s;
}

double heat_kernel_entry(const SpectralData& sd, Index x, Index y, double t) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  double s = 0.0;
  for (Index j = 0; j < sd.count(); ++j)
    s += std::exp(-sd.eigenvalues[j] * t) * sd.eigenvectors(x, j) * sd.eigenvectors(y, j);
  return s;
}

Vec heat_kernel_row(const SpectralData& sd, Index x, double t) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  Vec c = (-t * sd.eigenvalues.array()).exp().matrix().cwiseProduct(sd.eigenvectors.row(x).transpose());
  return sd.eigenvectors * c;
}

Vec semigroup_apply(const SpectralData& sd, const Vec& f, double t) {
  if (!(t > 0.0)) throw DomainError("semigroup_apply: t must be positive");
  const Vec& w = Eigen::Map<const Vec>(sd.mesh->weights.data(), sd.mesh->vertex_count());
  if (f.size() != w.size()) throw DomainError("semigroup_apply: function does not live on this mesh");
  Vec c = sd.eigenvectors.transpose() * f.cwiseProduct(w);
  c = c.cwiseProduct((-t * sd.eigenvalues.array()).exp().matrix());
  return sd.eigenvectors * c;
}

DiscreteFunction semigroup_apply(const SpectralData& sd, const DiscreteFunction& f, double t) {
  return {sd.mesh, semigroup_apply(sd, f.values, t)};
}

double weak_be_ratio(const SpectralData& sd, const Vec& g, double t) {
  const LevelMesh& mesh = *sd.mesh;
  const FractalSpec& spec = *mesh.spec;
  const double ginf = g.cwiseAbs().maxCoeff();
  if (ginf == 0.0) return 0.0;
  const Vec u = semigroup_apply(sd, g, t);
  const double gamma = spec.d_w - spec.d_h;
  const Index V = mesh.vertex_count();
  std::vector<double> row(static_cast<std::size_t>(V), 0.0);
  parallel_for(V, [&](Index x) {
    double best = 0.0;
    for (Index y = x + 1; y < V; ++y) {
      const double num = std::abs(u[x] - u[y]);
      if (num == 0.0) continue;
      best = std::max(best, num / std::pow(mesh.distance(x, y), gamma));
    }
    row[x] = best;
  });
  double sup = 0.0;
  for (double r : row) sup = std::max(sup, r);
  return sup / (std::pow(t, -(1.0 - spec.d_h / spec.d_w)) * ginf);
}

HeatAsymptotics heat_asymptotics(const SpectralData& sd, const std::vector<double>& times, Index x,
                                 const std::vector<Vec>& gs, double tolerance) {
  const FractalSpec& spec = *sd.mesh->spec;
  for (double t : times) sd.check_window(t);
  HeatAsymptotics out;
  out.times = times;
  std::vector<double> diag;
  for (double t : times) diag.push_back(heat_kernel_entry(sd, x, x, t));
  out.diagonal = fit_exponent(times, diag, -spec.d_h / spec.d_w, tolerance);
  for (double t : times) {
    double best = 0.0;
    for (const Vec& g : gs) best = std::max(best, weak_be_ratio(sd, g, t));
    out.weak_be.push_back(best);
  }
  // off-diagonal profile at the central grid time
  if (!times.empty()) {
    const double t = times[times.size() / 2];
    const Vec row = heat_kernel_row(sd, x, t);
    const double pxx = row[x];
    std::vector<double> s, q;
    for (Index y = 0; y < row.size(); ++y) {
      if (y == x || !(row[y] > 0.0) || !(row[y] < pxx)) continue;
      const double arg = std::pow(sd.mesh->distance(x, y), spec.d_w) / t;
      if (arg <= 1.0) continue;
      s.push_back(arg);
      q.push_back(-std::log(row[y] / pxx));
    }
    try {
      out.off_diagonal = fit_exponent(s, q, 1.0 / (spec.d_w - 1.0), tolerance);
      out.off_diagonal_fitted = true;
    } catch (const FitError&) {
      out.off_diagonal_fitted = false;
    }
  }
  return out;
}

std::vector<double> time_grid(const SpectralData& sd, int count, double lo, double hi) {
  if (lo <= 0.0) lo = sd.window_lo();
  if (hi <= 0.0) hi = sd.window_hi();
  if (count < 2 || !(hi > lo)) throw WindowError("time grid needs count >= 2 and an increasing range");
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
  out.front() = lo;
  out.back() = hi;
  return out;
}

void write_spectrum_csv(const SpectralData& sd, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << "j,lambda\n";
  char buf[64];
  for (Index j = 0; j < sd.count(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", sd.eigenvalues[j]);
    f << j << ',' << buf << '\n';
  }
}

void write_heat_csv(const HeatKernelSlice& slice, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << "x_id,y_id,p_t\n";
  char buf[64];
  for (Index x = 0; x < slice.values.rows(); ++x)
    for (Index y = 0; y < slice.values.cols(); ++y) {
      std::snprintf(buf, sizeof buf, "%.17g", slice.values(x, y));
      f << x << ',' << y << ',' << buf << '\n';
    }
}

}  // namespace nestlab

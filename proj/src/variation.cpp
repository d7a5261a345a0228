#include "nestlab/variation.hpp"

#include "nestlab/error.hpp"
#include "nestlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace nestlab {

namespace {

inline double powp(double a, double p) {
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

void check_p(double p) {
  if (!(p >= 1.0 && p <= 2.0)) throw DomainError("variation exponent p must lie in [1, 2]");
}

// Sums row[i] over i in index order (deterministic for any worker count).
double ordered_sum(const std::vector<double>& row) {
  double s = 0.0;
  for (double v : row) s += v;
  return s;
}

double ks_entry(const LevelMesh& mesh, const Vec& f, const Region& F, double r, double p, double* raw_out) {
  const FractalSpec& spec = *mesh.spec;
  std::vector<double> row(F.ids.size(), 0.0);
  const bool p1 = p == 1.0;
  parallel_for(static_cast<Index>(F.ids.size()), [&](Index i) {
    const Index x = F.ids[i];
    const double fx = f[x];
    double acc = 0.0, mass = 0.0;
    mesh.index.visit(mesh.point(x), r, [&](Index y, double) {
      mass += mesh.weights[y];
      const double wy = F.weight[y];
      if (wy > 0.0) acc += powp(std::abs(fx - f[y]), p) * wy;
    });
    row[i] = p1 ? F.weight[x] * acc : F.weight[x] * acc / mass;
  });
  const double raw = ordered_sum(row);
  *raw_out = raw;
  if (p1) return std::pow(r, -2.0 * spec.d_h) * raw;
  return std::pow(r, -spec.alpha(p) * spec.d_w) * std::pow(raw, 1.0 / p);
}

double sg_entry(const LevelMesh& mesh, const Vec& f, const Region& F, double t, double p, double* raw_out) {
  const FractalSpec& spec = *mesh.spec;
  const double rt = std::pow(t, 1.0 / spec.d_w);
  const double cut = subgaussian_cutoff(spec, t);
  const double e = spec.d_w / (spec.d_w - 1.0);
  std::vector<double> row(F.ids.size(), 0.0);
  parallel_for(static_cast<Index>(F.ids.size()), [&](Index i) {
    const Index x = F.ids[i];
    const double fx = f[x];
    double acc = 0.0;
    mesh.index.visit(mesh.point(x), cut, [&](Index y, double d) {
      const double wy = F.weight[y];
      if (wy <= 0.0) return;
      const double diff = std::abs(fx - f[y]);
      if (diff == 0.0) return;
      acc += std::exp(-std::pow(d / rt, e)) * powp(diff, p) * wy;
    });
    row[i] = F.weight[x] * acc;
  });
  const double raw = ordered_sum(row);
  *raw_out = raw;
  return std::pow(t, -(spec.alpha(p) + spec.d_h / (p * spec.d_w))) * std::pow(raw, 1.0 / p);
}

void finish_profile(VariationProfile& prof) {
  if (prof.entries.empty()) throw ResolutionError("no resolvable scale for the variation (mesh too coarse)");
  prof.estimate = std::numeric_limits<double>::infinity();
  for (const auto& e : prof.entries) prof.estimate = std::min(prof.estimate, e.normalized);
  prof.finest = prof.entries.back().normalized;
}

VariationProfile profile_for_levels(const LevelMesh& mesh, const Vec& f, const Region& F, double p,
                                    VariationKind kind, const std::vector<int>& ks) {
  check_p(p);
  if (F.ids.empty()) throw DomainError("variation: empty restriction set");
  if (f.size() != mesh.vertex_count()) throw DomainError("variation: function does not live on this mesh");
  VariationProfile prof;
  prof.kind = kind;
  prof.p = p;
  for (int k : ks) {
    VariationEntry e;
    e.k = k;
    const double r = ks_radius(mesh, k);
    if (kind == VariationKind::KS) {
      e.scale = r;
      e.normalized = ks_entry(mesh, f, F, r, p, &e.raw);
    } else {
      e.scale = std::pow(r, mesh.spec->d_w);
      e.normalized = sg_entry(mesh, f, F, e.scale, p, &e.raw);
    }
    prof.entries.push_back(e);
  }
  finish_profile(prof);
  return prof;
}

}  // namespace

const char* kind_name(VariationKind k) { return k == VariationKind::KS ? "KS" : "sub-Gaussian"; }

double ks_radius(const LevelMesh& mesh, int k) { return mesh.spec->beta * mesh.scale * std::pow(mesh.spec->L, -k); }

int finest_level(const LevelMesh& mesh) {
  const FractalSpec& spec = *mesh.spec;
  double d0 = std::numeric_limits<double>::infinity();
  for (const auto& pr : spec.pairs) d0 = std::min(d0, (spec.boundary_points[pr.a] - spec.boundary_points[pr.b]).norm());
  const double edge = d0 * mesh.scale * std::pow(spec.L, -mesh.level);
  int k = mesh.level - 1;
  while (k >= 0 && ks_radius(mesh, k) < edge * (1.0 - 1e-9)) --k;
  return k;
}

double subgaussian_cutoff(const FractalSpec& spec, double t) {
  return std::pow(t, 1.0 / spec.d_w) * std::pow(std::log(1e14), (spec.d_w - 1.0) / spec.d_w);
}

VariationProfile variation(const LevelMesh& mesh, const Vec& f, const Region& F, double p, VariationKind kind,
                           int k_min, int k_max) {
  if (k_max < 0) k_max = finest_level(mesh);
  k_max = std::min(k_max, finest_level(mesh));
  std::vector<int> ks;
  for (int k = std::max(k_min, 0); k <= k_max; ++k) ks.push_back(k);
  return profile_for_levels(mesh, f, F, p, kind, ks);
}

VariationProfile variation_below(const LevelMesh& mesh, const Vec& f, const Region& F, double p, VariationKind kind,
                                 double r_max) {
  std::vector<int> ks;
  for (int k = 0; k <= finest_level(mesh); ++k)
    if (ks_radius(mesh, k) <= r_max * (1.0 + 1e-12)) ks.push_back(k);
  return profile_for_levels(mesh, f, F, p, kind, ks);
}

double raw_double_sum(const LevelMesh& mesh, const Vec& f, const Region& F, double r, double p) {
  check_p(p);
  std::vector<double> row(F.ids.size(), 0.0);
  parallel_for(static_cast<Index>(F.ids.size()), [&](Index i) {
    const Index x = F.ids[i];
    const double fx = f[x];
    double acc = 0.0;
    mesh.index.visit(mesh.point(x), r, [&](Index y, double) {
      const double wy = F.weight[y];
      if (wy > 0.0) acc += powp(std::abs(fx - f[y]), p) * wy;
    });
    row[i] = F.weight[x] * acc;
  });
  return ordered_sum(row);
}

double ks_subgaussian_constant(const LevelMesh& mesh, const Region& F, double r, double p) {
  if (p == 1.0) return std::exp(1.0);
  double min_mass = std::numeric_limits<double>::infinity();
  for (Index x : F.ids) {
    double mass = 0.0;
    mesh.index.visit(mesh.point(x), r, [&](Index y, double) { mass += mesh.weights[y]; });
    min_mass = std::min(min_mass, mass);
  }
  return std::pow(std::exp(1.0) * std::pow(r, mesh.spec->d_h) / min_mass, 1.0 / p);
}

double besov_seminorm(const SpectralData& sd, const Vec& f, double p, double alpha, const std::vector<double>& times) {
  check_p(p);
  const LevelMesh& mesh = *sd.mesh;
  const Index V = mesh.vertex_count();
  double sup = 0.0;
  for (double t : times) {
    sd.check_window(t);
    Vec e = (-t * sd.eigenvalues.array()).exp().matrix();
    std::vector<double> row(static_cast<std::size_t>(V), 0.0);
    parallel_for(V, [&](Index x) {
      Vec c = e.cwiseProduct(sd.eigenvectors.row(x).transpose());
      Vec px = sd.eigenvectors * c;
      double acc = 0.0;
      for (Index y = 0; y < V; ++y) acc += px[y] * powp(std::abs(f[x] - f[y]), p) * mesh.weights[y];
      row[x] = mesh.weights[x] * acc;
    });
    const double s = std::max(0.0, ordered_sum(row));
    sup = std::max(sup, std::pow(t, -alpha) * std::pow(s, 1.0 / p));
  }
  return sup;
}

Vec moving_average(const LevelMesh& mesh, const Vec& f, double s) {
  if (!(s > 0.0)) throw DomainError("moving_average: s must be positive");
  const Index V = mesh.vertex_count();
  Vec out(V);
  parallel_for(V, [&](Index x) {
    double acc = 0.0, mass = 0.0;
    mesh.index.visit(mesh.point(x), s, [&](Index y, double) {
      acc += f[y] * mesh.weights[y];
      mass += mesh.weights[y];
    });
    out[x] = acc / mass;
  });
  return out;
}

std::vector<std::pair<int, Vec>> truncations(const Vec& f) {
  if (f.size() == 0) return {};
  const double mn = f.minCoeff();
  if (mn < 0.0) throw DomainError("truncations: f must be nonnegative; shift it by -min f first");
  const double mx = f.maxCoeff();
  std::vector<std::pair<int, Vec>> out;
  if (!(mx > 0.0)) return out;
  const int kmax = static_cast<int>(std::floor(std::log2(mx)));
  for (int k = kmax; k >= kmax - 60; --k) {
    const double c = std::ldexp(1.0, k);
    Vec fk = (f.array() - c).max(0.0).min(c).matrix();
    if (fk.maxCoeff() > 0.0) out.emplace_back(k, std::move(fk));
  }
  return out;
}

LevelSets level_sets(const Vec& f) {
  std::vector<double> vals(f.data(), f.data() + f.size());
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  std::vector<double> th;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) th.push_back(0.5 * (vals[i] + vals[i + 1]));
  // indicators cut at the upper value: a midpoint can round onto it when the values are one ulp apart
  LevelSets ls;
  ls.thresholds = th;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    ls.indicators.push_back((f.array() >= vals[i + 1]).cast<double>().matrix());
    ls.weights.push_back(vals[i + 1] - vals[i]);
  }
  return ls;
}

LevelSets level_sets(const Vec& f, const std::vector<double>& thresholds) {
  LevelSets ls;
  ls.thresholds = thresholds;
  for (double t : thresholds) ls.indicators.push_back((f.array() > t).cast<double>().matrix());
  return ls;
}

MaximalField maximal_function(const LevelMesh& mesh, const Vec& f, double p, std::vector<int> levels) {
  check_p(p);
  const FractalSpec& spec = *mesh.spec;
  const int n = finest_level(mesh) + 1;
  if (levels.empty())
    for (int k = 1; k <= n - 2; ++k) levels.push_back(k);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  for (int k : levels)
    if (k < 0 || k > n - 2) throw ResolutionError("maximal_function: radius level must leave a finer level below it");
  if (levels.empty()) throw ResolutionError("maximal_function: mesh too coarse for any radius level");

  const Index V = mesh.vertex_count();
  const int jmin = levels.front() + 1;
  // per-scale unrestricted row sums and ball masses
  std::vector<std::vector<double>> R(static_cast<std::size_t>(n)), mass(static_cast<std::size_t>(n));
  for (int j = jmin; j <= n - 1; ++j) {
    R[j].assign(static_cast<std::size_t>(V), 0.0);
    mass[j].assign(static_cast<std::size_t>(V), 0.0);
    const double rj = ks_radius(mesh, j);
    parallel_for(V, [&](Index y) {
      double acc = 0.0, m = 0.0;
      mesh.index.visit(mesh.point(y), rj, [&](Index z, double) {
        acc += powp(std::abs(f[y] - f[z]), p) * mesh.weights[z];
        m += mesh.weights[z];
      });
      R[j][y] = acc;
      mass[j][y] = m;
    });
  }

  MaximalField out;
  out.levels = levels;
  for (int k : levels) out.radii.push_back(ks_radius(mesh, k));
  out.g = Vec::Zero(V);
  const bool p1 = p == 1.0;
  parallel_for(V, [&](Index x) {
    const double* px = mesh.point(x);
    double best = 0.0;
    std::vector<std::pair<Index, double>> ball;
    for (int k : levels) {
      const double rk = ks_radius(mesh, k);
      const double rlim = rk * (1.0 + 1e-9);
      ball.clear();
      double bmass = 0.0;
      mesh.index.visit(px, rk, [&](Index y, double d) {
        ball.emplace_back(y, d);
        bmass += mesh.weights[y];
      });
      std::sort(ball.begin(), ball.end());
      double var = std::numeric_limits<double>::infinity();
      for (int j = k + 1; j <= n - 1; ++j) {
        const double rj = ks_radius(mesh, j);
        const double rj_slack = rj * (1.0 + 1e-9);
        double s = 0.0;
        for (const auto& [y, d] : ball) {
          double row;
          if (d + rj_slack <= rlim) {
            row = R[j][y];
          } else {
            row = 0.0;
            mesh.index.visit(mesh.point(y), rj, [&](Index z, double) {
              if (mesh.distance(px, z) <= rlim) row += powp(std::abs(f[y] - f[z]), p) * mesh.weights[z];
            });
          }
          s += mesh.weights[y] * (p1 ? row : row / mass[j][y]);
        }
        const double v = p1 ? std::pow(rj, -2.0 * spec.d_h) * s
                            : std::pow(rj, -spec.alpha(p) * spec.d_w) * std::pow(s, 1.0 / p);
        var = std::min(var, v);
      }
      best = std::max(best, std::pow(bmass, -1.0 / p) * var);
    }
    out.g[x] = best;
  });
  return out;
}

void write_profile_csv(const std::vector<VariationProfile>& profiles, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write '" + path + "'");
  os << "kind,p,r_or_t,raw,normalized\n";
  char buf[200];
  for (const auto& pr : profiles)
    for (const auto& e : pr.entries) {
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g\n", kind_name(pr.kind), pr.p, e.scale, e.raw,
                    e.normalized);
      os << buf;
    }
}

void write_maximal_csv(const MaximalField& field, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write '" + path + "'");
  os << "vertex_id,g\n";
  char buf[64];
  for (Index v = 0; v < field.g.size(); ++v) {
    std::snprintf(buf, sizeof buf, "%.17g", field.g[v]);
    os << v << ',' << buf << '\n';
  }
}

}  // namespace nestlab

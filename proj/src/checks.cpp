#include "nestlab/checks.hpp"

#include "nestlab/error.hpp"
#include "nestlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>

namespace nestlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double powp(double a, double p) {
  if (p == 1.0) return a;
  if (p == 2.0) return a * a;
  return std::pow(a, p);
}

double zero_for(const Vec& f) { return 1e-12 * std::max(1.0, f.cwiseAbs().maxCoeff()); }

Index ipow(Index b, int e) {
  Index r = 1;
  for (int k = 0; k < e; ++k) r *= b;
  return r;
}

Index pick(std::mt19937_64& rng, Index n) { return static_cast<Index>(rng() % static_cast<std::uint64_t>(n)); }

// ||f - c||_{L^p(F)}
double lp_dev(const Vec& f, const Region& F, double c, double p) {
  double s = 0.0;
  for (Index v : F.ids) s += powp(std::abs(f[v] - c), p) * F.weight[v];
  return std::pow(s, 1.0 / p);
}

double oscillation(const Vec& f, const std::vector<Index>& ids) {
  double lo = kInf, hi = -kInf;
  for (Index v : ids) {
    lo = std::min(lo, f[v]);
    hi = std::max(hi, f[v]);
  }
  return ids.empty() ? 0.0 : hi - lo;
}

// Relative scale of a level-m simplex: L^{t-m}.
double rel_scale(const LevelMesh& mesh, int m) { return mesh.scale * std::pow(mesh.spec->L, -m); }

double var_estimate(const Workspace& ws, const LevelMesh& mesh, const Vec& f, const Region& F, double p,
                    VariationKind kind, int kmin) {
  if (kind == VariationKind::SubGaussian) kmin = std::max(kmin, ws.config().subgaussian_kmin);
  if (kmin > finest_level(mesh)) throw ResolutionError("no resolvable variation scale below the locus");
  return variation(mesh, f, F, p, kind, kmin).estimate;
}

std::vector<Index> locus_simplices(const LevelMesh& mesh, Locus locus, int m, Index idx) {
  std::set<Index> s{idx};
  if (locus == Locus::Star || locus == Locus::DoubleStar)
    for (Index nb : mesh.neighbors(m, idx)) s.insert(nb);
  if (locus == Locus::DoubleStar) {
    std::vector<Index> star(s.begin(), s.end());
    for (Index a : star)
      for (Index nb : mesh.neighbors(m, a)) s.insert(nb);
  }
  return {s.begin(), s.end()};
}

CheckReport base_report(const Workspace& ws, const std::string& id, double p) {
  CheckReport rep;
  rep.id = id;
  rep.p = p;
  rep.stability_limit = ws.config().stability_factor;
  return rep;
}

void require_vicsek(const Workspace& ws, const std::string& what) {
  if (!ws.spec().is_vicsek_family())
    throw UnsupportedCase(what + " is only established on the Vicsek family (the L^1 argument needs a treelike set); '" +
                          ws.spec().name + "' is not one");
}

int clamp_level(const LevelMesh& mesh, int k) { return std::clamp(k, 0, finest_level(mesh)); }

void require_balls(CheckReport& rep) {
  if (!rep.records.empty()) return;
  rep.unsupported = true;
  rep.notes.push_back("every ball was rejected by the domain guard (" + std::to_string(rep.skipped) +
                      " tried); lower A or raise the truncation");
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<SuiteItem> default_suite(const CheckConfig& cfg, double p) {
  std::vector<SuiteItem> out;
  out.push_back({"harmonic", "harmonic", {}});
  for (int i = 0; i < cfg.random_count; ++i) {
    SuiteItem it;
    it.params.seed = cfg.seed + static_cast<std::uint64_t>(i);
    it.id = "random-" + std::to_string(it.params.seed);
    it.kind = "random-cellwise";
    out.push_back(it);
  }
  if (p == 1.0) {
    SuiteItem it;
    it.id = "indicator-1.0";
    it.kind = "indicator";
    it.params.simplex_level = 1;
    it.params.simplex_index = 0;
    out.push_back(it);
  }
  return out;
}

Workspace::Workspace(CheckConfig cfg) : Workspace(cfg, nullptr) {}

Workspace::Workspace(CheckConfig cfg, std::shared_ptr<const FractalSpec> spec) : cfg_(std::move(cfg)) {
  if (spec)
    spec_ = std::move(spec);
  else if (!cfg_.ifs_file.empty())
    spec_ = build_spec(parse_ifs_file(cfg_.ifs_file));
  else
    spec_ = build_spec(cfg_.fractal);
  mesh_ = make_mesh(spec_, cfg_.level, cfg_.truncation, cfg_.budget);
  form_ = std::make_shared<EnergyForm>(mesh_);
}

double Workspace::A() const {
  const double a = cfg_.A > 0.0 ? cfg_.A : spec_->default_A();
  if (!(a > 1.0)) throw UsageError("ball enlargement factor A must exceed 1");
  return a;
}

int Workspace::heat_level() const {
  ensure_heat();
  return heat_mesh_->level;
}

void Workspace::ensure_heat() const {
  if (heat_mesh_) return;
  if (cfg_.heat_level >= 0) {
    const int n = std::min(cfg_.heat_level, cfg_.level);
    heat_mesh_ = n == cfg_.level ? mesh_ : make_mesh(spec_, n, cfg_.truncation, cfg_.budget);
  } else {
    for (int n = cfg_.level; n >= 1; --n) {
      auto m = n == cfg_.level ? mesh_ : make_mesh(spec_, n, cfg_.truncation, cfg_.budget);
      if (m->vertex_count() <= cfg_.budget.dense_limit) {
        heat_mesh_ = m;
        break;
      }
    }
    if (!heat_mesh_) throw BudgetError("spectral_decompose", "no level fits the dense limit");
  }
  heat_form_ = heat_mesh_ == mesh_ ? form_ : std::make_shared<EnergyForm>(heat_mesh_);
}

const LevelMesh& Workspace::heat_mesh() const {
  ensure_heat();
  return *heat_mesh_;
}

std::shared_ptr<const LevelMesh> Workspace::heat_mesh_ptr() const {
  ensure_heat();
  return heat_mesh_;
}

const EnergyForm& Workspace::heat_form() const {
  ensure_heat();
  return *heat_form_;
}

const SpectralData& Workspace::spectral() const {
  ensure_heat();
  if (!spectral_) spectral_ = std::make_shared<SpectralData>(spectral_decompose(*heat_form_, -1, cfg_.budget));
  return *spectral_;
}

std::vector<NamedFunction> Workspace::evaluate(const std::vector<SuiteItem>& items, const EnergyForm& form,
                                               const SpectralData* sd) const {
  std::vector<NamedFunction> out;
  for (const auto& it : items) {
    if (it.kind == "eigenfunction" && !sd)
      throw UsageError("eigenfunction suite items need the check mesh to be the spectral mesh (set heat_level = level)");
    out.push_back({it.id, it.kind, make_test_function(it.kind, it.params, form, sd).values});
  }
  return out;
}

std::vector<NamedFunction> Workspace::suite(double p) const {
  const auto items = cfg_.suite.empty() ? default_suite(cfg_, p) : cfg_.suite;
  const bool need_sd = std::any_of(items.begin(), items.end(), [](const SuiteItem& s) { return s.kind == "eigenfunction"; });
  const SpectralData* sd = nullptr;
  if (need_sd && heat_level() == cfg_.level) sd = &spectral();
  return evaluate(items, *form_, sd);
}

std::vector<NamedFunction> Workspace::heat_suite(double p) const {
  const auto items = cfg_.suite.empty() ? default_suite(cfg_, p) : cfg_.suite;
  const bool need_sd = std::any_of(items.begin(), items.end(), [](const SuiteItem& s) { return s.kind == "eigenfunction"; });
  return evaluate(items, heat_form(), need_sd ? &spectral() : nullptr);
}

const std::vector<BallCenter>& Workspace::ball_centers() const {
  if (!centers_.empty() || cfg_.ball_centers <= 0) return centers_;
  const LevelMesh& mesh = *mesh_;
  const FractalSpec& spec = *spec_;
  const int B = spec.boundary_size();
  std::mt19937_64 rng(cfg_.seed ^ 0x5bd1e995ULL);

  const int jl = std::min(2, mesh.level);
  std::vector<Index> junction;
  for (Index s = 0; s < ipow(spec.M, jl); ++s)
    for (int k = 0; k < B; ++k) junction.push_back(mesh.corner(jl, s, k));
  std::sort(junction.begin(), junction.end());
  junction.erase(std::unique(junction.begin(), junction.end()), junction.end());

  // the first level-1 junction always takes part: simplex indicators are cut there
  const Index first = junction_vertex(mesh);
  centers_.push_back({mesh.point_vec(first), true});
  junction.erase(std::remove(junction.begin(), junction.end(), first), junction.end());
  const int nj = std::max(1, cfg_.ball_centers / 2);
  for (int i = 1; i < nj && !junction.empty(); ++i) {
    const Index at = pick(rng, static_cast<Index>(junction.size()));
    centers_.push_back({mesh.point_vec(junction[at]), true});
    junction.erase(junction.begin() + at);
  }
  const Index cells = mesh.cell_count();
  while (static_cast<int>(centers_.size()) < cfg_.ball_centers) {
    const Index c = pick(rng, cells);
    const int i = static_cast<int>(pick(rng, spec.M));
    const int k = static_cast<int>(pick(rng, B));
    const Vec y = spec.maps[i].apply(spec.boundary_points[k]);
    bool on_v0 = false;
    for (const Vec& q : spec.boundary_points) on_v0 = on_v0 || (y - q).norm() < 1e-9 * spec.diameter;
    if (on_v0) continue;
    const Vec x = mesh.scale * spec.word_map(Word::from_index(c, mesh.level, spec.M)).apply(y);
    centers_.push_back({x, false});
  }
  return centers_;
}

const Vec& Workspace::maximal(const NamedFunction& f, double p) const {
  auto it = maximal_.find({f.id, p});
  if (it == maximal_.end()) it = maximal_.emplace(std::make_pair(f.id, p), maximal_function(*mesh_, f.values, p).g).first;
  return it->second;
}

std::vector<int> Workspace::simplex_levels() const {
  if (!cfg_.simplex_levels.empty()) return cfg_.simplex_levels;
  std::vector<int> out;
  for (int m = 1; m <= std::min(4, finest_level(*mesh_) - 1); ++m) out.push_back(m);
  return out;
}

std::vector<int> Workspace::ball_levels() const {
  return cfg_.ball_levels.empty() ? simplex_levels() : cfg_.ball_levels;
}

// ---------------------------------------------------------------------------

double CheckReport::metric(const std::string& name) const {
  for (const auto& [k, v] : metrics)
    if (k == name) return v;
  return std::numeric_limits<double>::quiet_NaN();
}

void add_instance(CheckReport& rep, InstanceRecord rec, double zero) {
  if (rec.rhs > 0.0) {
    rec.ratio = rec.lhs / rec.rhs;
  } else if (rec.lhs <= zero) {
    rec.ratio = 0.0;
    rec.degenerate = true;
  } else {
    rec.ratio = kInf;
    rep.hard = true;
    rep.hard_ok = false;
    rep.notes.push_back("RHS vanishes with positive LHS for " + rec.function + " on " + rec.locus);
  }
  rep.records.push_back(std::move(rec));
}

void finalize(CheckReport& rep) {
  std::map<int, ScaleGroup> groups;
  for (const auto& r : rep.records) {
    auto [it, fresh] = groups.try_emplace(r.level);
    ScaleGroup& g = it->second;
    if (fresh) {
      g.level = r.level;
      g.scale = r.scale;
    }
    if (r.degenerate) {
      ++g.degenerate;
      continue;
    }
    ++g.instances;
    g.max_ratio = std::max(g.max_ratio, r.ratio);
  }
  rep.scales.clear();
  rep.degenerate = 0;
  rep.max_ratio = 0.0;
  double lo = kInf, hi = 0.0;
  int live = 0;
  for (auto& [lvl, g] : groups) {
    rep.scales.push_back(g);
    rep.degenerate += g.degenerate;
    rep.max_ratio = std::max(rep.max_ratio, g.max_ratio);
    if (g.instances > 0 && g.max_ratio > 0.0) {
      lo = std::min(lo, g.max_ratio);
      hi = std::max(hi, g.max_ratio);
      ++live;
    }
  }
  rep.stability = live >= 2 ? hi / lo : 1.0;
  bool ok = rep.hard_ok && !rep.unsupported && std::isfinite(rep.max_ratio);
  if (rep.use_stability) ok = ok && rep.stability <= rep.stability_limit;
  for (const auto& f : rep.fits) ok = ok && f.fit.pass;
  rep.pass = ok;
}

const char* locus_name(Locus l) {
  switch (l) {
    case Locus::Simplex: return "simplex";
    case Locus::Star: return "star";
    case Locus::DoubleStar: return "double-star";
    case Locus::Ball: return "ball";
  }
  return "?";
}

// ---------------------------------------------------------------------------

CheckReport check_poincare(const Workspace& ws, double p, Locus locus, VariationKind kind) {
  CheckReport rep = base_report(ws, std::string("poincare-") + locus_name(locus), p);
  if (locus == Locus::Star || locus == Locus::DoubleStar)
    throw UsageError("Poincare checks run on simplices or balls");
  const LevelMesh& mesh = ws.mesh();
  const FractalSpec& spec = ws.spec();
  if (p == 1.0 && locus == Locus::Ball) require_vicsek(ws, "the L^1 Poincare inequality on balls");
  const double ad = spec.alpha(p) * spec.d_w;
  const auto fs = ws.suite(p);

  if (locus == Locus::Simplex) {
    std::vector<double> scales, agg;
    for (int m : ws.simplex_levels()) {
      const Index count = ipow(spec.M, m);
      const double r = mesh.cell_diameter(m);
      double harm = 0.0;
      bool has_harm = false;
      for (Index idx = 0; idx < count; ++idx) {
        const Region F = region_simplex(mesh, m, idx);
        for (const auto& f : fs) {
          const double lhs = lp_dev(f.values, F, region_mean(f.values, F), p);
          const double rhs = std::pow(r, ad) * var_estimate(ws, mesh, f.values, F, p, kind, m + 1);
          add_instance(rep, {f.id, "K_" + Word::from_index(idx, m, spec.M).to_string(), m, r, lhs, rhs},
                       zero_for(f.values));
          if (f.kind == "harmonic") {
            harm += std::pow(lhs, p);
            has_harm = true;
          }
        }
      }
      if (has_harm) {
        scales.push_back(r);
        agg.push_back(std::pow(harm / static_cast<double>(count), 1.0 / p));
      }
    }
    if (scales.size() >= 3)
      rep.fits.push_back({"harmonic L^p-mean LHS vs r(K_w)",
                          fit_exponent(scales, agg, ad + spec.d_h / p, ws.config().fit_tolerance)});
    else
      rep.notes.push_back("exponent fit needs three simplex levels");
  } else {
    const double A = ws.A();
    for (int j : ws.ball_levels()) {
      if (j + 1 > finest_level(mesh)) continue;
      const double R = ks_radius(mesh, j);
      int ci = 0;
      for (const auto& c : ws.ball_centers()) {
        ++ci;
        if (!ball_in_domain(mesh, c.x.data(), A * R)) {
          ++rep.skipped;
          continue;
        }
        const Region B = region_ball(mesh, c.x.data(), R);
        const Region big = region_ball(mesh, c.x.data(), A * R);
        if (B.ids.empty()) {
          ++rep.skipped;
          continue;
        }
        for (const auto& f : fs) {
          const double lhs = lp_dev(f.values, B, region_mean(f.values, B), p);
          const double rhs = std::pow(R, ad) * var_estimate(ws, mesh, f.values, big, p, kind, j + 1);
          add_instance(rep, {f.id, (c.junction ? "junction-" : "interior-") + std::to_string(ci), j, R, lhs, rhs},
                       zero_for(f.values));
        }
      }
    }
  }
  if (locus == Locus::Ball) {
    rep.metrics.push_back({"A", ws.A()});
    require_balls(rep);
  }
  finalize(rep);
  return rep;
}

CheckReport check_pseudo_poincare_heat(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "pseudo-poincare-heat", p);
  const SpectralData& sd = ws.spectral();
  const LevelMesh& hm = ws.heat_mesh();
  const FractalSpec& spec = ws.spec();
  const auto fs = ws.heat_suite(p);
  std::vector<double> times = ws.config().times.empty() ? time_grid(sd, ws.config().time_count) : ws.config().times;
  if (p == 1.0) times.erase(std::remove_if(times.begin(), times.end(), [](double t) { return t > 1.0; }), times.end());
  const Region F = region_all(hm);
  for (const auto& f : fs) {
    const double vstar = var_estimate(ws, hm, f.values, F, p, VariationKind::SubGaussian, 1);
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double t = times[i];
      const Vec d = f.values - semigroup_apply(sd, f.values, t);
      const double lhs = lp_norm(d, F, p);
      const double rhs = (p == 1.0 ? std::pow(t, spec.d_h / spec.d_w) : 1.0) * vstar;
      add_instance(rep, {f.id, "K", static_cast<int>(i), t, lhs, rhs}, zero_for(f.values));
    }
  }
  // For p > 1 the bound is uniform in t and the ratio grows towards saturation;
  // only the t^{d_h/d_w}-normalized p = 1 curve is expected to be flat.
  rep.use_stability = p == 1.0;
  rep.stability_limit = std::max(ws.config().stability_factor, 5.0);
  rep.metrics.push_back({"heat_level", static_cast<double>(hm.level)});
  finalize(rep);
  return rep;
}

CheckReport check_pseudo_poincare_average(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "pseudo-poincare-average", p);
  const LevelMesh& mesh = ws.mesh();
  const FractalSpec& spec = ws.spec();
  if (p == 1.0) require_vicsek(ws, "the L^1 moving-average pseudo-Poincare inequality");
  const double ad = spec.alpha(p) * spec.d_w;
  const double C2 = 1.0 + 2.0 * ws.A();
  const int fine = finest_level(mesh);
  const auto fs = ws.suite(p);
  std::vector<std::map<int, Vec>> averages(fs.size());
  for (int j : ws.ball_levels()) {
    const double R = ks_radius(mesh, j);
    for (int i = 1; i <= 3; ++i) {
      const int l = j + i;  // s = r_l
      if (l + 1 > fine) break;
      const double s = ks_radius(mesh, l);
      int ci = 0;
      for (const auto& c : ws.ball_centers()) {
        ++ci;
        if (!ball_in_domain(mesh, c.x.data(), C2 * R)) {
          ++rep.skipped;
          continue;
        }
        const Region B = region_ball(mesh, c.x.data(), R);
        const Region big = region_ball(mesh, c.x.data(), C2 * R);
        for (std::size_t fi = 0; fi < fs.size(); ++fi) {
          const Vec& f = fs[fi].values;
          auto it = averages[fi].find(l);
          if (it == averages[fi].end()) it = averages[fi].emplace(l, moving_average(mesh, f, s)).first;
          double acc = 0.0;
          for (Index v : B.ids) acc += powp(std::abs(f[v] - it->second[v]), p) * B.weight[v];
          const double lhs = std::pow(acc, 1.0 / p);
          const double rhs = std::pow(s, ad) * var_estimate(ws, mesh, f, big, p, VariationKind::KS, l + 1);
          add_instance(rep,
                       {fs[fi].id, "R=r_" + std::to_string(j) + (c.junction ? " junction-" : " interior-") +
                                       std::to_string(ci),
                        l, s, lhs, rhs},
                       zero_for(f));
        }
      }
    }
  }
  rep.metrics.push_back({"C2", C2});
  require_balls(rep);
  finalize(rep);
  return rep;
}

CheckReport check_morrey(const Workspace& ws, double p, Locus locus, VariationKind kind) {
  CheckReport rep = base_report(ws, std::string("morrey-") + locus_name(locus), p);
  if (!(p > 1.0)) throw UnsupportedCase("Morrey estimates need p > 1 (BV functions may be discontinuous)");
  const LevelMesh& mesh = ws.mesh();
  const FractalSpec& spec = ws.spec();
  const double e = (spec.d_w - spec.d_h) * (1.0 - 1.0 / p);
  const auto fs = ws.suite(p);
  if (locus != Locus::Ball) {
    std::vector<double> scales, q;
    for (int m : ws.simplex_levels()) {
      const Index count = ipow(spec.M, m);
      const double factor = std::pow(rel_scale(mesh, m), e);
      double qm = 0.0;
      bool has = false;
      for (Index idx = 0; idx < count; ++idx) {
        const auto ids = locus_simplices(mesh, locus, m, idx);
        const Region F = region_simplices(mesh, m, ids);
        for (const auto& f : fs) {
          const double osc = oscillation(f.values, F.ids);
          const double var = var_estimate(ws, mesh, f.values, F, p, kind, m + 1);
          add_instance(rep, {f.id, "K_" + Word::from_index(idx, m, spec.M).to_string(), m, rel_scale(mesh, m), osc,
                             factor * var},
                       zero_for(f.values));
          if (f.kind == "harmonic" && var > 0.0) {
            qm = std::max(qm, osc / var);
            has = true;
          }
        }
      }
      if (has) {
        scales.push_back(rel_scale(mesh, m));
        q.push_back(qm);
      }
    }
    if (scales.size() >= 3)
      rep.fits.push_back({"harmonic max osc/Var vs L^-m", fit_exponent(scales, q, e, ws.config().fit_tolerance)});
  } else {
    const double A = ws.A();
    for (int j : ws.ball_levels()) {
      if (j + 1 > finest_level(mesh)) continue;
      const double R = ks_radius(mesh, j);
      int ci = 0;
      for (const auto& c : ws.ball_centers()) {
        ++ci;
        if (!ball_in_domain(mesh, c.x.data(), A * R)) {
          ++rep.skipped;
          continue;
        }
        const auto ball = mesh.ball(c.x.data(), R);
        const Region big = region_ball(mesh, c.x.data(), A * R);
        for (const auto& f : fs) {
          const double osc = oscillation(f.values, ball);
          const double rhs = std::pow(R, e) * var_estimate(ws, mesh, f.values, big, p, kind, j + 1);
          add_instance(rep, {f.id, (c.junction ? "junction-" : "interior-") + std::to_string(ci), j, R, osc, rhs},
                       zero_for(f.values));
        }
      }
    }
    require_balls(rep);
  }
  finalize(rep);
  return rep;
}

CheckReport check_variation_comparison(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "variation-comparison", p);
  const LevelMesh& mesh = ws.mesh();
  const int kmin = std::max(1, ws.config().subgaussian_kmin);
  if (kmin > finest_level(mesh)) throw ResolutionError("variation-comparison: mesh too coarse");
  const auto fs = ws.suite(p);
  std::vector<std::pair<std::string, Region>> regions;
  regions.emplace_back("K", region_all(mesh));
  regions.emplace_back("K_1", region_simplex(mesh, 1, 0));
  double reverse = 0.0;
  int violations = 0;
  double worst_c = 0.0;
  std::vector<double> ratios;
  for (std::size_t ri = 0; ri < regions.size(); ++ri) {
    const auto& [name, F] = regions[ri];
    for (const auto& f : fs) {
      const auto ks = variation(mesh, f.values, F, p, VariationKind::KS, kmin);
      const auto sg = variation(mesh, f.values, F, p, VariationKind::SubGaussian, kmin);
      add_instance(rep, {f.id, name, static_cast<int>(ri), 0.0, sg.estimate, ks.estimate}, zero_for(f.values));
      if (!rep.records.back().degenerate) ratios.push_back(rep.records.back().ratio);
      if (sg.estimate > 0.0) reverse = std::max(reverse, ks.estimate / sg.estimate);
      for (std::size_t i = 0; i < ks.entries.size(); ++i) {
        const double C = ks_subgaussian_constant(mesh, F, ks.entries[i].scale, p);
        worst_c = std::max(worst_c, C);
        if (ks.entries[i].normalized > C * sg.entries[i].normalized * (1.0 + 1e-12) + 1e-300) ++violations;
      }
    }
  }
  rep.hard = true;
  if (violations > 0) {
    rep.hard_ok = false;
    rep.notes.push_back(std::to_string(violations) + " scale entries violate KS <= C * sub-Gaussian");
  }
  double spread = 1.0;
  if (!ratios.empty()) {
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    if (*lo > 0.0) spread = *hi / *lo;
  }
  rep.metrics.push_back({"reverse_max", reverse});
  rep.metrics.push_back({"pointwise_C_max", worst_c});
  rep.metrics.push_back({"pointwise_violations", static_cast<double>(violations)});
  rep.metrics.push_back({"spread", spread});
  rep.use_stability = false;
  finalize(rep);
  rep.pass = rep.pass && spread <= ws.config().spread_factor;
  return rep;
}

std::vector<double> level_set_sums(const LevelMesh& mesh, const Vec& f, const Region& F, double r,
                                   std::vector<double>* gaps) {
  std::vector<double> vals;
  vals.reserve(F.ids.size());
  for (Index v : F.ids) vals.push_back(f[v]);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  if (gaps) {
    gaps->clear();
    for (std::size_t i = 0; i + 1 < vals.size(); ++i) gaps->push_back(vals[i + 1] - vals[i]);
  }
  if (vals.size() < 2) return {};
  auto rank = [&](double x) { return std::lower_bound(vals.begin(), vals.end(), x) - vals.begin(); };
  std::vector<Index> rk(static_cast<std::size_t>(mesh.vertex_count()), -1);
  for (Index v : F.ids) rk[v] = rank(f[v]);
  std::vector<double> diff(vals.size(), 0.0);
  for (Index x : F.ids) {
    const Index rx = rk[x];
    const double wx = F.weight[x];
    mesh.index.visit(mesh.point(x), r, [&](Index y, double) {
      if (F.weight[y] <= 0.0) return;
      const Index ry = rk[y];
      if (ry <= rx) return;
      // the ordered pairs (x,y) and (y,x) both cut every threshold between them
      const double c = 2.0 * wx * F.weight[y];
      diff[rx] += c;
      diff[ry] -= c;
    });
  }
  std::vector<double> out(vals.size() - 1);
  double run = 0.0;
  for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
    run += diff[i];
    out[i] = run;
  }
  return out;
}

CheckReport check_coarea(const Workspace& ws) {
  CheckReport rep = base_report(ws, "coarea", 1.0);
  const LevelMesh& mesh = ws.mesh();
  const FractalSpec& spec = ws.spec();
  const Region F = region_all(mesh);
  const int kc = clamp_level(mesh, ws.config().coarea_level);
  const double r = ks_radius(mesh, kc);
  const int fine = finest_level(mesh);
  double worst = 0.0, worst_spot = 0.0;
  for (const auto& fn : ws.suite(1.0)) {
    const Vec g = (fn.values.array() - fn.values.minCoeff()).matrix();
    std::vector<double> gaps;
    const auto sums = level_set_sums(mesh, g, F, r, &gaps);
    double layered = 0.0;
    for (std::size_t i = 0; i < sums.size(); ++i) layered += gaps[i] * sums[i];
    const double direct = raw_double_sum(mesh, g, F, r, 1.0);
    const double err = std::abs(layered - direct) / std::max(direct, 1e-300);
    if (direct > 0.0 || layered > 0.0) worst = std::max(worst, err);
    // spot-check the sweep against direct indicator sums
    if (!sums.empty()) {
      LevelSets ls = level_sets(g);
      for (std::size_t i : {std::size_t{0}, sums.size() / 2, sums.size() - 1}) {
        const double d = raw_double_sum(mesh, ls.indicators[i], F, r, 1.0);
        worst_spot = std::max(worst_spot, std::abs(d - sums[i]) / std::max(d, 1e-300));
      }
    }
    // estimate level: int Var(1_{E_t}) dt against Var(f)
    std::vector<double> var(sums.size(), kInf);
    for (int k = 1; k <= fine; ++k) {
      const double rk = ks_radius(mesh, k);
      const auto sk = level_set_sums(mesh, g, F, rk);
      const double norm = std::pow(rk, -2.0 * spec.d_h);
      for (std::size_t i = 0; i < sk.size(); ++i) var[i] = std::min(var[i], norm * sk[i]);
    }
    double integral = 0.0;
    for (std::size_t i = 0; i < var.size(); ++i) integral += gaps[i] * var[i];
    const double vf = variation(mesh, g, F, 1.0, VariationKind::KS, 1).estimate;
    add_instance(rep, {fn.id, "K", 0, r, integral, vf}, 1e-12 * std::max(1.0, vf));
  }
  rep.hard = true;
  if (worst > 1e-10 || worst_spot > 1e-10) {
    rep.hard_ok = false;
    rep.notes.push_back("layer-cake identity off by more than 1e-10");
  }
  rep.metrics.push_back({"identity_rel_error", worst});
  rep.metrics.push_back({"sweep_rel_error", worst_spot});
  rep.metrics.push_back({"r", r});
  rep.use_stability = false;
  finalize(rep);
  // Sum of per-threshold minima never exceeds the minimum of the sums.
  rep.pass = rep.pass && rep.max_ratio <= 1.0 + 1e-10;
  return rep;
}

std::vector<std::vector<Index>> adjacent_chains(const LevelMesh& mesh, int m, int length) {
  const Index count = ipow(mesh.spec->M, m);
  std::vector<std::vector<Index>> nbr(static_cast<std::size_t>(count));
  for (Index s = 0; s < count; ++s) nbr[s] = mesh.neighbors(m, s);
  std::set<std::vector<Index>> seen;
  std::vector<std::vector<Index>> out;
  std::vector<Index> path;
  std::function<void()> dfs = [&] {
    if (static_cast<int>(path.size()) == length) {
      std::vector<Index> key = path;
      std::sort(key.begin(), key.end());
      if (seen.insert(key).second) out.push_back(path);
      return;
    }
    for (Index nb : nbr[path.back()]) {
      if (std::find(path.begin(), path.end(), nb) != path.end()) continue;
      path.push_back(nb);
      dfs();
      path.pop_back();
    }
  };
  for (Index s = 0; s < count; ++s) {
    path = {s};
    if (length == 1) {
      out.push_back(path);
      continue;
    }
    dfs();
  }
  return out;
}

double l1_double_integral(const Vec& f, const Region& F) {
  std::vector<Index> ids = F.ids;
  std::sort(ids.begin(), ids.end(), [&](Index a, Index b) { return f[a] < f[b] || (f[a] == f[b] && a < b); });
  double wsum = 0.0, fwsum = 0.0, total = 0.0;
  for (Index v : ids) {
    const double w = F.weight[v];
    total += w * (f[v] * wsum - fwsum);
    wsum += w;
    fwsum += f[v] * w;
  }
  return 2.0 * total;
}

CheckReport check_adjacent_simplices_L1(const Workspace& ws) {
  CheckReport rep = base_report(ws, "adjacent-l1", 1.0);
  require_vicsek(ws, "the adjacent-simplex L^1 bound");
  const LevelMesh& mesh = ws.mesh();
  const FractalSpec& spec = ws.spec();
  const auto fs = ws.suite(1.0);
  double oracle = 0.0;
  int chains_total = 0;
  for (int m : ws.config().chain_levels) {
    if (m + 1 > finest_level(mesh)) continue;
    const double norm = std::pow(rel_scale(mesh, m), 2.0 * spec.d_h);
    for (int len : ws.config().chain_lengths) {
      if (len < 1 || len > 4) throw UsageError("chain lengths must lie in 1..4");
      for (const auto& chain : adjacent_chains(mesh, m, len)) {
        ++chains_total;
        const Region U = region_simplices(mesh, m, chain);
        std::string locus;
        for (Index s : chain) locus += (locus.empty() ? "" : "+") + Word::from_index(s, m, spec.M).to_string();
        std::vector<NamedFunction> local = fs;
        Vec ind = Vec::Zero(mesh.vertex_count());
        for (Index v : mesh.simplex_vertices(m, chain.front())) ind[v] = 1.0;
        local.push_back({"indicator-G", "indicator", ind});
        for (const auto& f : local) {
          const double lhs = l1_double_integral(f.values, U);
          const double rhs = norm * variation(mesh, f.values, U, 1.0, VariationKind::KS, m + 1).estimate;
          add_instance(rep, {f.id, locus, m, rel_scale(mesh, m), lhs, rhs}, zero_for(f.values));
        }
        double m1 = 0.0;
        for (Index v : U.ids) m1 += ind[v] * U.weight[v];
        const double expect = 2.0 * m1 * (U.mass() - m1);
        const double got = l1_double_integral(ind, U);
        oracle = std::max(oracle, std::abs(got - expect) / std::max(expect, 1e-300));
      }
    }
  }
  rep.metrics.push_back({"chains", static_cast<double>(chains_total)});
  rep.metrics.push_back({"indicator_identity_rel_error", oracle});
  finalize(rep);
  return rep;
}

double truncation_sum(const LevelMesh& mesh, const Vec& f, const Region& F, double r, double p) {
  if (f.size() == 0) return 0.0;
  if (f.minCoeff() < 0.0) throw DomainError("truncation_sum: f must be nonnegative");
  const double mx = f.maxCoeff();
  if (!(mx > 0.0)) return 0.0;
  const int ktop = static_cast<int>(std::floor(std::log2(mx)));
  const int kbot = ktop - 60;
  std::vector<double> row(F.ids.size(), 0.0);
  parallel_for(static_cast<Index>(F.ids.size()), [&](Index i) {
    const Index x = F.ids[i];
    const double a = f[x];
    double acc = 0.0;
    mesh.index.visit(mesh.point(x), r, [&](Index y, double) {
      const double wy = F.weight[y];
      if (wy <= 0.0) return;
      const double b = f[y];
      if (a == b) return;
      const double lo = std::min(a, b), hi = std::max(a, b);
      const int k1 = std::min(ktop, static_cast<int>(std::floor(std::log2(hi))));
      const int k0 = lo > 0.0 ? std::max(kbot, static_cast<int>(std::floor(std::log2(lo))) - 1) : kbot;
      double s = 0.0;
      for (int k = k0; k <= k1; ++k) {
        const double c = std::ldexp(1.0, k);
        const double u = std::clamp(a - c, 0.0, c), v = std::clamp(b - c, 0.0, c);
        if (u != v) s += powp(std::abs(u - v), p);
      }
      acc += s * wy;
    });
    row[i] = F.weight[x] * acc;
  });
  double total = 0.0;
  for (double v : row) total += v;
  return total;
}

CheckReport check_truncation_bound(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "truncation", p);
  const LevelMesh& mesh = ws.mesh();
  const double r = ks_radius(mesh, clamp_level(mesh, ws.config().truncation_level));
  std::vector<std::pair<std::string, Region>> regions;
  regions.emplace_back("K", region_all(mesh));
  regions.emplace_back("K_1", region_simplex(mesh, 1, 0));
  const auto fs = ws.suite(p);
  int failures = 0;
  double family_err = 0.0;
  for (std::size_t ri = 0; ri < regions.size(); ++ri) {
    const auto& [name, F] = regions[ri];
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
      const Vec g = (fs[fi].values.array() - fs[fi].values.minCoeff()).matrix();
      const double lhs = truncation_sum(mesh, g, F, r, p);
      const double w = raw_double_sum(mesh, g, F, r, p);
      const double rhs = 2.0 * (p + 1.0) * w;
      if (lhs > rhs + 1e-10) ++failures;
      add_instance(rep, {fs[fi].id, name, static_cast<int>(ri), r, lhs, rhs}, 1e-300);
      if (ri == 0 && fi == 0) {
        double fam = 0.0;
        for (const auto& [k, fk] : truncations(g)) fam += raw_double_sum(mesh, fk, F, r, p);
        family_err = std::abs(fam - lhs) / std::max(lhs, 1e-300);
      }
    }
  }
  rep.hard = true;
  if (failures > 0) {
    rep.hard_ok = false;
    rep.notes.push_back(std::to_string(failures) + " functions violate sum_k W(f_k) <= 2(p+1) W(f)");
  }
  rep.metrics.push_back({"r", r});
  rep.metrics.push_back({"violations", static_cast<double>(failures)});
  rep.metrics.push_back({"pairwise_vs_family_rel_error", family_err});
  rep.use_stability = false;
  finalize(rep);
  return rep;
}

CheckReport check_sobolev(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "sobolev", p);
  if (p == 1.0) require_vicsek(ws, "the L^1 Sobolev inequality on balls");
  const LevelMesh& mesh = ws.mesh();
  const FractalSpec& spec = ws.spec();
  const double C2 = 1.0 + 2.0 * ws.A();
  const double e = (1.0 - 1.0 / p) * (spec.d_w - spec.d_h);
  const auto fs = ws.suite(p);
  for (int j : ws.ball_levels()) {
    if (j + 1 > finest_level(mesh)) continue;
    const double R = ks_radius(mesh, j);
    int ci = 0;
    for (const auto& c : ws.ball_centers()) {
      ++ci;
      if (!ball_in_domain(mesh, c.x.data(), C2 * R)) {
        ++rep.skipped;
        continue;
      }
      const Region B = region_ball(mesh, c.x.data(), R);
      const Region big = region_ball(mesh, c.x.data(), C2 * R);
      for (const auto& f : fs) {
        const double lhs = sup_norm(f.values, B);
        const double rhs = std::pow(R, -spec.d_h / p) * lp_norm(f.values, B, p) +
                           std::pow(R, e) * var_estimate(ws, mesh, f.values, big, p, VariationKind::KS, j + 1);
        add_instance(rep, {f.id, (c.junction ? "junction-" : "interior-") + std::to_string(ci), j, R, lhs, rhs},
                     zero_for(f.values));
      }
    }
  }
  rep.metrics.push_back({"C2", C2});
  require_balls(rep);
  finalize(rep);
  return rep;
}

CheckReport check_lusin_holder(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "lusin-holder", p);
  if (p == 1.0) require_vicsek(ws, "the L^1 Lusin-Holder estimate");
  const LevelMesh& mesh = ws.mesh();
  const FractalSpec& spec = ws.spec();
  const double ad = spec.alpha(p) * spec.d_w;
  const Index V = mesh.vertex_count();
  const int N = std::max(1, ws.config().pairs);
  double max_n = 0.0, max_2n = 0.0;
  int zero_pairs = 0;
  std::uint64_t salt = 0;
  const Region K = region_all(mesh);
  int unequal = 0;
  for (const auto& f : ws.suite(p)) {
    // the sup over radii includes r >= diam K, where the ball is K itself
    const double global = std::pow(K.mass(), -1.0 / p) * variation(mesh, f.values, K, p, VariationKind::KS).estimate;
    const Vec g = ws.maximal(f, p).cwiseMax(global);
    // g at roundoff level counts as zero; f must then agree to the same relative accuracy
    const double gz = 1e-10 * std::max(g.maxCoeff(), 1e-300);
    const double fz = zero_for(f.values);
    std::mt19937_64 rng(ws.config().seed * 0x9E3779B97F4A7C15ULL + (++salt));
    for (int i = 0; i < 2 * N; ++i) {
      const Index x = pick(rng, V);
      Index y = pick(rng, V - 1);
      if (y >= x) ++y;
      const double num = std::abs(f.values[x] - f.values[y]);
      const double gs = g[x] + g[y];
      const double d = mesh.distance(x, y);
      InstanceRecord rec{f.id, std::to_string(x) + "-" + std::to_string(y), i < N ? 0 : 1, d, num,
                         std::pow(d, ad) * gs};
      if (gs <= gz) {
        ++zero_pairs;
        if (num > fz) ++unequal;
        rec.rhs = 0.0;
      }
      add_instance(rep, rec, fz);
      const double ratio = rep.records.back().ratio;
      if (std::isfinite(ratio)) {
        if (i < N) max_n = std::max(max_n, ratio);
        max_2n = std::max(max_2n, ratio);
      }
    }
  }
  rep.hard = true;
  const double doubling = max_n > 0.0 ? max_2n / max_n : 1.0;
  rep.metrics.push_back({"max_ratio_N", max_n});
  rep.metrics.push_back({"max_ratio_2N", max_2n});
  rep.metrics.push_back({"doubling_factor", doubling});
  rep.metrics.push_back({"zero_g_pairs", static_cast<double>(zero_pairs)});
  rep.metrics.push_back({"zero_g_unequal", static_cast<double>(unequal)});
  rep.use_stability = false;
  finalize(rep);
  rep.pass = rep.pass && doubling <= ws.config().pair_doubling_factor;
  return rep;
}

double weak_lp_quantity(const Vec& g, const std::vector<double>& weights, double p) {
  std::vector<Index> order(static_cast<std::size_t>(g.size()));
  for (Index i = 0; i < g.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return g[a] > g[b] || (g[a] == g[b] && a < b); });
  double mass = 0.0, best = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double level = g[order[i]];
    std::size_t j = i;
    while (j < order.size() && g[order[j]] == level) mass += weights[order[j++]];
    if (level > 0.0) best = std::max(best, std::pow(level, p) * mass);
    i = j;
  }
  return best;
}

CheckReport check_maximal_weak_lp(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "maximal-weak-lp", p);
  const LevelMesh& mesh = ws.mesh();
  const Region F = region_all(mesh);
  int fi = 0;
  for (const auto& f : ws.suite(p)) {
    const Vec& g = ws.maximal(f, p);
    const double weak = weak_lp_quantity(g, mesh.weights, p);
    const double var = variation(mesh, f.values, F, p, VariationKind::KS).estimate;
    // grouped per function: stability is the spread of C across the suite
    add_instance(rep, {f.id, "K", fi++, 0.0, weak, std::pow(var, p)}, zero_for(f.values));
  }
  finalize(rep);
  return rep;
}

namespace {

inline double ipowq(double a, int q) {
  double r = 1.0;
  for (int k = 0; k < q; ++k) r *= a;
  return r;
}

Vec centered(const Vec& f, const LevelMesh& mesh) { return (f.array() - mesh_mean(f, mesh)).matrix(); }

}  // namespace

CheckReport check_heat_regularity(const Workspace& ws, double p) {
  CheckReport rep = base_report(ws, "heat-regularity", p);
  const SpectralData& sd = ws.spectral();
  const LevelMesh& hm = ws.heat_mesh();
  const FractalSpec& spec = ws.spec();
  const Index V = hm.vertex_count();
  const double lam1 = sd.eigenvalues[1];
  const double lam = lam1 / 4.0;
  // constants are invariant and would only contribute the roundoff of the constant mode
  std::vector<Vec> fs;
  std::vector<std::string> ids;
  for (const auto& f : ws.heat_suite(p)) {
    fs.push_back(centered(f.values, hm));
    ids.push_back(f.id);
  }
  std::vector<double> times = ws.config().regularity_times;
  std::sort(times.begin(), times.end());

  // (a) spectral-gap decay of the weak Bakry-Emery ratio
  std::vector<double> c_of_t(times.size(), 0.0);
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t fi = 0; fi < fs.size(); ++fi) {
      const double r = weak_be_ratio(sd, fs[fi], times[i]);
      add_instance(rep, {ids[fi], "a", static_cast<int>(i), times[i], r, std::exp(-lam * times[i])}, 1e-300);
      c_of_t[i] = std::max(c_of_t[i], rep.records.back().ratio);
    }
  }
  const double ca_max = times.empty() ? 0.0 : *std::max_element(c_of_t.begin(), c_of_t.end());
  const double growth = !times.empty() && c_of_t.front() > 0.0 ? ca_max / c_of_t.front() : 1.0;

  // (b) Besov continuity of P_t for integer q >= 2, sup over a short s-grid
  const std::vector<double> s_grid = time_grid(sd, 3, sd.window_lo(), std::min(0.1, sd.window_hi()));
  std::vector<Mat> kernels;
  for (double s : s_grid) kernels.push_back(heat_kernel(sd, s, ws.config().budget).values);
  double b_max = 0.0;
  const std::size_t nb = std::min<std::size_t>(fs.size(), 3);
  Mat D(V, V);
  for (double qd : ws.config().q_grid) {
    const int q = static_cast<int>(std::lround(qd));
    if (q < 2 || std::abs(qd - q) > 0) throw UsageError("heat-regularity: q_grid entries must be integers >= 2");
    const double aq = spec.alpha(qd);
    for (double t : {0.1, 0.4, 1.6}) {
      for (std::size_t fi = 0; fi < nb; ++fi) {
        const Vec u = semigroup_apply(sd, fs[fi], t);
        parallel_for(V, [&](Index x) {
          for (Index y = 0; y < V; ++y) D(y, x) = ipowq(std::abs(u[x] - u[y]), q) * hm.weights[x] * hm.weights[y];
        });
        double sup = 0.0;
        for (std::size_t si = 0; si < kernels.size(); ++si) {
          const double total = std::max(kernels[si].cwiseProduct(D).sum(), 0.0);
          sup = std::max(sup, std::pow(s_grid[si], -aq) * std::pow(total, 1.0 / qd));
        }
        double nq = 0.0;
        for (Index v = 0; v < V; ++v) nq += ipowq(std::abs(fs[fi][v]), q) * hm.weights[v];
        const double rhs = std::pow(t, -aq) * std::exp(-lam * t) * std::pow(nq, 1.0 / qd);
        if (rhs > 0.0) b_max = std::max(b_max, sup / rhs);
      }
    }
  }

  // (c) ||P_t f - mean f||_p non-increasing in t
  int non_monotone = 0;
  const Region F = region_all(hm);
  for (const Vec& f : fs) {
    const double tol = 1e-12 * lp_norm(f, F, p);
    double prev = kInf;
    for (double t : times) {
      const double v = lp_norm(semigroup_apply(sd, f, t), F, p);
      if (v > prev + tol) ++non_monotone;
      prev = v;
    }
  }

  rep.metrics.push_back({"lambda1", lam1});
  rep.metrics.push_back({"a_growth", growth});
  rep.metrics.push_back({"b_max_ratio", b_max});
  rep.metrics.push_back({"c_non_monotone", static_cast<double>(non_monotone)});
  rep.metrics.push_back({"heat_level", static_cast<double>(hm.level)});
  rep.use_stability = false;
  finalize(rep);
  rep.pass = rep.pass && growth <= ws.config().stability_factor && std::isfinite(b_max) && non_monotone == 0;
  return rep;
}

Index junction_vertex(const LevelMesh& mesh) {
  std::map<Index, int> seen;
  for (Index s = 0; s < mesh.spec->M; ++s)
    for (int k = 0; k < mesh.spec->boundary_size(); ++k)
      if (++seen[mesh.corner(1, s, k)] == 2) return mesh.corner(1, s, k);
  return mesh.corner(1, 0, 0);
}

CheckReport check_heat_asymptotics(const Workspace& ws) {
  CheckReport rep = base_report(ws, "heat-asymptotics", 0.0);
  const SpectralData& sd = ws.spectral();
  const LevelMesh& hm = ws.heat_mesh();
  const Index x = junction_vertex(hm);
  const auto times = ws.config().times.empty() ? time_grid(sd, ws.config().time_count) : ws.config().times;
  std::vector<Vec> gs;
  for (const auto& f : ws.heat_suite(2.0)) gs.push_back(f.values);
  const auto h = heat_asymptotics(sd, times, x, gs, 0.1);
  for (std::size_t i = 0; i < h.times.size(); ++i)
    add_instance(rep, {"suite", "weak-BE", static_cast<int>(i), h.times[i], h.weak_be[i], 1.0}, 1e-300);
  rep.fits.push_back({"log p_t(x,x) vs log t", h.diagonal});
  if (h.off_diagonal_fitted) {
    rep.metrics.push_back({"off_diagonal_slope", h.off_diagonal.slope});
    rep.metrics.push_back({"off_diagonal_target", h.off_diagonal.target});
  }
  rep.metrics.push_back({"vertex", static_cast<double>(x)});
  rep.metrics.push_back({"heat_level", static_cast<double>(hm.level)});
  rep.use_stability = false;
  finalize(rep);
  return rep;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = {
      "poincare", "pseudo-poincare", "morrey",      "variation-comparison", "coarea",          "adjacent-l1",
      "truncation", "sobolev",       "lusin-holder", "maximal-weak-lp",     "heat-regularity", "heat-asymptotics"};
  return names;
}

namespace {

CheckReport guarded(const std::string& id, double p, const std::function<CheckReport()>& fn) {
  try {
    return fn();
  } catch (const UnsupportedCase& e) {
    CheckReport rep;
    rep.id = id;
    rep.p = p;
    rep.unsupported = true;
    rep.notes.push_back(e.what());
    return rep;
  }
}

}  // namespace

std::vector<CheckReport> run_check(const Workspace& ws, const std::string& name, double p) {
  std::vector<CheckReport> out;
  auto add = [&](const std::string& id, double pp, const std::function<CheckReport()>& fn) {
    out.push_back(guarded(id, pp, fn));
  };
  if (name == "poincare") {
    add("poincare-simplex", p, [&] { return check_poincare(ws, p, Locus::Simplex); });
    add("poincare-ball", p, [&] { return check_poincare(ws, p, Locus::Ball); });
  } else if (name == "pseudo-poincare") {
    add("pseudo-poincare-heat", p, [&] { return check_pseudo_poincare_heat(ws, p); });
    add("pseudo-poincare-average", p, [&] { return check_pseudo_poincare_average(ws, p); });
  } else if (name == "morrey") {
    for (Locus l : {Locus::Simplex, Locus::Star, Locus::DoubleStar, Locus::Ball})
      add(std::string("morrey-") + locus_name(l), p, [&] { return check_morrey(ws, p, l); });
  } else if (name == "variation-comparison") {
    add(name, p, [&] { return check_variation_comparison(ws, p); });
  } else if (name == "coarea") {
    add(name, 1.0, [&] { return check_coarea(ws); });
  } else if (name == "adjacent-l1") {
    add(name, 1.0, [&] { return check_adjacent_simplices_L1(ws); });
  } else if (name == "truncation") {
    add(name, p, [&] { return check_truncation_bound(ws, p); });
  } else if (name == "sobolev") {
    add(name, p, [&] { return check_sobolev(ws, p); });
  } else if (name == "lusin-holder") {
    add(name, p, [&] { return check_lusin_holder(ws, p); });
  } else if (name == "maximal-weak-lp") {
    add(name, p, [&] { return check_maximal_weak_lp(ws, p); });
  } else if (name == "heat-regularity") {
    add(name, p, [&] { return check_heat_regularity(ws, p); });
  } else if (name == "heat-asymptotics") {
    add(name, 0.0, [&] { return check_heat_asymptotics(ws); });
  } else if (name == "all") {
    for (const auto& n : check_names()) {
      auto part = run_check(ws, n, p);
      out.insert(out.end(), part.begin(), part.end());
    }
  } else {
    std::string list;
    for (const auto& n : check_names()) list += (list.empty() ? "" : ", ") + n;
    throw UsageError("unknown check '" + name + "' (expected one of: " + list + ", all)");
  }
  return out;
}

}  // namespace nestlab

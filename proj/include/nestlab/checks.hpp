#pragma once

#include "nestlab/dirichlet.hpp"
#include "nestlab/fit.hpp"
#include "nestlab/functions.hpp"
#include "nestlab/mesh.hpp"
#include "nestlab/spectral.hpp"
#include "nestlab/variation.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace nestlab {

/// One member of the test-function suite.
struct SuiteItem {
  std::string id;
  std::string kind;
  TestFunctionParams params;
};

struct CheckConfig {
  std::string fractal = "vicsek";  ///< registry name; ignored when ifs_file is set
  std::string ifs_file;
  int level = 5;
  int truncation = 0;
  double p = 2.0;
  std::vector<SuiteItem> suite;  ///< empty: default_suite()
  int random_count = 4;
  std::uint64_t seed = 42;
  std::vector<int> simplex_levels;  ///< empty: 1..min(4, finest_level - 1)
  std::vector<int> ball_levels;     ///< ball radii R_j = r_j; empty: same as simplex_levels
  int ball_centers = 8;             ///< half junction vertices, half cell-interior points
  double A = 0.0;                   ///< ball enlargement; <= 0 means 3L / beta
  double fit_tolerance = 0.15;
  double stability_factor = 3.0;
  double spread_factor = 10.0;      ///< variation-comparison: max/min across functions
  double pair_doubling_factor = 1.5;
  int pairs = 1000;                 ///< Lusin-Holder pairs per function
  int coarea_level = 3;             ///< r = r_k for the exact coarea identity
  int truncation_level = 2;         ///< r = r_k for the truncation bound
  int subgaussian_kmin = 2;         ///< coarsest level of sub-Gaussian profiles
  std::vector<int> chain_lengths = {2, 3};
  std::vector<int> chain_levels = {1, 2};
  int heat_level = -1;              ///< mesh level of the spectral checks; < 0: largest dense-feasible level
  int time_count = 8;
  std::vector<double> times;        ///< heat-asymptotics grid; empty: the resolvable window
  std::vector<double> regularity_times = {0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 5.0};
  std::vector<double> q_grid = {2.0, 3.0, 4.0};
  Budget budget;
};

/// harmonic, then random_count random-cellwise functions (seeds seed, seed+1, ...);
/// p = 1 adds the indicator of the first level-1 simplex.
std::vector<SuiteItem> default_suite(const CheckConfig& cfg, double p);

struct NamedFunction {
  std::string id;
  std::string kind;
  Vec values;
};

struct BallCenter {
  Vec x;
  bool junction = false;
};

/// Spec, meshes, forms and spectral data shared by the checks of one run.
class Workspace {
public:
  explicit Workspace(CheckConfig cfg);
  Workspace(CheckConfig cfg, std::shared_ptr<const FractalSpec> spec);

  const CheckConfig& config() const { return cfg_; }
  const FractalSpec& spec() const { return *spec_; }
  std::shared_ptr<const FractalSpec> spec_ptr() const { return spec_; }
  const LevelMesh& mesh() const { return *mesh_; }
  std::shared_ptr<const LevelMesh> mesh_ptr() const { return mesh_; }
  const EnergyForm& form() const { return *form_; }
  double A() const;

  int heat_level() const;
  const LevelMesh& heat_mesh() const;
  std::shared_ptr<const LevelMesh> heat_mesh_ptr() const;
  const EnergyForm& heat_form() const;
  /// Full spectrum of the heat mesh, computed on first use unless supplied.
  const SpectralData& spectral() const;
  bool has_spectral() const { return spectral_ != nullptr; }
  void set_spectral(std::shared_ptr<const SpectralData> sd) const { spectral_ = std::move(sd); }

  std::vector<NamedFunction> suite(double p) const;
  std::vector<NamedFunction> heat_suite(double p) const;
  const std::vector<BallCenter>& ball_centers() const;
  /// Default-level maximal function of a suite member, memoized by (id, p).
  const Vec& maximal(const NamedFunction& f, double p) const;
  std::vector<int> simplex_levels() const;
  std::vector<int> ball_levels() const;

private:
  std::vector<NamedFunction> evaluate(const std::vector<SuiteItem>& items, const EnergyForm& form,
                                      const SpectralData* sd) const;
  void ensure_heat() const;

  CheckConfig cfg_;
  std::shared_ptr<const FractalSpec> spec_;
  std::shared_ptr<const LevelMesh> mesh_;
  std::shared_ptr<const EnergyForm> form_;
  mutable std::shared_ptr<const LevelMesh> heat_mesh_;
  mutable std::shared_ptr<const EnergyForm> heat_form_;
  mutable std::shared_ptr<const SpectralData> spectral_;
  mutable std::vector<BallCenter> centers_;
  mutable std::map<std::pair<std::string, double>, Vec> maximal_;
};

struct InstanceRecord {
  std::string function;
  std::string locus;
  int level = 0;        ///< grouping key: simplex level, ball level or time index
  double scale = 0.0;   ///< r(locus), R, s or t
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  bool degenerate = false;  ///< lhs = rhs = 0, excluded
};

struct ScaleGroup {
  int level = 0;
  double scale = 0.0;
  double max_ratio = 0.0;
  int instances = 0;
  int degenerate = 0;
};

struct NamedFit {
  std::string label;
  ExponentFit fit;
};

struct CheckReport {
  std::string id;
  double p = 0.0;
  std::vector<InstanceRecord> records;
  std::vector<ScaleGroup> scales;
  double max_ratio = 0.0;
  int degenerate = 0;
  int skipped = 0;  ///< loci rejected by the domain guard
  double stability = 1.0;  ///< max / min of the per-scale max ratios
  bool use_stability = true;
  double stability_limit = 3.0;
  std::vector<NamedFit> fits;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> notes;
  bool hard = false;      ///< contains an asserted exact inequality or identity
  bool hard_ok = true;
  bool unsupported = false;
  bool pass = false;

  double metric(const std::string& name) const;
};

/// Appends a record: ratio = lhs/rhs, degenerate when both vanish, hard failure
/// when rhs vanishes and lhs does not. `zero` is the absolute threshold for lhs.
void add_instance(CheckReport& rep, InstanceRecord rec, double zero);
/// Fills scales, max_ratio, degenerate, stability and pass.
void finalize(CheckReport& rep);

enum class Locus { Simplex, Star, DoubleStar, Ball };
const char* locus_name(Locus l);

CheckReport check_poincare(const Workspace& ws, double p, Locus locus, VariationKind kind = VariationKind::KS);
CheckReport check_pseudo_poincare_heat(const Workspace& ws, double p);
CheckReport check_pseudo_poincare_average(const Workspace& ws, double p);
CheckReport check_morrey(const Workspace& ws, double p, Locus locus, VariationKind kind = VariationKind::KS);
CheckReport check_variation_comparison(const Workspace& ws, double p);
CheckReport check_coarea(const Workspace& ws);
CheckReport check_adjacent_simplices_L1(const Workspace& ws);
CheckReport check_truncation_bound(const Workspace& ws, double p);
CheckReport check_sobolev(const Workspace& ws, double p);
CheckReport check_lusin_holder(const Workspace& ws, double p);
CheckReport check_maximal_weak_lp(const Workspace& ws, double p);
CheckReport check_heat_regularity(const Workspace& ws, double p);
CheckReport check_heat_asymptotics(const Workspace& ws);

/// Names accepted by run_check, in the order `all` runs them.
const std::vector<std::string>& check_names();
/// One named check (some expand to several loci); unsupported cases become
/// reports flagged `unsupported` instead of throwing.
std::vector<CheckReport> run_check(const Workspace& ws, const std::string& name, double p);

/// First level-1 corner shared by two level-1 cells.
Index junction_vertex(const LevelMesh& mesh);

/// Chains of `length` distinct level-m simplices, consecutive ones adjacent,
/// deduplicated as sets (each returned in path order).
std::vector<std::vector<Index>> adjacent_chains(const LevelMesh& mesh, int m, int length);

/// sum_{x,y in F} |f(x) - f(y)| w_F(x) w_F(y), by sorting.
double l1_double_integral(const Vec& f, const Region& F);

/// sum_k W_{F,r,p}(f_k) over the dyadic truncations, pair by pair.
double truncation_sum(const LevelMesh& mesh, const Vec& f, const Region& F, double r, double p);

/// W_{F,r,1}(1_{f > theta_i}) for every midpoint threshold of f (ascending),
/// by sweeping the pairs once.
std::vector<double> level_set_sums(const LevelMesh& mesh, const Vec& f, const Region& F, double r,
                                   std::vector<double>* gaps = nullptr);

/// sup_t t^p mu({g > t}).
double weak_lp_quantity(const Vec& g, const std::vector<double>& weights, double p);

}  // namespace nestlab

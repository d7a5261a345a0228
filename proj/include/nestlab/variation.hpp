#pragma once

#include "nestlab/functions.hpp"
#include "nestlab/mesh.hpp"
#include "nestlab/spectral.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nestlab {

enum class VariationKind { KS, SubGaussian };
const char* kind_name(VariationKind k);

struct VariationEntry {
  int k = 0;
  double scale = 0.0;       ///< r_k (KS) or t_k = r_k^{d_w} (sub-Gaussian)
  double raw = 0.0;         ///< double sum before the scale normalization
  double normalized = 0.0;
};

struct VariationProfile {
  VariationKind kind = VariationKind::KS;
  double p = 2.0;
  std::vector<VariationEntry> entries;
  double estimate = 0.0;  ///< min of normalized values over the entries
  double finest = 0.0;    ///< normalized value at the finest scale
};

/// r_k = beta L^{t-k}.
double ks_radius(const LevelMesh& mesh, int k);
/// Largest k <= n - 1 whose radius r_k still reaches a level-n edge.
int finest_level(const LevelMesh& mesh);
/// Distance beyond which the sub-Gaussian kernel at time t is below 1e-14.
double subgaussian_cutoff(const FractalSpec& spec, double t);

/// Profile over levels k in [k_min, k_max] (k_max < 0 means finest_level).
VariationProfile variation(const LevelMesh& mesh, const Vec& f, const Region& F, double p, VariationKind kind,
                           int k_min = 1, int k_max = -1);
/// Same, over the levels whose radius is at most r_max.
VariationProfile variation_below(const LevelMesh& mesh, const Vec& f, const Region& F, double p, VariationKind kind,
                                 double r_max);

/// W_{F,r,p}(f) = sum_{x in F} sum_{y in F, d(x,y) <= r} |f(x) - f(y)|^p w_F(x) w_F(y).
double raw_double_sum(const LevelMesh& mesh, const Vec& f, const Region& F, double r, double p);

/// Constant C with KS-normalized(r) <= C * SG-normalized(r^{d_w}) on F.
double ks_subgaussian_constant(const LevelMesh& mesh, const Region& F, double r, double p);

/// sup over the grid of t^{-alpha} (sum p_t |f(x) - f(y)|^p w w)^{1/p}.
double besov_seminorm(const SpectralData& sd, const Vec& f, double p, double alpha, const std::vector<double>& times);

/// f_s(x) = sum_{y in B(x,s)} f(y) w(y) / mu(B(x,s)).
Vec moving_average(const LevelMesh& mesh, const Vec& f, double s);

/// Dyadic truncations f_k = min(max(f - 2^k, 0), 2^k), nonzero ones only, k descending.
std::vector<std::pair<int, Vec>> truncations(const Vec& f);

struct LevelSets {
  std::vector<double> thresholds;  ///< midpoints between consecutive distinct values
  std::vector<double> weights;     ///< gap between those values
  std::vector<Vec> indicators;     ///< 1_{f > threshold}
};
LevelSets level_sets(const Vec& f);
/// Indicators for explicit thresholds (ascending); weights left empty.
LevelSets level_sets(const Vec& f, const std::vector<double>& thresholds);

struct MaximalField {
  Vec g;
  std::vector<int> levels;      ///< radius levels k
  std::vector<double> radii;
};

/// g(x) = max_k mu(B(x,r_k))^{-1/p} Var_{B(x,r_k),p}(f), the restricted variation
/// taken over the finer levels j in (k, finest_level]. Default radius levels: 1..finest_level-1.
MaximalField maximal_function(const LevelMesh& mesh, const Vec& f, double p, std::vector<int> levels = {});

void write_profile_csv(const std::vector<VariationProfile>& profiles, const std::string& path);
void write_maximal_csv(const MaximalField& field, const std::string& path);

}  // namespace nestlab

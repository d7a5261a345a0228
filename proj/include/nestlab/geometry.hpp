#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nestlab {

using Index = std::int64_t;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// x -> contraction * unitary * x + translation.
struct Similitude {
  double contraction = 0.5;
  Mat unitary;
  Vec translation;

  Vec apply(const Vec& x) const { return contraction * (unitary * x) + translation; }
  Vec fixed_point() const;
};

/// An unordered pair of boundary points (indices into FractalSpec::boundary_points)
/// together with the symmetry orbit it belongs to.
struct BoundaryPair {
  int a = 0;
  int b = 0;
  int orbit = 0;
};

/// Finite address (i_1, ..., i_n); letters are 0-based map indices.
struct Word {
  std::vector<std::uint8_t> letters;

  int level() const { return static_cast<int>(letters.size()); }
  /// Lexicographic index with the first letter most significant.
  Index index(int M) const;
  static Word from_index(Index idx, int level, int M);
  std::string to_string() const;  // 1-based, e.g. "3.1.2"
};

/// IFS data plus everything derived from it: boundary, symmetry orbits,
/// renormalized conductances, dimensions and the separation constant.
struct FractalSpec {
  std::string name;
  int dim = 2;
  std::vector<Similitude> maps;
  double L = 2.0;  ///< length factor (1 / contraction)
  int M = 3;       ///< mass factor (number of maps)

  std::vector<Vec> fixed_points;     ///< fixed point of each map
  std::vector<int> boundary;         ///< map indices whose fixed points are essential
  std::vector<Vec> boundary_points;  ///< V0 coordinates, same order as `boundary`
  std::vector<BoundaryPair> pairs;   ///< all unordered V0 pairs, a < b
  int orbit_count = 0;
  int skipped_reflections = 0;  ///< bisector reflections H_xy that do not preserve V0 (relaxed check only)

  std::vector<double> conductance;  ///< per orbit, normalized to max 1
  double rho = 1.0;                 ///< resistance scale factor
  int renormalization_iterations = 0;

  double diameter = 1.0;  ///< Euclidean diameter of K (= diameter of V0)
  double d_h = 0.0;
  double d_w = 0.0;
  double beta = 0.0;  ///< separation constant estimate at probe level 1

  int boundary_size() const { return static_cast<int>(boundary.size()); }
  /// (1 - 2/p)(1 - d_h/d_w) + 1/p
  double alpha(double p) const;
  /// Default ball enlargement factor 3L / beta.
  double default_A() const { return 3.0 * L / beta; }
  bool is_vicsek_family() const { return vicsek_family; }
  bool vicsek_family = false;

  /// psi_w = psi_{i1} o ... o psi_{in}
  Similitude word_map(const Word& w) const;
};

/// Raw IFS description, as read from a key-value file.
struct IfsData {
  std::string name = "custom";
  std::vector<Similitude> maps;
  std::optional<double> rho;
};

/// Registry lookup: "sg", "vicsek", "vicsek-N" (N >= 2).
std::shared_ptr<const FractalSpec> build_spec(std::string_view name);

/// Validates the axioms (common unitary part, #V0 >= 2, connectivity,
/// symmetry on V0, sampled nesting at levels 1 and 2), then renormalizes.
std::shared_ptr<const FractalSpec> build_spec(const IfsData& data);

/// Parse a custom IFS file:
///   dim = 2
///   contraction = 0.5
///   unitary = 1 0 ; 0 1
///   map = 0 0
///   map = 0.5 0
///   rho = 1.6666666666666667      (optional, checked)
IfsData parse_ifs(std::istream& in);
IfsData parse_ifs_file(const std::string& path);

/// Level-n separation probe: min distance between disjoint (n+1)-simplices
/// lying in adjacent n-simplices, times L^n.
struct Separation {
  double beta = 0.0;
  double A = 0.0;
  std::vector<int> levels;
  std::vector<double> per_level;
};

Separation separation_beta(const FractalSpec& spec, const std::vector<int>& levels);

namespace detail {
/// Fills boundary, pairs, orbits, diameter, dimensions-with-given-rho; no renormalization.
void derive_boundary(FractalSpec& spec, bool strict_symmetry = true);
double probe_separation(const FractalSpec& spec, int level);
}  // namespace detail

}  // namespace nestlab

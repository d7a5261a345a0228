#pragma once

#include "nestlab/checks.hpp"
#include "nestlab/variation.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace nestlab {

/// Everything one pipeline run needs. Loaded from a flat key-value file:
///
///   [fractal]   name, ifs_file, level, truncation
///   [budget]    max_cells, dense_limit
///   [functions] suite, random_count, seed
///   [spectral]  heat_level, time_count, times
///   [heat]      times, vertex
///   [variation] kind, k_min, maximal
///   [checks]    names, p, A, fit_tolerance, stability_factor, ...
///   [output]    dir, cache_dir
///
/// Lists are comma separated; '#' starts a comment.
struct RunConfig {
  CheckConfig check;
  std::vector<std::string> checks = {"all"};
  std::vector<double> ps = {2.0};
  VariationKind variation_kind = VariationKind::KS;
  int variation_kmin = 1;
  bool write_maximal = false;
  std::vector<double> heat_times;  ///< kernel slices for `heat`; empty: window midpoint
  Index heat_vertex = -1;          ///< diagonal vertex for `heat`; < 0: first junction
  std::string out_dir = "nestlab-out";
  std::string cache_dir;           ///< empty: <out_dir>/cache; NESTLAB_CACHE_DIR overrides
};

RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Suite entry syntax: harmonic[:b0:b1:...], random:<seed>[:<cell level>],
/// indicator:<level>:<index>, eigenfunction:<k>, coordinate:<axis>.
SuiteItem parse_suite_item(std::string_view text);

/// Canonical `section.key = value` listing of every effective setting except output paths.
std::string canonical_config(const RunConfig& cfg);

std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t h);
std::uint64_t config_hash(const RunConfig& cfg);
/// Hash of the settings the spectral stage depends on (fractal, levels, budget)
/// together with the IFS contents; keys the on-disk spectral cache.
std::uint64_t spectral_hash(const RunConfig& cfg, const FractalSpec& spec, int heat_level);

/// %.17g
std::string format_double(double v);

}  // namespace nestlab

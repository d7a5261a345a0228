#pragma once

#include "nestlab/checks.hpp"
#include "nestlab/config.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nestlab {

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::string spec_name;
  int level = 0;
  int truncation = 0;
  int heat_level = -1;  ///< -1 when no spectral stage ran
  std::vector<std::string> checks;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string cache_file;
  bool spectral_cached = false;
  std::vector<StageTiming> timings;
};

/// Stage orchestration for one config: spec -> mesh -> renormalize -> spectral
/// -> functions -> checks. Outputs land in cfg.out_dir.
class Pipeline {
public:
  explicit Pipeline(RunConfig cfg);

  const RunConfig& config() const { return cfg_; }
  const Workspace& workspace();
  const RunManifest& manifest() const { return manifest_; }

  /// spec.json, mesh_vertices.csv, mesh_edges.csv
  void build();
  /// spectrum.csv (loads or fills the spectral cache)
  void spectrum();
  /// heat_diagonal.csv and heat_t<i>.csv kernel slices
  void heat();
  /// variation.csv (and maximal.csv when enabled) for every suite function over K
  void variation();
  /// report.json plus check_<id>_p<p>.csv per report; returns the reports.
  std::vector<CheckReport> check(const std::vector<std::string>& names);
  /// manifest.json (timings live here, outside the determinism guarantee)
  void write_manifest();

private:
  void ensure_spectral();
  void timed(const std::string& stage, const std::function<void()>& fn);
  std::string path(const std::string& file) const;

  RunConfig cfg_;
  std::unique_ptr<Workspace> ws_;
  RunManifest manifest_;
};

/// Directory of the spectral cache: NESTLAB_CACHE_DIR, else cfg.cache_dir, else <out>/cache.
std::string cache_directory(const RunConfig& cfg);
void save_spectral(const SpectralData& sd, const std::string& path);
/// nullopt when the file is absent or does not match the mesh.
std::optional<SpectralData> load_spectral(const std::string& path, std::shared_ptr<const LevelMesh> mesh);

/// Checks that need the heat-kernel spectrum.
bool needs_spectral(const std::string& check_name);
/// Report ids a check name expands to (for SKIPPED rows).
std::vector<std::string> report_ids(const std::string& check_name);

/// Serialized report.json text.
std::string report_json(const RunConfig& cfg, const FractalSpec& spec, const std::vector<CheckReport>& reports);
void write_records_csv(const CheckReport& rep, const std::string& path);

/// Per-check table: max ratio, fit vs target, stability, status. `requested`
/// ids without a report get a SKIPPED row.
std::string summary_table(const std::vector<CheckReport>& reports, const std::vector<std::string>& requested = {});
/// Reads <out>/report.json and renders the table; a missing file gives SKIPPED rows.
std::string emit_summary(const std::string& out_dir, const std::vector<std::string>& requested = {});

/// 1 iff some report failed a hard assertion.
int exit_status(const std::vector<CheckReport>& reports);

}  // namespace nestlab

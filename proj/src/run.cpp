#include "nestlab/run.hpp"

#include "nestlab/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace nestlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string p_tag(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", p);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write '" + path + "'");
  os << text;
}

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json spec_json(const FractalSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["dim"] = spec.dim;
  j["L"] = spec.L;
  j["M"] = spec.M;
  j["rho"] = spec.rho;
  j["renormalization_iterations"] = spec.renormalization_iterations;
  j["d_h"] = spec.d_h;
  j["d_w"] = spec.d_w;
  j["beta"] = spec.beta;
  j["diameter"] = spec.diameter;
  j["boundary"] = spec.boundary;
  j["orbit_count"] = spec.orbit_count;
  j["conductance"] = spec.conductance;
  j["skipped_reflections"] = spec.skipped_reflections;
  j["vicsek_family"] = spec.vicsek_family;
  return j;
}

json report_entry(const CheckReport& r, const std::string& csv) {
  json j;
  j["id"] = r.id;
  j["p"] = r.p;
  j["status"] = r.unsupported ? "SKIPPED" : (r.pass ? "PASS" : "FAIL");
  j["pass"] = r.pass;
  j["hard"] = r.hard;
  j["hard_ok"] = r.hard_ok;
  j["unsupported"] = r.unsupported;
  j["max_ratio"] = finite_or_null(r.max_ratio);
  j["stability"] = finite_or_null(r.stability);
  j["use_stability"] = r.use_stability;
  j["stability_limit"] = r.stability_limit;
  j["instances"] = r.records.size();
  j["degenerate"] = r.degenerate;
  j["skipped"] = r.skipped;
  json scales = json::array();
  for (const auto& s : r.scales)
    scales.push_back({{"level", s.level},
                      {"scale", s.scale},
                      {"max_ratio", finite_or_null(s.max_ratio)},
                      {"instances", s.instances},
                      {"degenerate", s.degenerate}});
  j["scales"] = scales;
  json fits = json::array();
  for (const auto& f : r.fits)
    fits.push_back({{"label", f.label},
                    {"slope", f.fit.slope},
                    {"target", f.fit.target},
                    {"tolerance", f.fit.tolerance},
                    {"intercept", f.fit.intercept},
                    {"stderr", f.fit.stderr_slope},
                    {"excluded", f.fit.excluded},
                    {"pass", f.fit.pass}});
  j["fits"] = fits;
  json metrics = json::object();
  for (const auto& [k, v] : r.metrics) metrics[k] = finite_or_null(v);
  j["metrics"] = metrics;
  j["notes"] = r.notes;
  j["records_csv"] = csv;
  return j;
}

std::string csv_name(const CheckReport& r) { return "check_" + r.id + "_p" + p_tag(r.p) + ".csv"; }

struct Row {
  std::string id, p, max_ratio, fit, stability, status;
};

std::string fmt(double v, const char* f = "%.4g") {
  if (!std::isfinite(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string render(const std::vector<Row>& rows) {
  const Row head{"check", "p", "max ratio", "fit slope/target", "stability", "status"};
  std::vector<std::size_t> w = {head.id.size(), head.p.size(), head.max_ratio.size(),
                                head.fit.size(), head.stability.size(), head.status.size()};
  auto widen = [&](const Row& r) {
    w[0] = std::max(w[0], r.id.size());
    w[1] = std::max(w[1], r.p.size());
    w[2] = std::max(w[2], r.max_ratio.size());
    w[3] = std::max(w[3], r.fit.size());
    w[4] = std::max(w[4], r.stability.size());
  };
  for (const auto& r : rows) widen(r);
  std::ostringstream o;
  auto line = [&](const Row& r) {
    auto cell = [&](const std::string& s, std::size_t width) { o << s << std::string(width - s.size() + 2, ' '); };
    cell(r.id, w[0]);
    cell(r.p, w[1]);
    cell(r.max_ratio, w[2]);
    cell(r.fit, w[3]);
    cell(r.stability, w[4]);
    o << r.status << '\n';
  };
  line(head);
  for (const auto& r : rows) line(r);
  return o.str();
}

std::vector<Row> skipped_rows(const std::vector<std::string>& requested, const std::vector<std::string>& present) {
  std::vector<Row> out;
  for (const auto& name : requested)
    for (const auto& id : report_ids(name))
      if (std::find(present.begin(), present.end(), id) == present.end())
        out.push_back({id, "-", "-", "-", "-", "SKIPPED (no report)"});
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

bool needs_spectral(const std::string& name) {
  return name == "pseudo-poincare" || name == "heat-regularity" || name == "heat-asymptotics" || name == "all";
}

std::vector<std::string> report_ids(const std::string& name) {
  if (name == "poincare") return {"poincare-simplex", "poincare-ball"};
  if (name == "pseudo-poincare") return {"pseudo-poincare-heat", "pseudo-poincare-average"};
  if (name == "morrey") return {"morrey-simplex", "morrey-star", "morrey-double-star", "morrey-ball"};
  if (name == "all") {
    std::vector<std::string> out;
    for (const auto& n : check_names()) {
      const auto ids = report_ids(n);
      out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
  }
  return {name};
}

std::string cache_directory(const RunConfig& cfg) {
  if (const char* env = std::getenv("NESTLAB_CACHE_DIR"); env && *env) return env;
  if (!cfg.cache_dir.empty()) return cfg.cache_dir;
  return (fs::path(cfg.out_dir) / "cache").string();
}

namespace {
constexpr char kMagic[8] = {'N', 'L', 'S', 'P', 'E', 'C', '0', '1'};
}

void save_spectral(const SpectralData& sd, const std::string& path) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw UsageError("cannot write '" + tmp + "'");
    const std::int64_t V = sd.eigenvectors.rows(), k = sd.eigenvectors.cols();
    const std::int64_t full = sd.full ? 1 : 0;
    os.write(kMagic, sizeof kMagic);
    os.write(reinterpret_cast<const char*>(&V), sizeof V);
    os.write(reinterpret_cast<const char*>(&k), sizeof k);
    os.write(reinterpret_cast<const char*>(&full), sizeof full);
    os.write(reinterpret_cast<const char*>(&sd.lambda_max), sizeof sd.lambda_max);
    os.write(reinterpret_cast<const char*>(sd.eigenvalues.data()), static_cast<std::streamsize>(k * sizeof(double)));
    os.write(reinterpret_cast<const char*>(sd.residuals.data()), static_cast<std::streamsize>(k * sizeof(double)));
    os.write(reinterpret_cast<const char*>(sd.eigenvectors.data()),
             static_cast<std::streamsize>(V * k * sizeof(double)));
  }
  fs::rename(tmp, path);
}

std::optional<SpectralData> load_spectral(const std::string& path, std::shared_ptr<const LevelMesh> mesh) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  char magic[8];
  std::int64_t V = 0, k = 0, full = 0;
  SpectralData sd;
  is.read(magic, sizeof magic);
  is.read(reinterpret_cast<char*>(&V), sizeof V);
  is.read(reinterpret_cast<char*>(&k), sizeof k);
  is.read(reinterpret_cast<char*>(&full), sizeof full);
  is.read(reinterpret_cast<char*>(&sd.lambda_max), sizeof sd.lambda_max);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0 || V != mesh->vertex_count() || k <= 0 || k > V)
    return std::nullopt;
  sd.mesh = std::move(mesh);
  sd.full = full != 0;
  sd.eigenvalues.resize(k);
  sd.residuals.resize(k);
  sd.eigenvectors.resize(V, k);
  is.read(reinterpret_cast<char*>(sd.eigenvalues.data()), static_cast<std::streamsize>(k * sizeof(double)));
  is.read(reinterpret_cast<char*>(sd.residuals.data()), static_cast<std::streamsize>(k * sizeof(double)));
  is.read(reinterpret_cast<char*>(sd.eigenvectors.data()), static_cast<std::streamsize>(V * k * sizeof(double)));
  if (!is) return std::nullopt;
  return sd;
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {
  manifest_.config_hash = hex64(config_hash(cfg_));
  manifest_.level = cfg_.check.level;
  manifest_.truncation = cfg_.check.truncation;
  manifest_.seed = cfg_.check.seed;
  manifest_.out_dir = cfg_.out_dir;
  fs::create_directories(cfg_.out_dir);
}

std::string Pipeline::path(const std::string& file) const { return (fs::path(cfg_.out_dir) / file).string(); }

void Pipeline::timed(const std::string& stage, const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest_.timings.push_back({stage, dt});
}

const Workspace& Pipeline::workspace() {
  if (!ws_) {
    std::shared_ptr<const FractalSpec> spec;
    timed("spec", [&] {
      spec = cfg_.check.ifs_file.empty() ? build_spec(cfg_.check.fractal)
                                         : build_spec(parse_ifs_file(cfg_.check.ifs_file));
    });
    timed("mesh+renormalize", [&] { ws_ = std::make_unique<Workspace>(cfg_.check, spec); });
    manifest_.spec_name = spec->name;
  }
  return *ws_;
}

void Pipeline::ensure_spectral() {
  const Workspace& ws = workspace();
  if (ws.has_spectral()) return;
  const int hl = ws.heat_level();
  manifest_.heat_level = hl;
  const std::string file =
      (fs::path(cache_directory(cfg_)) / ("spectral-" + hex64(spectral_hash(cfg_, ws.spec(), hl)) + ".bin")).string();
  manifest_.cache_file = file;
  timed("spectral", [&] {
    if (auto sd = load_spectral(file, ws.heat_mesh_ptr())) {
      ws.set_spectral(std::make_shared<const SpectralData>(std::move(*sd)));
      manifest_.spectral_cached = true;
      return;
    }
    const SpectralData& sd = ws.spectral();
    save_spectral(sd, file);
  });
}

void Pipeline::build() {
  const Workspace& ws = workspace();
  timed("write-build", [&] {
    write_text(path("spec.json"), spec_json(ws.spec()).dump(2) + "\n");
    write_mesh_csv(ws.mesh(), path("mesh_vertices.csv"), path("mesh_edges.csv"));
  });
}

void Pipeline::spectrum() {
  ensure_spectral();
  timed("write-spectrum", [&] { write_spectrum_csv(ws_->spectral(), path("spectrum.csv")); });
}

void Pipeline::heat() {
  ensure_spectral();
  const SpectralData& sd = ws_->spectral();
  const LevelMesh& hm = ws_->heat_mesh();
  timed("heat", [&] {
    const Index x = cfg_.heat_vertex >= 0 ? cfg_.heat_vertex : junction_vertex(hm);
    if (x >= hm.vertex_count()) throw UsageError("heat.vertex out of range");
    const auto grid = cfg_.check.times.empty() ? time_grid(sd, cfg_.check.time_count) : cfg_.check.times;
    std::ostringstream o;
    o << "t,vertex_id,p_t\n";
    for (double t : grid) o << format_double(t) << ',' << x << ',' << format_double(heat_kernel_entry(sd, x, x, t)) << '\n';
    write_text(path("heat_diagonal.csv"), o.str());
    std::vector<double> slices = cfg_.heat_times;
    if (slices.empty()) slices.push_back(std::sqrt(sd.window_lo() * sd.window_hi()));
    for (std::size_t i = 0; i < slices.size(); ++i)
      write_heat_csv(heat_kernel(sd, slices[i], cfg_.check.budget), path("heat_t" + std::to_string(i) + ".csv"));
  });
}

void Pipeline::variation() {
  const Workspace& ws = workspace();
  timed("variation", [&] {
    const Region F = region_all(ws.mesh());
    for (double p : cfg_.ps) {
      for (const auto& f : ws.suite(p)) {
        const auto prof = nestlab::variation(ws.mesh(), f.values, F, p, cfg_.variation_kind, cfg_.variation_kmin);
        write_profile_csv({prof}, path("variation_" + f.id + "_p" + p_tag(p) + ".csv"));
        if (cfg_.write_maximal)
          write_maximal_csv(maximal_function(ws.mesh(), f.values, p), path("maximal_" + f.id + "_p" + p_tag(p) + ".csv"));
      }
    }
  });
}

std::vector<CheckReport> Pipeline::check(const std::vector<std::string>& names) {
  const Workspace& ws = workspace();
  manifest_.checks = names;
  for (const auto& n : names)
    if (needs_spectral(n)) {
      ensure_spectral();
      break;
    }
  std::vector<CheckReport> reports;
  for (const auto& n : names)
    for (double p : cfg_.ps) {
      // p-independent checks run once
      if ((n == "coarea" || n == "adjacent-l1" || n == "heat-asymptotics") && p != cfg_.ps.front()) continue;
      timed("check:" + n + ":p" + p_tag(p), [&] {
        auto part = run_check(ws, n, p);
        reports.insert(reports.end(), part.begin(), part.end());
      });
    }
  timed("write-report", [&] {
    for (const auto& r : reports) write_records_csv(r, path(csv_name(r)));
    write_text(path("report.json"), report_json(cfg_, ws.spec(), reports));
  });
  return reports;
}

void Pipeline::write_manifest() {
  json j;
  j["config_hash"] = manifest_.config_hash;
  j["spec_name"] = manifest_.spec_name;
  j["level"] = manifest_.level;
  j["truncation"] = manifest_.truncation;
  j["heat_level"] = manifest_.heat_level;
  j["checks"] = manifest_.checks;
  j["seed"] = manifest_.seed;
  j["out_dir"] = manifest_.out_dir;
  j["spectral_cache"] = manifest_.cache_file;
  j["spectral_cached"] = manifest_.spectral_cached;
  json t = json::array();
  for (const auto& s : manifest_.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  j["timings"] = t;
  write_text(path("manifest.json"), j.dump(2) + "\n");
}

// ---------------------------------------------------------------------------

std::string report_json(const RunConfig& cfg, const FractalSpec& spec, const std::vector<CheckReport>& reports) {
  json j;
  j["config_hash"] = hex64(config_hash(cfg));
  json c = json::object();
  std::istringstream lines(canonical_config(cfg));
  std::string line;
  while (std::getline(lines, line)) {
    const auto eq = line.find(" = ");
    c[line.substr(0, eq)] = line.substr(eq + 3);
  }
  j["config"] = c;
  j["spec"] = spec_json(spec);
  json arr = json::array();
  for (const auto& r : reports) arr.push_back(report_entry(r, csv_name(r)));
  j["checks"] = arr;
  j["exit_status"] = exit_status(reports);
  return j.dump(2) + "\n";
}

void write_records_csv(const CheckReport& rep, const std::string& path) {
  std::ostringstream o;
  o << "function,locus,level,scale,lhs,rhs,ratio,degenerate\n";
  for (const auto& r : rep.records)
    o << r.function << ',' << r.locus << ',' << r.level << ',' << format_double(r.scale) << ','
      << format_double(r.lhs) << ',' << format_double(r.rhs) << ',' << format_double(r.ratio) << ','
      << (r.degenerate ? 1 : 0) << '\n';
  write_text(path, o.str());
}

std::string summary_table(const std::vector<CheckReport>& reports, const std::vector<std::string>& requested) {
  std::vector<Row> rows;
  std::vector<std::string> present;
  for (const auto& r : reports) {
    present.push_back(r.id);
    Row row;
    row.id = r.id;
    row.p = r.p > 0.0 ? p_tag(r.p) : "-";
    row.max_ratio = r.unsupported ? "-" : fmt(r.max_ratio);
    row.fit = r.fits.empty() ? "-" : fmt(r.fits.front().fit.slope, "%.3f") + "/" + fmt(r.fits.front().fit.target, "%.3f");
    row.stability = r.unsupported ? "-" : fmt(r.stability, "%.3g");
    row.status = r.unsupported ? "SKIPPED" : r.pass ? "PASS" : (r.hard && !r.hard_ok ? "FAIL (hard)" : "FAIL");
    rows.push_back(row);
  }
  const auto extra = skipped_rows(requested, present);
  rows.insert(rows.end(), extra.begin(), extra.end());
  return render(rows);
}

std::string emit_summary(const std::string& out_dir, const std::vector<std::string>& requested) {
  std::vector<Row> rows;
  std::vector<std::string> present;
  std::ifstream in(fs::path(out_dir) / "report.json");
  if (in) {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError(std::string("report.json is not valid JSON: ") + e.what());
    }
    for (const auto& c : j.at("checks")) {
      Row row;
      row.id = c.at("id").get<std::string>();
      present.push_back(row.id);
      const double p = c.at("p").get<double>();
      row.p = p > 0.0 ? p_tag(p) : "-";
      const bool unsupported = c.at("unsupported").get<bool>();
      auto num = [&](const char* key, const char* f) {
        const auto& v = c.at(key);
        return v.is_null() ? std::string("inf") : fmt(v.get<double>(), f);
      };
      row.max_ratio = unsupported ? "-" : num("max_ratio", "%.4g");
      row.stability = unsupported ? "-" : num("stability", "%.3g");
      const auto& fits = c.at("fits");
      row.fit = fits.empty() ? "-"
                             : fmt(fits[0].at("slope").get<double>(), "%.3f") + "/" +
                                   fmt(fits[0].at("target").get<double>(), "%.3f");
      const bool hard_fail = c.at("hard").get<bool>() && !c.at("hard_ok").get<bool>();
      row.status = c.at("status").get<std::string>();
      if (hard_fail) row.status = "FAIL (hard)";
      rows.push_back(row);
    }
  }
  const auto extra = skipped_rows(requested, present);
  rows.insert(rows.end(), extra.begin(), extra.end());
  return render(rows);
}

int exit_status(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports)
    if (r.hard && !r.hard_ok) return 1;
  return 0;
}

}  // namespace nestlab

#include "nestlab/error.hpp"
#include "nestlab/run.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace nestlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nestlab-test-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream o;
  o << in.rdbuf();
  return o.str();
}

RunConfig small_run(const fs::path& out) {
  RunConfig cfg;
  cfg.check.fractal = "vicsek";
  cfg.check.level = 3;
  cfg.check.random_count = 2;
  cfg.check.heat_level = 2;
  cfg.check.time_count = 5;
  cfg.out_dir = out.string();
  cfg.cache_dir = (out / "cache").string();
  return cfg;
}

}  // namespace

TEST_SUITE("run") {
  TEST_CASE("reports are byte-identical across runs") {
    const fs::path a = scratch("det-a"), b = scratch("det-b");
    const std::vector<std::string> names = {"coarea", "truncation", "poincare"};
    Pipeline(small_run(a)).check(names);
    Pipeline(small_run(b)).check(names);
    CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
    REQUIRE(fs::exists(a / "check_coarea_p1.csv"));
    CHECK(slurp(a / "check_coarea_p1.csv") == slurp(b / "check_coarea_p1.csv"));
    CHECK(slurp(a / "check_poincare-simplex_p2.csv") == slurp(b / "check_poincare-simplex_p2.csv"));
    CHECK_FALSE(slurp(a / "report.json").empty());
  }

  TEST_CASE("spectral cache is reused") {
    const fs::path out = scratch("cache");
    {
      Pipeline first(small_run(out));
      first.spectrum();
      CHECK_FALSE(first.manifest().spectral_cached);
      CHECK(fs::exists(first.manifest().cache_file));
    }
    Pipeline second(small_run(out));
    second.spectrum();
    CHECK(second.manifest().spectral_cached);
    CHECK(fs::exists(out / "spectrum.csv"));
  }

  TEST_CASE("cache round trip preserves the spectrum") {
    const fs::path out = scratch("roundtrip");
    auto mesh = make_mesh(build_spec("sg"), 2);
    const SpectralData sd = spectral_decompose(EnergyForm(mesh));
    save_spectral(sd, (out / "s.bin").string());
    const auto back = load_spectral((out / "s.bin").string(), mesh);
    REQUIRE(back.has_value());
    CHECK(back->eigenvalues == sd.eigenvalues);
    CHECK(back->eigenvectors == sd.eigenvectors);
    CHECK_FALSE(load_spectral((out / "s.bin").string(), make_mesh(build_spec("sg"), 3)).has_value());
    CHECK_FALSE(load_spectral((out / "missing.bin").string(), mesh).has_value());
  }

  TEST_CASE("summary table rows") {
    const std::string empty = summary_table({});
    CHECK(empty.find("check") == 0);
    CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);

    CheckReport ok, hard, skip;
    ok.id = "a";
    ok.p = 2;
    ok.pass = true;
    hard.id = "b";
    hard.p = 2;
    add_instance(hard, {"f", "simplex", 1, 1.0, 1.0, 0.0}, 1e-12);
    finalize(hard);
    skip.id = "c";
    skip.unsupported = true;
    const std::string t = summary_table({ok, hard, skip}, {"a", "missing"});
    CHECK(t.find("PASS") != std::string::npos);
    CHECK(t.find("FAIL (hard)") != std::string::npos);
    CHECK(t.find("SKIPPED\n") != std::string::npos);
    CHECK(t.find("SKIPPED (no report)") != std::string::npos);
    CHECK(exit_status({ok, skip}) == 0);
    CHECK(exit_status({ok, hard}) == 1);
  }

  TEST_CASE("report command without a report") {
    const fs::path out = scratch("noreport");
    const std::string t = emit_summary(out.string(), {"coarea"});
    CHECK(t.find("coarea") != std::string::npos);
    CHECK(t.find("SKIPPED (no report)") != std::string::npos);
  }

  TEST_CASE("emit_summary reads back the written report") {
    const fs::path out = scratch("emit");
    const auto reps = Pipeline(small_run(out)).check({"coarea"});
    CHECK(emit_summary(out.string()) == summary_table(reps));
  }

  TEST_CASE("budget errors surface the stage") {
    const fs::path out = scratch("budget");
    RunConfig cfg = small_run(out);
    cfg.check.level = 6;
    cfg.check.budget.max_cells = 1000;
    try {
      Pipeline(cfg).build();
      FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
      CHECK(e.stage() == "build_mesh");
    }
  }

  TEST_CASE("report ids") {
    CHECK(report_ids("poincare").size() == 2);
    CHECK(report_ids("pseudo-poincare").size() == 2);
    CHECK(report_ids("coarea") == std::vector<std::string>{"coarea"});
    CHECK(needs_spectral("heat-asymptotics"));
    CHECK_FALSE(needs_spectral("coarea"));
  }
}

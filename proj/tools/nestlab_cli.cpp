#include "nestlab/error.hpp"
#include "nestlab/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace nestlab;

int main(int argc, char** argv) {
  CLI::App app{"nestlab: nested fractals, Dirichlet forms, heat kernels and variation inequalities"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  int level = -1;
  double p = 0.0;
  app.add_option("--config", config_path, "config file (flat key-value, sections per stage)");
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--level", level, "mesh level n");
  app.add_option("--p", p, "exponent p, replacing checks.p");

  auto* build = app.add_subcommand("build", "spec.json and mesh CSVs");
  auto* spectrum = app.add_subcommand("spectrum", "eigenpairs of the heat mesh");
  auto* heat = app.add_subcommand("heat", "heat kernel diagonal and kernel slices");
  auto* variation = app.add_subcommand("variation", "variation profiles of the suite");
  auto* check = app.add_subcommand("check", "run inequality checks");
  std::vector<std::string> names;
  check->add_option("names", names, "check names or 'all'")->required();
  auto* report = app.add_subcommand("report", "summary table of <out>/report.json");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (*seed_opt) cfg.check.seed = seed;
    if (level >= 0) cfg.check.level = level;
    if (p > 0.0) cfg.ps = {p};

    if (report->parsed()) {
      std::cout << emit_summary(cfg.out_dir, cfg.checks);
      return 0;
    }
    Pipeline pipe(cfg);
    int status = 0;
    if (build->parsed()) pipe.build();
    if (spectrum->parsed()) pipe.spectrum();
    if (heat->parsed()) pipe.heat();
    if (variation->parsed()) pipe.variation();
    if (check->parsed()) {
      const auto reports = pipe.check(names);
      std::cout << summary_table(reports, names);
      status = exit_status(reports);
    }
    pipe.write_manifest();
    return status;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return 2;
  } catch (const BudgetError& e) {
    std::fprintf(stderr, "budget exceeded in %s\n", e.what());
    return 3;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
}

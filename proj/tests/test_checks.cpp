#include "nestlab/checks.hpp"
#include "nestlab/error.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>

using namespace nestlab;

namespace {

CheckConfig small_config(const char* fractal, int level) {
  CheckConfig cfg;
  cfg.fractal = fractal;
  cfg.level = level;
  cfg.random_count = 2;
  cfg.pairs = 100;
  return cfg;
}

}  // namespace

TEST_SUITE("checks") {
  TEST_CASE("record bookkeeping") {
    CheckReport rep;
    rep.id = "demo";
    add_instance(rep, {"f", "simplex", 1, 0.5, 1.0, 2.0}, 1e-12);
    add_instance(rep, {"f", "simplex", 2, 0.25, 1.5, 2.0}, 1e-12);
    add_instance(rep, {"g", "simplex", 2, 0.25, 0.0, 0.0}, 1e-12);
    finalize(rep);
    CHECK(rep.records.size() == 3);
    CHECK(rep.degenerate == 1);
    CHECK(rep.max_ratio == doctest::Approx(0.75));
    CHECK(rep.stability == doctest::Approx(1.5));
    CHECK(rep.pass);

    CheckReport bad;
    add_instance(bad, {"f", "simplex", 1, 0.5, 1.0, 0.0}, 1e-12);
    finalize(bad);
    CHECK(bad.hard);
    CHECK_FALSE(bad.hard_ok);
    CHECK(std::isinf(bad.max_ratio));
    CHECK_FALSE(bad.pass);
  }

  TEST_CASE("stability limit fails a spread-out report") {
    CheckReport rep;
    add_instance(rep, {"f", "ball", 1, 0.5, 1.0, 1.0}, 1e-12);
    add_instance(rep, {"f", "ball", 2, 0.25, 1.0, 10.0}, 1e-12);
    finalize(rep);
    CHECK(rep.stability == doctest::Approx(10.0));
    CHECK_FALSE(rep.pass);
  }

  TEST_CASE("constant functions give degenerate passing reports") {
    CheckConfig cfg = small_config("vicsek", 4);
    cfg.suite = {{"one", "harmonic", {}}};
    cfg.suite[0].params.boundary = {0.0, 0.0, 0.0, 0.0};
    const Workspace zero(cfg);
    const CheckReport rep = check_poincare(zero, 2.0, Locus::Simplex);
    CHECK(rep.degenerate == static_cast<int>(rep.records.size()));
    CHECK(rep.pass);
    // a nonzero constant is reproduced up to rounding, so only the pass flag is asserted
    cfg.suite[0].params.boundary = {1.0, 1.0, 1.0, 1.0};
    const Workspace one(cfg);
    CHECK(check_poincare(one, 2.0, Locus::Simplex).pass);
    CHECK(check_truncation_bound(one, 2.0).pass);
  }

  TEST_CASE("coarea identity holds exactly") {
    const Workspace ws(small_config("sg", 4));
    const CheckReport rep = check_coarea(ws);
    CHECK(rep.hard);
    CHECK(rep.hard_ok);
    CHECK(rep.pass);
  }

  TEST_CASE("truncation bound holds") {
    const Workspace ws(small_config("vicsek", 4));
    const CheckReport rep = check_truncation_bound(ws, 2.0);
    CHECK(rep.hard_ok);
    CHECK(rep.pass);
  }

  TEST_CASE("chains of adjacent simplices") {
    auto mesh = make_mesh(build_spec("vicsek"), 2);
    // level 1: four corner cells each touch the centre only
    CHECK(adjacent_chains(*mesh, 1, 2).size() == 4);
    CHECK(adjacent_chains(*mesh, 1, 3).size() == 6);
  }

  TEST_CASE("adjacent-simplex bound is Vicsek only") {
    const Workspace ws(small_config("sg", 4));
    const auto reps = run_check(ws, "adjacent-l1", 1.0);
    REQUIRE(reps.size() == 1);
    CHECK(reps[0].unsupported);
    CHECK_FALSE(reps[0].pass);
  }

  TEST_CASE("Morrey needs p > 1") {
    const Workspace ws(small_config("vicsek", 4));
    CHECK_THROWS_AS(check_morrey(ws, 1.0, Locus::Simplex), UnsupportedCase);
  }

  TEST_CASE("unknown check name") {
    const Workspace ws(small_config("vicsek", 3));
    CHECK_THROWS_AS(run_check(ws, "nonsense", 2.0), UsageError);
  }

  TEST_CASE("default suite") {
    CheckConfig cfg = small_config("vicsek", 3);
    cfg.random_count = 3;
    CHECK(default_suite(cfg, 2.0).size() == 4);
    CHECK(default_suite(cfg, 1.0).size() == 5);
    CHECK(default_suite(cfg, 2.0).front().kind == "harmonic");
  }

  TEST_CASE("ball centers start at the junction") {
    const Workspace ws(small_config("vicsek", 4));
    const auto& centers = ws.ball_centers();
    REQUIRE(!centers.empty());
    CHECK(centers.front().junction);
    const Index j = junction_vertex(ws.mesh());
    CHECK((centers.front().x - ws.mesh().point_vec(j)).norm() < 1e-15);
  }
}

#include "nestlab/checks.hpp"
#include "nestlab/functions.hpp"
#include "nestlab/variation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nestlab;

namespace {

double brute_double_sum(const LevelMesh& mesh, const Vec& f, const Region& F, double r, double p) {
  double s = 0.0;
  for (Index x : F.ids)
    for (Index y : F.ids)
      if (mesh.distance(x, y) <= r * (1.0 + 1e-9))
        s += std::pow(std::abs(f[x] - f[y]), p) * F.weight[static_cast<std::size_t>(x)] * F.weight[static_cast<std::size_t>(y)];
  return s;
}

Vec random_values(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vec f(n);
  for (Index i = 0; i < n; ++i) f[i] = nd(rng);
  return f;
}

}  // namespace

TEST_SUITE("variation") {
  TEST_CASE("finest level") {
    CHECK(finest_level(*make_mesh(build_spec("sg"), 6)) == 4);
    CHECK(finest_level(*make_mesh(build_spec("vicsek"), 6)) == 5);
    auto mesh = make_mesh(build_spec("vicsek"), 3);
    CHECK(ks_radius(*mesh, 2) == doctest::Approx(std::sqrt(2.0) / 3.0 / 9.0));
  }

  TEST_CASE("double sum against brute force") {
    auto mesh = make_mesh(build_spec("sg"), 4);
    const Vec f = random_values(mesh->vertex_count(), 1);
    const Region all = region_all(*mesh), cell = region_simplex(*mesh, 1, 2);
    for (double p : {1.0, 1.5, 2.0})
      for (double r : {0.03, 0.1, 0.4}) {
        CHECK(raw_double_sum(*mesh, f, all, r, p) == doctest::Approx(brute_double_sum(*mesh, f, all, r, p)).epsilon(1e-10));
        CHECK(raw_double_sum(*mesh, f, cell, r, p) == doctest::Approx(brute_double_sum(*mesh, f, cell, r, p)).epsilon(1e-10));
      }
  }

  TEST_CASE("homogeneity and constants") {
    auto mesh = make_mesh(build_spec("vicsek"), 3);
    const Vec f = random_values(mesh->vertex_count(), 2);
    const Region all = region_all(*mesh);
    const double base = variation(*mesh, f, all, 1.5, VariationKind::KS).estimate;
    CHECK(variation(*mesh, 3.0 * f, all, 1.5, VariationKind::KS).estimate == doctest::Approx(3.0 * base).epsilon(1e-10));
    const Vec shifted = (f.array() + 7.0).matrix();
    CHECK(variation(*mesh, shifted, all, 1.5, VariationKind::KS).estimate == doctest::Approx(base).epsilon(1e-9));
    CHECK(variation(*mesh, Vec::Ones(mesh->vertex_count()), all, 2.0, VariationKind::KS).estimate == 0.0);
  }

  TEST_CASE("dyadic truncations sum back to f") {
    const Vec f = (random_values(500, 3).array().abs() * 9.0).matrix();
    Vec sum = Vec::Zero(f.size());
    for (const auto& [k, fk] : truncations(f)) {
      CHECK(fk.minCoeff() >= 0.0);
      CHECK(fk.maxCoeff() <= std::ldexp(1.0, k) * (1.0 + 1e-15));
      sum += fk;
    }
    CHECK((sum - f).cwiseAbs().maxCoeff() <= 1e-12 * f.maxCoeff());
  }

  TEST_CASE("truncation sum is the sum of per-truncation double sums") {
    auto mesh = make_mesh(build_spec("vicsek"), 3);
    const Vec f = (random_values(mesh->vertex_count(), 4).array().abs() * 5.0).matrix();
    const Region all = region_all(*mesh);
    const double r = ks_radius(*mesh, 2);
    double direct = 0.0;
    for (const auto& [k, fk] : truncations(f)) direct += raw_double_sum(*mesh, fk, all, r, 2.0);
    CHECK(truncation_sum(*mesh, f, all, r, 2.0) == doctest::Approx(direct).epsilon(1e-9));
  }

  TEST_CASE("layer cake for the level-set sweep") {
    auto mesh = make_mesh(build_spec("sg"), 4);
    const Vec f = random_values(mesh->vertex_count(), 5);
    const Region all = region_all(*mesh);
    const double r = ks_radius(*mesh, 2);
    std::vector<double> gaps;
    const auto sums = level_set_sums(*mesh, f, all, r, &gaps);
    double layered = 0.0;
    for (std::size_t i = 0; i < sums.size(); ++i) layered += gaps[i] * sums[i];
    CHECK(layered == doctest::Approx(raw_double_sum(*mesh, f, all, r, 1.0)).epsilon(1e-10));
    const LevelSets ls = level_sets(f);
    for (std::size_t i : {std::size_t{0}, sums.size() / 2, sums.size() - 1})
      CHECK(sums[i] == doctest::Approx(raw_double_sum(*mesh, ls.indicators[i], all, r, 1.0)).epsilon(1e-10));
  }

  TEST_CASE("L1 double integral and weak Lp against brute force") {
    auto mesh = make_mesh(build_spec("sg"), 3);
    const Vec f = random_values(mesh->vertex_count(), 6);
    const Region F = region_simplex(*mesh, 1, 1);
    double brute = 0.0;
    for (Index x : F.ids)
      for (Index y : F.ids) brute += std::abs(f[x] - f[y]) * F.weight[static_cast<std::size_t>(x)] * F.weight[static_cast<std::size_t>(y)];
    CHECK(l1_double_integral(f, F) == doctest::Approx(brute).epsilon(1e-12));

    const Vec g = f.cwiseAbs();
    double wb = 0.0;
    for (Index i = 0; i < g.size(); ++i) {
      double m = 0.0;
      for (Index j = 0; j < g.size(); ++j)
        if (g[j] >= g[i]) m += mesh->weights[static_cast<std::size_t>(j)];
      wb = std::max(wb, std::pow(g[i], 1.5) * m);
    }
    CHECK(weak_lp_quantity(g, mesh->weights, 1.5) == doctest::Approx(wb).epsilon(1e-12));
  }

  TEST_CASE("KS profile is dominated by the sub-Gaussian one") {
    auto mesh = make_mesh(build_spec("vicsek"), 4);
    const Region all = region_all(*mesh);
    const Vec f = random_values(mesh->vertex_count(), 7);
    for (int k = 2; k <= 3; ++k) {
      const double r = ks_radius(*mesh, k);
      const double C = ks_subgaussian_constant(*mesh, all, r, 2.0);
      const auto ks = variation(*mesh, f, all, 2.0, VariationKind::KS, k, k);
      const auto sg = variation(*mesh, f, all, 2.0, VariationKind::SubGaussian, k, k);
      CHECK(ks.estimate <= C * sg.estimate * (1.0 + 1e-12));
    }
  }

  TEST_CASE("maximal function dominates its own floor") {
    auto mesh = make_mesh(build_spec("vicsek"), 4);
    const Vec f = random_values(mesh->vertex_count(), 8);
    const MaximalField m = maximal_function(*mesh, f, 2.0);
    CHECK(m.g.size() == mesh->vertex_count());
    CHECK(m.g.minCoeff() >= 0.0);
    const MaximalField single = maximal_function(*mesh, f, 2.0, {m.levels.front()});
    CHECK((m.g - single.g).minCoeff() >= -1e-12);
    CHECK(maximal_function(*mesh, Vec::Constant(mesh->vertex_count(), 2.0), 2.0).g.maxCoeff() == 0.0);
  }

  TEST_CASE("moving average of a constant") {
    auto mesh = make_mesh(build_spec("sg"), 4);
    const Vec avg = moving_average(*mesh, Vec::Constant(mesh->vertex_count(), 3.0), 0.2);
    CHECK((avg.array() - 3.0).abs().maxCoeff() < 1e-12);
  }
}

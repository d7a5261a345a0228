#include "nestlab/error.hpp"
#include "nestlab/functions.hpp"
#include "nestlab/mesh.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace nestlab;

TEST_SUITE("mesh") {
  TEST_CASE("vertex counts") {
    CHECK(make_mesh(build_spec("vicsek"), 4)->vertex_count() == 1876);
    CHECK(make_mesh(build_spec("sg"), 5)->vertex_count() == 366);
    CHECK(make_mesh(build_spec("sg"), 0)->vertex_count() == 3);
  }

  TEST_CASE("total mass is M^t") {
    for (int t : {0, 1, 2}) {
      auto mesh = make_mesh(build_spec("sg"), 4, t);
      const double total = std::accumulate(mesh->weights.begin(), mesh->weights.end(), 0.0);
      CHECK(std::abs(total - std::pow(3.0, t)) <= 1e-12 * std::pow(3.0, t));
    }
  }

  TEST_CASE("simplex measure and similitude scaling") {
    auto spec = build_spec("vicsek");
    auto mesh = make_mesh(spec, 4);
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
      const int m = 1 + static_cast<int>(rng() % 3);
      Index count = 1;
      for (int k = 0; k < m; ++k) count *= spec->M;
      const Index idx = static_cast<Index>(rng() % static_cast<std::uint64_t>(count));
      const Region F = region_simplex(*mesh, m, idx);
      CHECK(std::abs(F.mass() - std::pow(5.0, -m)) <= 1e-12);

      const auto map = spec->word_map(Word::from_index(idx, m, spec->M));
      const Index a = static_cast<Index>(rng() % static_cast<std::uint64_t>(mesh->vertex_count()));
      const Index b = static_cast<Index>(rng() % static_cast<std::uint64_t>(mesh->vertex_count()));
      const Vec x = mesh->point_vec(a), y = mesh->point_vec(b);
      const double d = (map.apply(x) - map.apply(y)).norm();
      CHECK(std::abs(d - std::pow(3.0, -m) * (x - y).norm()) <= 1e-12);
    }
  }

  TEST_CASE("spatial index matches brute force") {
    auto mesh = make_mesh(build_spec("sg"), 5);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-0.1, 1.1), rr(0.0, 0.6);
    for (int trial = 0; trial < 200; ++trial) {
      const double x[2] = {u(rng), u(rng)};
      const double r = rr(rng);
      std::vector<Index> brute;
      for (Index v = 0; v < mesh->vertex_count(); ++v)
        if (mesh->distance(x, v) <= r) brute.push_back(v);
      const auto got = mesh->ball(x, r);
      // the index uses a closed ball with 1e-9 relative slack
      for (Index v : brute) CHECK(std::binary_search(got.begin(), got.end(), v));
      for (Index v : got) CHECK(mesh->distance(x, v) <= r * (1.0 + 1e-9) + 1e-15);
    }
  }

  TEST_CASE("neighbors are symmetric") {
    auto mesh = make_mesh(build_spec("vicsek"), 3);
    for (Index s = 0; s < 25; ++s)
      for (Index nb : mesh->neighbors(2, s)) {
        const auto back = mesh->neighbors(2, nb);
        CHECK(std::find(back.begin(), back.end(), s) != back.end());
      }
    // level-1 Vicsek: the centre touches the four corner cells, which touch nothing else
    CHECK(mesh->neighbors(1, 4).size() == 4);
    CHECK(mesh->neighbors(1, 0).size() == 1);
  }

  TEST_CASE("locate a junction") {
    auto mesh = make_mesh(build_spec("sg"), 4);
    const double x[2] = {0.5, 0.0};
    const Location loc = locate(*mesh, x, 1);
    CHECK(loc.junction);
    CHECK(loc.meeting.size() == 2);
    CHECK(loc.simplex == 0);
  }

  TEST_CASE("domain guard") {
    auto mesh = make_mesh(build_spec("sg"), 4);
    const double c[2] = {0.5, 0.3};
    CHECK(ball_in_domain(*mesh, c, 0.05));
    CHECK_FALSE(ball_in_domain(*mesh, c, 3.0));
  }

  TEST_CASE("budget names build_mesh") {
    try {
      make_mesh(build_spec("sg"), 9);
      FAIL("expected BudgetError");
    } catch (const BudgetError& e) {
      CHECK(e.stage() == "build_mesh");
    }
  }
}

#include "nestlab/dirichlet.hpp"
#include "nestlab/error.hpp"
#include "nestlab/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace nestlab;

namespace {

// Effective resistance between a and b of a weighted graph, via the pseudo-inverse.
double effective_resistance(const Mat& lap, Index a, Index b) {
  Eigen::SelfAdjointEigenSolver<Mat> es(lap);
  Mat pinv = Mat::Zero(lap.rows(), lap.cols());
  for (Index k = 0; k < lap.rows(); ++k)
    if (es.eigenvalues()[k] > 1e-10) pinv += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose() / es.eigenvalues()[k];
  return pinv(a, a) + pinv(b, b) - 2.0 * pinv(a, b);
}

const char* kGasketIfs = R"(name = gasket
dim = 2
contraction = 0.5
unitary = 1 0 ; 0 1
map = 0 0
map = 0.5 0
map = 0.25 0.4330127018922193
)";

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("registry dimensions") {
    auto sg = build_spec("sg");
    CHECK(sg->L == 2.0);
    CHECK(sg->M == 3);
    CHECK(sg->rho == doctest::Approx(5.0 / 3.0).epsilon(1e-10));
    CHECK(sg->d_h == doctest::Approx(std::log(3.0) / std::log(2.0)).epsilon(1e-12));
    CHECK(sg->d_w == doctest::Approx(std::log(5.0) / std::log(2.0)).epsilon(1e-10));
    CHECK(sg->boundary_size() == 3);

    auto v = build_spec("vicsek");
    CHECK(v->L == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(v->M == 5);
    CHECK(v->rho == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(v->d_w == doctest::Approx(std::log(15.0) / std::log(3.0)).epsilon(1e-10));
    CHECK(v->boundary_size() == 4);
    CHECK(v->is_vicsek_family());
    CHECK_FALSE(sg->is_vicsek_family());
  }

  TEST_CASE("alpha_p endpoints") {
    auto sg = build_spec("sg");
    CHECK(sg->alpha(2.0) == doctest::Approx(0.5));
    CHECK(sg->alpha(1.0) == doctest::Approx(sg->d_h / sg->d_w));
  }

  TEST_CASE("rho against level-1 effective resistance") {
    // Independent route: effective resistances of the level-1 network (unit
    // pattern scaled by rho) must reproduce those of the level-0 network.
    for (const char* name : {"sg", "vicsek"}) {
      auto spec = build_spec(name);
      auto mesh = make_mesh(spec, 1);
      EnergyForm form(mesh);
      const Mat lap1 = Mat(form.laplacian());
      auto mesh0 = make_mesh(spec, 0);
      EnergyForm form0(mesh0);
      const Mat lap0 = Mat(form0.laplacian());
      for (const auto& pr : spec->pairs) {
        const double r1 = effective_resistance(lap1, mesh->boundary_ids[pr.a], mesh->boundary_ids[pr.b]);
        const double r0 = effective_resistance(lap0, mesh0->boundary_ids[pr.a], mesh0->boundary_ids[pr.b]);
        CHECK(r1 == doctest::Approx(r0).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("word index round trip and composition") {
    auto spec = build_spec("vicsek");
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
      const int n = 1 + static_cast<int>(rng() % 5);
      Index count = 1;
      for (int k = 0; k < n; ++k) count *= spec->M;
      const Index idx = static_cast<Index>(rng() % static_cast<std::uint64_t>(count));
      const Word w = Word::from_index(idx, n, spec->M);
      CHECK(w.index(spec->M) == idx);
      Vec x(2);
      x << 0.3, 0.7;
      Vec y = x;
      for (int k = n - 1; k >= 0; --k) y = spec->maps[w.letters[k]].apply(y);
      CHECK((spec->word_map(w).apply(x) - y).norm() < 1e-13);
    }
    CHECK(Word::from_index(7, 2, 5).to_string() == "2.3");
  }

  TEST_CASE("custom IFS file reproduces the gasket") {
    std::istringstream in(kGasketIfs);
    const IfsData data = parse_ifs(in);
    CHECK(data.maps.size() == 3);
    auto spec = build_spec(data);
    CHECK(spec->rho == doctest::Approx(5.0 / 3.0).epsilon(1e-10));
    CHECK(spec->name == "gasket");
  }

  TEST_CASE("declared rho is checked") {
    std::istringstream in(std::string(kGasketIfs) + "rho = 2\n");
    CHECK_THROWS_AS(build_spec(parse_ifs(in)), ValidationError);
  }

  TEST_CASE("parse errors carry the line") {
    std::istringstream in("dim = 2\ncontraction = 0.5\nbogus = 1\n");
    try {
      parse_ifs(in);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 3);
    }
  }

  TEST_CASE("differing unitary parts are rejected") {
    IfsData data;
    Similitude a;
    a.contraction = 0.5;
    a.unitary = Mat::Identity(2, 2);
    a.translation = Vec::Zero(2);
    Similitude b = a;
    b.unitary << 0, -1, 1, 0;
    b.translation = Vec{{0.5, 0.0}};
    Similitude c = a;
    c.translation = Vec{{0.25, 0.4330127018922193}};
    data.maps = {a, b, c};
    CHECK_THROWS_AS(build_spec(data), ValidationError);
  }

  TEST_CASE("unknown registry names") {
    CHECK_THROWS_AS(build_spec("carpet"), UsageError);
    CHECK_THROWS_AS(build_spec("vicsek-9"), UsageError);
  }

  TEST_CASE("higher-dimensional Vicsek") {
    auto v3 = build_spec("vicsek-3");
    CHECK(v3->M == 9);
    CHECK(v3->d_h == doctest::Approx(2.0));
    CHECK(v3->boundary_size() == 8);
    CHECK(v3->skipped_reflections > 0);
    CHECK(v3->rho == doctest::Approx(3.0).epsilon(1e-9));
  }

  TEST_CASE("separation constant") {
    CHECK(build_spec("sg")->beta == doctest::Approx(std::sqrt(3.0) / 4.0).epsilon(1e-9));
    CHECK(build_spec("vicsek")->beta == doctest::Approx(std::sqrt(2.0) / 3.0).epsilon(1e-9));
  }
}

#include "nestlab/dirichlet.hpp"
#include "nestlab/functions.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nestlab;

TEST_SUITE("dirichlet") {
  TEST_CASE("harmonic energy is level independent") {
    for (const char* name : {"vicsek", "sg"}) {
      auto spec = build_spec(name);
      std::vector<double> b(static_cast<std::size_t>(spec->boundary_size()));
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = std::sin(1.0 + 2.0 * static_cast<double>(i));
      EnergyForm f0(make_mesh(spec, 0));
      const double e0 = f0.energy(harmonic_extension(f0, b));
      for (int n = 1; n <= 5; ++n) {
        EnergyForm form(make_mesh(spec, n));
        const double e = form.energy(harmonic_extension(form, b));
        CHECK(std::abs(e - e0) <= 1e-8 * e0);
      }
    }
  }

  TEST_CASE("harmonic extension restricts to the coarser extension") {
    auto spec = build_spec("sg");
    auto coarse = make_mesh(spec, 2), fine = make_mesh(spec, 4);
    EnergyForm fc(coarse), ff(fine);
    const std::vector<double> b = {0.3, -1.0, 2.0};
    const Vec hc = harmonic_extension(fc, b).values, hf = harmonic_extension(ff, b).values;
    for (Index v = 0; v < coarse->vertex_count(); ++v) {
      const Index w = fine->nearest_vertex(coarse->point(v));
      CHECK(hf[w] == doctest::Approx(hc[v]).epsilon(1e-10));
    }
  }

  TEST_CASE("Dirichlet solution minimizes the energy") {
    auto mesh = make_mesh(build_spec("vicsek"), 3);
    EnergyForm form(mesh);
    const std::vector<Index> fixed(mesh->boundary_ids.begin(), mesh->boundary_ids.end());
    std::vector<Index> sorted = fixed;
    std::sort(sorted.begin(), sorted.end());
    Vec vals(static_cast<Index>(sorted.size()));
    for (Index i = 0; i < vals.size(); ++i) vals[i] = static_cast<double>(i % 2);
    const Vec h = dirichlet_solve(form, sorted, vals);
    const double e = form.energy(h);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 1e-3);
    for (int trial = 0; trial < 20; ++trial) {
      Vec g = h;
      for (Index v = 0; v < g.size(); ++v)
        if (!std::binary_search(sorted.begin(), sorted.end(), v)) g[v] += nd(rng);
      CHECK(form.energy(g) >= e);
    }
  }

  TEST_CASE("Laplacian is symmetric with zero row sums") {
    EnergyForm form(make_mesh(build_spec("sg"), 3));
    const Mat L = Mat(form.laplacian());
    CHECK((L - L.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(L.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
    Vec f = Vec::Random(L.rows());
    CHECK(f.dot(L * f) == doctest::Approx(form.energy(f)).epsilon(1e-12));
  }

  TEST_CASE("renormalization reaches a fixed point") {
    auto spec = build_spec("vicsek");
    const auto rn = renormalize_conductances(*spec);
    CHECK(rn.residual < 1e-10);
    CHECK(rn.rho == doctest::Approx(3.0).epsilon(1e-10));
  }
}

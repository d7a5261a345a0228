#include "nestlab/error.hpp"
#include "nestlab/functions.hpp"
#include "nestlab/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace nestlab;

namespace {

struct Fixture {
  std::shared_ptr<const LevelMesh> mesh = make_mesh(build_spec("vicsek"), 3);
  EnergyForm form{mesh};
  SpectralData sd = spectral_decompose(form);
};

Fixture& fixture() {
  static Fixture f;
  return f;
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("eigenpairs are weighted-orthonormal") {
    const auto& sd = fixture().sd;
    const Vec w = Eigen::Map<const Vec>(fixture().mesh->weights.data(), fixture().mesh->vertex_count());
    const Mat G = sd.eigenvectors.transpose() * w.asDiagonal() * sd.eigenvectors;
    CHECK((G - Mat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(std::abs(sd.eigenvalues[0]) < 1e-8 * sd.lambda_max);
    CHECK(sd.eigenvalues[1] > 1e-6);
  }

  TEST_CASE("heat kernel structure") {
    const auto& sd = fixture().sd;
    const auto& mesh = *fixture().mesh;
    const Vec w = Eigen::Map<const Vec>(mesh.weights.data(), mesh.vertex_count());
    const double s = 0.01, t = 0.02;
    const Mat Ps = heat_kernel(sd, s).values, Pt = heat_kernel(sd, t).values, Pst = heat_kernel(sd, s + t).values;
    CHECK((Pt - Pt.transpose()).cwiseAbs().maxCoeff() <= 1e-8 * Pt.cwiseAbs().maxCoeff());
    CHECK(((Pt * w).array() - 1.0).abs().maxCoeff() < 1e-8);
    const Mat comp = Ps * w.asDiagonal() * Pt;
    CHECK((comp - Pst).cwiseAbs().maxCoeff() <= 1e-8 * Pst.cwiseAbs().maxCoeff());
    CHECK(Pt.minCoeff() >= -1e-10 * Pt.cwiseAbs().maxCoeff());
  }

  TEST_CASE("semigroup_apply agrees with the kernel matrix") {
    const auto& sd = fixture().sd;
    const auto& mesh = *fixture().mesh;
    const Vec w = Eigen::Map<const Vec>(mesh.weights.data(), mesh.vertex_count());
    const Vec f = Vec::Random(mesh.vertex_count());
    const Vec a = semigroup_apply(sd, f, 0.05);
    const Vec b = heat_kernel(sd, 0.05).values * f.cwiseProduct(w);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
    const Vec row = heat_kernel_row(sd, 5, 0.05);
    CHECK(row[7] == doctest::Approx(heat_kernel_entry(sd, 5, 7, 0.05)).epsilon(1e-10));
  }

  TEST_CASE("partial spectrum matches the dense one") {
    const auto& f = fixture();
    const SpectralData part = spectral_decompose(f.form, 12);
    CHECK_FALSE(part.full);
    REQUIRE(part.count() == 12);
    for (Index j = 1; j < 12; ++j) CHECK(part.eigenvalues[j] == doctest::Approx(f.sd.eigenvalues[j]).epsilon(1e-7));
  }

  TEST_CASE("time window is enforced") {
    const auto& sd = fixture().sd;
    CHECK(sd.window_lo() < sd.window_hi());
    CHECK_THROWS_AS(sd.check_window(sd.window_hi() * 10.0), WindowError);
    CHECK_THROWS_AS(heat_kernel(sd, -1.0), DomainError);
    const auto grid = time_grid(sd, 5);
    CHECK(grid.size() == 5);
    CHECK(grid.front() == doctest::Approx(sd.window_lo()));
  }

  TEST_CASE("on-diagonal decay exponent") {
    auto mesh = make_mesh(build_spec("vicsek"), 4);
    EnergyForm form(mesh);
    const SpectralData sd = spectral_decompose(form);
    const auto h = heat_asymptotics(sd, time_grid(sd, 8), mesh->corner(1, 4, 0), {}, 0.1);
    CHECK(h.diagonal.pass);
    CHECK(std::abs(h.diagonal.slope - h.diagonal.target) < 0.1);
  }

  TEST_CASE("weak Bakry-Emery ratio of a constant vanishes") {
    const auto& sd = fixture().sd;
    CHECK(weak_be_ratio(sd, Vec::Zero(fixture().mesh->vertex_count()), 0.1) == 0.0);
  }
}

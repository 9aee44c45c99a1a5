#include <cmath>
#include <filesystem>
#include <sstream>

#include "doctest.h"
#include "ymh/data.hpp"
#include "ymh/diagnose.hpp"
#include "ymh/snapshot.hpp"

using namespace ymh;

namespace {

GridPtr grid_of(int N) {
  GridSpec g;
  g.N = N;
  return Grid::make(g);
}

double rel_l2(const Field& a, const Field& b) {
  return l2_norm(a.physical() - b.physical()) / std::max(l2_norm(b.physical()), 1e-300);
}

}  // namespace

TEST_CASE("exact Lorenz potentials") {
  auto g = grid_of(16);
  Potential A = make_lorenz_potential(g, AlgebraKind::su(2), 3, 2, 0.1);
  Field div = A[0].dt.zeros_like().spectral();
  for (int i = 1; i <= 3; ++i) div += apply(A[i].u, Multiplier::derivative(i - 1));
  CHECK(l2_norm((A[0].dt - div).physical()) < 1e-13 * l2_norm(div.physical()));
  for (const auto& c : A) {
    Field s = c.u.spectral();
    for (int e = 0; e < s.entries(); ++e) CHECK(std::abs(s.block(e)[0]) < 1e-15);
  }
}

TEST_CASE("curvature data equals the curvature of the potential") {
  auto g = grid_of(16);
  for (auto make : {0, 1}) {
    CauchyData d = make == 0 ? make_compliant_data(g, AlgebraKind::su(2), 2, 2, 0.1, 3.0)
                             : make_random_data(g, AlgebraKind::su(2), 2, 2, 0.1, 3.0);
    FData f = build_F_data(d);
    auto F = curvature_from_potential(d.a, d.dota);
    for (int k = 0; k < 6; ++k) CHECK(rel_l2(f.f[k], F[k]) < 1e-13);
  }
}

TEST_CASE("time derivative of spatial curvature") {
  // f_dot_ij = d_i a_dot_j - d_j a_dot_i + [a_dot_i, a_j] + [a_i, a_dot_j]
  auto g = grid_of(16);
  CauchyData d = make_random_data(g, AlgebraKind::su(2), 4, 2, 0.1, 3.0);
  FData f = build_F_data(d);
  for (int i = 1; i <= 3; ++i)
    for (int j = i + 1; j <= 3; ++j) {
      Field want = apply(d.dota[j], Multiplier::derivative(i - 1)) - apply(d.dota[i], Multiplier::derivative(j - 1));
      want += commutator(d.dota[i], d.a[j]);
      want += commutator(d.a[i], d.dota[j]);
      CHECK(rel_l2(f.dotf[pair_index(i, j)], want) < 1e-13);
    }
}

TEST_CASE("compliant data satisfies both constraints") {
  auto g = grid_of(16);
  for (std::uint64_t seed : {1u, 2u}) {
    CauchyData d = make_compliant_data(g, AlgebraKind::su(2), seed, 2, 0.1, 3.0);
    FData f = build_F_data(d);
    CHECK(gauss_residual(d, f) < 1e-10);
    CHECK(lorenz_data_residual(d) < 1e-12);
    GaugeState s = state_from_data(d);
    CHECK(lorenz_residual(s) < 1e-12);
    CHECK(compatibility_residual(s) < 1e-12);
    CHECK(gauss_residual(s) < 1e-10);
  }
}

TEST_CASE("generic random data violates the Gauss constraint") {
  auto g = grid_of(16);
  CauchyData d = make_random_data(g, AlgebraKind::su(2), 5, 2, 0.1, 3.0);
  CHECK(gauss_residual(d, build_F_data(d)) > 1e-3);
  CHECK(lorenz_data_residual(d) < 1e-12);
}

TEST_CASE("finalize_lorenz is idempotent and only touches a_dot_0") {
  auto g = grid_of(16);
  CauchyData d = make_random_data(g, AlgebraKind::su(2), 6, 2, 0.1, 3.0);
  d.dota[0] = random_field(g, AlgebraKind::su(2), 77, 2, 0.1, false);
  CHECK(lorenz_data_residual(d) > 1e-3);
  CauchyData once = finalize_lorenz(d), twice = finalize_lorenz(once);
  CHECK(lorenz_data_residual(once) < 1e-12);
  for (int a = 0; a < 4; ++a) {
    CHECK(l2_norm((once.a[a] - twice.a[a]).physical()) == 0.0);
    CHECK(l2_norm((once.dota[a] - twice.dota[a]).physical()) == 0.0);
  }
  for (int i = 1; i <= 3; ++i) CHECK(l2_norm((once.dota[i] - d.dota[i]).physical()) == 0.0);
}

TEST_CASE("data norm") {
  auto g = grid_of(8);
  CHECK(data_norm(CauchyData::zeros(g, AlgebraKind::su(2))) == 0.0);
  CauchyData d = make_random_data(g, AlgebraKind::su(2), 1, 2, 0.1, 3.0);
  const double n = data_norm(d);
  d *= 3.0;
  CHECK(data_norm(d) == doctest::Approx(3.0 * n).epsilon(1e-12));
}

TEST_CASE("f-bound ratios are finite, zero data gives zero") {
  auto g = grid_of(16);
  CauchyData z = CauchyData::zeros(g, AlgebraKind::su(2));
  FBoundReport r0 = check_f_bounds(z, build_F_data(z));
  CHECK(r0.f_printed == 0.0);
  CHECK(r0.f_corrected == 0.0);
  CauchyData d = make_compliant_data(g, AlgebraKind::su(2), 2, 2, 0.1, 3.0);
  FBoundReport r = check_f_bounds(d, build_F_data(d));
  CHECK(std::isfinite(r.f_printed));
  CHECK(std::isfinite(r.f_corrected));
  CHECK(std::isfinite(r.fdot));
  CHECK(r.f_corrected <= r.f_printed + 1e-300);
}

TEST_CASE("abelian plane wave rejects bad input") {
  auto g = grid_of(8);
  CHECK_THROWS_AS(abelian_plane_wave(g, AlgebraKind::su(2), {1, 0, 0}, 2, 1.0, 0.0), StructuralError);
  CHECK_THROWS_AS(abelian_plane_wave(g, AlgebraKind::so(2), {1, 0, 0}, 1, 1.0, 0.0), StructuralError);
  CHECK_THROWS_AS(abelian_plane_wave(g, AlgebraKind::so(2), {0, 0, 0}, 1, 1.0, 0.0), StructuralError);
}

TEST_CASE("snapshot round trip") {
  auto g = grid_of(8);
  Field u = random_field(g, AlgebraKind::su(2), 3, 2, 1.0, false);
  std::stringstream ss;
  write_field(ss, u, 0x1234abcdull);
  SnapshotHeader h;
  Field v = read_field(ss, nullptr, &h);
  CHECK(h.family == 2);
  CHECK(h.n == 2);
  CHECK(h.N == 8);
  CHECK(h.config_hash == 0x1234abcdull);
  CHECK(h.L == doctest::Approx(2.0 * kPi));
  CHECK(l2_norm((u - v.physical()).physical()) == 0.0);

  // the header starts with the magic bytes
  std::stringstream s2;
  write_field(s2, u, 1);
  CHECK(s2.str().substr(0, 4) == "YMH1");
  std::stringstream bad("XXXX" + s2.str().substr(4));
  CHECK_THROWS(read_field(bad, nullptr));

  // reading onto a different grid fails
  std::stringstream s3;
  write_field(s3, u, 1);
  CHECK_THROWS_AS(read_field(s3, grid_of(16)), StructuralError);
}

TEST_CASE("bundles and saved data") {
  auto g = grid_of(8);
  auto dir = std::filesystem::temp_directory_path() / "ymh_test_bundle";
  std::filesystem::create_directories(dir);
  CauchyData d = make_compliant_data(g, AlgebraKind::su(2), 1, 2, 0.1, 3.0);
  const std::string path = (dir / "data.ymh").string();
  save_data(path, d, 42);
  CHECK(std::filesystem::exists(path + ".manifest"));
  auto fields = read_bundle(path, g);
  REQUIRE(fields.size() == 10);
  CHECK(fields[0].name == "a0");
  CHECK(fields[9].name == "phi1");
  CHECK(l2_norm((fields[5].field - d.dota[1]).physical()) == 0.0);
  std::filesystem::remove_all(dir);
}

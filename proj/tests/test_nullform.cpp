#include <cmath>

#include "doctest.h"
#include "ymh/data.hpp"
#include "ymh/nullform.hpp"

using namespace ymh;

namespace {

GridPtr grid_of(int N) {
  GridSpec g;
  g.N = N;
  return Grid::make(g);
}

/// Direct convolution sum_{xi + eta = k} sigma(xi, eta) u(xi) v(eta) over
/// kept modes, restricted to kept outputs.
Field direct_bilinear(const BilinearSymbol& sigma, const Field& u, const Field& v) {
  const auto& g = u.grid();
  Field us = u.spectral(), vs = v.spectral();
  Field out = Field::scalar(g, Repr::Spectral);
  for (std::size_t p = 0; p < g->points(); ++p) {
    if (!g->kept(p) || us.block(0)[p] == 0.0) continue;
    const auto kp = g->mode(p);
    for (std::size_t q = 0; q < g->points(); ++q) {
      if (!g->kept(q)) continue;
      const auto kq = g->mode(q);
      const std::size_t r = g->index_of_mode(kp[0] + kq[0], kp[1] + kq[1], kp[2] + kq[2]);
      const auto kr = g->mode(r);
      if (kr[0] != kp[0] + kq[0] || kr[1] != kp[1] + kq[1] || kr[2] != kp[2] + kq[2]) continue;
      if (!g->kept(r)) continue;
      out.block(0)[r] += sigma(g->xi(p), g->xi(q)) * us.block(0)[p] * vs.block(0)[q];
    }
  }
  return out;
}

double rel(const Field& a, const Field& b) {
  return sobolev_norm(a - b, 0.0) / std::max(sobolev_norm(b, 0.0), 1e-300);
}

}  // namespace

TEST_CASE("tensor-product bilinear forms match direct convolution") {
  auto g = grid_of(8);
  Field u = random_field(g, std::nullopt, 1, 2, 1.0, false);
  Field v = random_field(g, std::nullopt, 2, 2, 1.0, false);
  for (const auto& name : BilinearSymbol::registered()) {
    for (auto [s1, s2] : {std::pair{1, 1}, std::pair{1, -1}, std::pair{-1, -1}}) {
      auto sigma = BilinearSymbol::named(name).with_signs(s1, s2);
      CAPTURE(name);
      CHECK(rel(B_sigma(sigma, u, v), direct_bilinear(sigma, u, v)) < 1e-12);
    }
  }
}

TEST_CASE("symbol tensor evaluation agrees with closed forms") {
  const Vec3 pts[] = {{1.0, 2.0, -3.0}, {0.1, -0.5, 7.0}, {0.0, 0.0, 0.0}, {-4.0, 1.0, 1.0}};
  for (const auto& name : BilinearSymbol::registered())
    for (int s1 : {1, -1})
      for (int s2 : {1, -1}) {
        auto sigma = BilinearSymbol::named(name).with_signs(s1, s2);
        for (const auto& a : pts)
          for (const auto& b : pts) CHECK(std::abs(sigma(a, b) - sigma.closed_form(a, b)) < 1e-12);
      }
  CHECK_THROWS_AS(BilinearSymbol::named("q11"), StructuralError);
  CHECK_THROWS_AS(BilinearSymbol::named("q4"), StructuralError);
  CHECK_THROWS_AS(BilinearSymbol::named("bogus"), StructuralError);
}

TEST_CASE("scalar Q0 vanishes on a null plane wave") {
  // u = cos(k.x - |k| t) at t = 0 solves the massless wave equation.
  auto g = grid_of(16);
  Field u = Field::scalar(g), ut = Field::scalar(g);
  const double k1 = 1.0, k2 = 2.0, w = std::sqrt(5.0);
  for (std::size_t p = 0; p < g->points(); ++p) {
    auto x = g->position(p);
    u.block(0)[p] = std::cos(k1 * x[0] + k2 * x[1]);
    ut.block(0)[p] = w * std::sin(k1 * x[0] + k2 * x[1]);
  }
  SpacetimeField f{u, ut};
  Field q = Q0(f, f, ProductOp::Scalar);
  CHECK(sobolev_norm(q, 0.0) < 1e-12);
  // Q_ab of a function with itself vanishes
  CHECK(sobolev_norm(Qab(f, f, 0, 1, ProductOp::Scalar), 0.0) < 1e-12);
}

TEST_CASE("commutator null forms: antisymmetry and symmetry") {
  auto g = grid_of(16);
  auto kind = AlgebraKind::su(2);
  SpacetimeField u{random_field(g, kind, 1, 2, 1.0, false), random_field(g, kind, 2, 2, 1.0, false)};
  SpacetimeField v{random_field(g, kind, 3, 2, 1.0, false), random_field(g, kind, 4, 2, 1.0, false)};
  // Q_ab[u, v] = -Q_ba[u, v]; Q_0[u, v] = -Q_0[v, u]; Q_ab[u, v] = Q_ab[v, u]
  CHECK(rel(Qab_bracket(u, v, 1, 2), -Qab_bracket(u, v, 2, 1)) < 1e-14);
  CHECK(rel(Q0_bracket(u, v), -Q0_bracket(v, u)) < 1e-14);
  CHECK(rel(Qab_bracket(u, v, 0, 3), Qab_bracket(v, u, 0, 3)) < 1e-14);
  CHECK_THROWS_AS(Qab_bracket(u, v, 2, 2), StructuralError);
}

TEST_CASE("null form identities on exact Lorenz potentials") {
  auto g = grid_of(16);
  auto kind = AlgebraKind::su(2);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Potential A = make_lorenz_potential(g, kind, seed, 2, 0.1);
    SpacetimeField psi{random_field(g, kind, seed + 10, 2, 1.0, false),
                       random_field(g, kind, seed + 20, 2, 1.0, false)};
    Lemma1Report r = verify_lemma1(A, psi);
    CHECK(r.potential_residual < 1e-12);
    CHECK(r.derivative_residual < 1e-12);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) CHECK(nullform_trick_residual(A[1], a, b) < 1e-14);
  }
}

TEST_CASE("the first identity needs the Lorenz gauge") {
  auto g = grid_of(16);
  auto kind = AlgebraKind::su(2);
  Potential A = make_lorenz_potential(g, kind, 4, 2, 0.1);
  A[0].dt += random_field(g, kind, 99, 2, 0.1, true);  // break d_t A_0 = div A
  SpacetimeField psi{random_field(g, kind, 5, 2, 1.0, false), random_field(g, kind, 6, 2, 1.0, false)};
  CHECK(verify_lemma1(A, psi).potential_residual > 1e-3);
}

TEST_CASE("precomputed frakQ agrees with the direct evaluation") {
  auto g = grid_of(16);
  auto kind = AlgebraKind::su(2);
  Potential A = make_lorenz_potential(g, kind, 8, 2, 0.1);
  SpacetimeField psi{random_field(g, kind, 9, 2, 1.0, false), random_field(g, kind, 10, 2, 1.0, false)};
  Field direct = frakQ(A, psi);
  Field acc = psi.u.zeros_like();
  add_frakQ(acc, 1.0, RieszGradients(A), gradient(psi));
  acc.to_spectral();
  acc.dealias();
  CHECK(rel(acc, direct) < 1e-14);
}

TEST_CASE("symbol bounds") {
  auto reports = check_symbol_bounds(20000, 3);
  REQUIRE(reports.size() == 4);
  for (const auto& r : reports) CHECK(std::isfinite(r.max_ratio));
  CHECK(reports[2].id == "qij");
  CHECK(reports[2].max_ratio <= 1.0 + 1e-12);
  CHECK(reports[1].max_ratio <= 4.0);
}

TEST_CASE("angle between vectors") {
  CHECK(angle({1, 0, 0}, {0, 1, 0}) == doctest::Approx(kPi / 2));
  CHECK(angle({1, 0, 0}, {-2, 0, 0}) == doctest::Approx(kPi));
  CHECK(angle({1, 1, 0}, {2, 2, 0}) == doctest::Approx(0.0));
  // accurate for nearly parallel vectors
  CHECK(angle({1, 0, 0}, {1, 1e-9, 0}) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("angle estimate is finite at the corners") {
  for (double a : {0.0, 0.5})
    for (const auto& r : check_angle_estimate(2000, 1, a, 0.25, 0.5)) {
      CHECK(std::isfinite(r.max_ratio));
      CHECK(r.max_ratio > 0.0);
    }
  CHECK_THROWS_AS(check_angle_estimate(10, 1, 0.6, 0.0, 0.0), ConfigError);
}

#include <cmath>

#include "doctest.h"
#include "ymh/algebra.hpp"

using namespace ymh;

namespace {

Matrix pauli(int k) {
  Matrix s = Matrix::Zero(2, 2);
  const cplx i(0.0, 1.0);
  if (k == 1) s << 0, 1, 1, 0;
  if (k == 2) s << 0, -i, i, 0;
  if (k == 3) s << 1, 0, 0, -1;
  return s;
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("dimensions of the registered algebras") {
  CHECK(AlgebraKind::su(2).dimension() == 3);
  CHECK(AlgebraKind::su(3).dimension() == 8);
  CHECK(AlgebraKind::so(2).dimension() == 1);
  CHECK(AlgebraKind::so(3).dimension() == 3);
  CHECK(AlgebraKind::so(2).abelian());
  CHECK_FALSE(AlgebraKind::su(2).abelian());
}

TEST_CASE("su(2) brackets reproduce the Pauli relations") {
  const cplx i(0.0, 1.0);
  const auto kind = AlgebraKind::su(2);
  for (int a = 1; a <= 3; ++a) {
    const int b = a % 3 + 1, c = b % 3 + 1;
    AlgebraElement X(kind, i * pauli(a)), Y(kind, i * pauli(b));
    // [i s_a, i s_b] = -2 i s_c for cyclic (a, b, c)
    CHECK(max_abs(commutator(X, Y).matrix() + 2.0 * i * pauli(c)) < 1e-15);
  }
}

TEST_CASE("exponential matches closed forms") {
  const cplx i(0.0, 1.0);
  for (double th : {0.0, 0.3, 2.0, 7.5}) {
    Matrix e = expm(th * i * pauli(3));
    Matrix want = Matrix::Zero(2, 2);
    want(0, 0) = std::exp(i * th);
    want(1, 1) = std::exp(-i * th);
    CHECK(max_abs(e - want) < 1e-13);

    Matrix J = Matrix::Zero(2, 2);
    J(0, 1) = -th;
    J(1, 0) = th;
    Matrix r = expm(J);
    CHECK(std::abs(r(0, 0) - std::cos(th)) < 1e-13);
    CHECK(std::abs(r(1, 0) - std::sin(th)) < 1e-13);
  }
  // exp(i t n.s) = cos t + i sin t n.s for a unit vector n
  const double n1 = 0.6, n2 = 0.0, n3 = 0.8, t = 1.7;
  Matrix ns = n1 * pauli(1) + n2 * pauli(2) + n3 * pauli(3);
  Matrix want = std::cos(t) * Matrix::Identity(2, 2) + i * std::sin(t) * ns;
  CHECK(max_abs(expm(i * t * ns) - want) < 1e-13);
}

TEST_CASE("projection lands in the algebra") {
  Matrix m = Matrix::Random(3, 3);
  for (auto kind : {AlgebraKind::su(3), AlgebraKind::so(3)}) {
    Matrix p = project_to_algebra(kind, m);
    CHECK(closure_residual(kind, p) < 1e-15);
    // projection is idempotent
    CHECK(max_abs(project_to_algebra(kind, p) - p) < 1e-15);
  }
  CHECK(closure_residual(AlgebraKind::su(2), Matrix::Identity(2, 2)) > 0.5);
}

TEST_CASE("orthonormal bases") {
  for (auto kind : {AlgebraKind::su(2), AlgebraKind::su(3), AlgebraKind::so(3), AlgebraKind::so(2)}) {
    auto basis = orthonormal_basis(kind);
    REQUIRE(static_cast<int>(basis.size()) == kind.dimension());
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = 0; b < basis.size(); ++b)
        CHECK(std::abs(inner(basis[a], basis[b]) - (a == b ? 1.0 : 0.0)) < 1e-14);
  }
}

TEST_CASE("bracket properties on random elements") {
  for (auto kind : {AlgebraKind::su(2), AlgebraKind::su(3), AlgebraKind::so(3), AlgebraKind::so(4)}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto X = random_element(kind, seed, 1.0);
      auto Y = random_element(kind, seed + 100, 1.0);
      auto Z = random_element(kind, seed + 200, 1.0);
      // closure, antisymmetry, Jacobi
      CHECK(closure_residual(kind, commutator(X, Y).matrix()) < 1e-14);
      CHECK(max_abs(commutator(X, Y).matrix() + commutator(Y, X).matrix()) < 1e-14);
      Matrix jac = commutator(X, commutator(Y, Z)).matrix() + commutator(Y, commutator(Z, X)).matrix() +
                   commutator(Z, commutator(X, Y)).matrix();
      CHECK(max_abs(jac) < 1e-13);
      // ad-invariance of the inner product
      CHECK(std::abs(inner(commutator(X, Y), Z) + inner(Y, commutator(X, Z))) < 1e-13);
      CHECK(inner(X, X) > 0.0);
      CHECK(std::abs(X.norm() * X.norm() - inner(X, X)) < 1e-13);
    }
  }
}

TEST_CASE("so(2) is abelian") {
  auto kind = AlgebraKind::so(2);
  auto X = random_element(kind, 3, 1.0), Y = random_element(kind, 4, 1.0);
  CHECK(max_abs(commutator(X, Y).matrix()) < 1e-15);
}

TEST_CASE("random elements are deterministic in the seed") {
  auto a = random_element(AlgebraKind::su(2), 42, 0.5);
  auto b = random_element(AlgebraKind::su(2), 42, 0.5);
  auto c = random_element(AlgebraKind::su(2), 43, 0.5);
  CHECK(max_abs(a.matrix() - b.matrix()) == 0.0);
  CHECK(max_abs(a.matrix() - c.matrix()) > 0.0);
}

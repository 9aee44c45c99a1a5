#include <cmath>

#include "doctest.h"
#include "ymh/grid.hpp"

using namespace ymh;

namespace {

GridPtr grid_of(int N, Dealias d = Dealias::TwoThirds) {
  GridSpec g;
  g.N = N;
  g.dealias = d;
  return Grid::make(g);
}

template <typename F>
Field scalar_from(const GridPtr& g, F&& f) {
  Field u = Field::scalar(g);
  for (std::size_t p = 0; p < g->points(); ++p) u.block(0)[p] = f(g->position(p));
  return u;
}

double max_diff(const Field& a, const Field& b) {
  Field pa = a.physical(), pb = b.physical();
  double m = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) m = std::max(m, std::abs(pa.data()[i] - pb.data()[i]));
  return m;
}

}  // namespace

TEST_CASE("grid spec validation") {
  GridSpec g;
  g.N = 7;
  CHECK_THROWS_AS(g.validate(), ConfigError);
  g.N = 16;
  g.L = -1.0;
  CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("single mode has unit coefficient") {
  auto g = grid_of(8);
  Field u = scalar_from(g, [](const Vec3& x) { return std::exp(cplx(0.0, 2.0 * x[0] - x[1] + 3.0 * x[2])); });
  u.to_spectral();
  const std::size_t k = g->index_of_mode(2, -1, 3);
  for (std::size_t p = 0; p < g->points(); ++p) CHECK(std::abs(u.block(0)[p] - (p == k ? 1.0 : 0.0)) < 1e-14);
  auto m = g->mode(k);
  CHECK(m == std::array<int, 3>{2, -1, 3});
}

TEST_CASE("spectral round trip") {
  auto g = grid_of(16);
  Field u = random_field(g, AlgebraKind::su(2), 5, 4, 1.0, false);
  Field v = u.spectral().physical();
  CHECK(max_diff(u, v) < 1e-14 * max_diff(u, u.zeros_like()));
}

TEST_CASE("derivatives of trigonometric fields") {
  auto g = grid_of(16);
  Field u = scalar_from(g, [](const Vec3& x) { return std::sin(2.0 * x[0]) * std::cos(x[1]); });
  Field dx = scalar_from(g, [](const Vec3& x) { return 2.0 * std::cos(2.0 * x[0]) * std::cos(x[1]); });
  Field dy = scalar_from(g, [](const Vec3& x) { return -std::sin(2.0 * x[0]) * std::sin(x[1]); });
  CHECK(max_diff(apply(u, Multiplier::derivative(0)), dx) < 1e-13);
  CHECK(max_diff(apply(u, Multiplier::derivative(1)), dy) < 1e-13);
  CHECK(max_diff(apply(u, Multiplier::derivative(2)), u.zeros_like()) < 1e-13);
}

TEST_CASE("derivatives on a non-2pi box") {
  GridSpec s;
  s.N = 16;
  s.L = 3.0;
  auto g = Grid::make(s);
  const double k = 2.0 * kPi / 3.0;
  Field u = scalar_from(g, [&](const Vec3& x) { return std::cos(k * x[2]); });
  Field d = scalar_from(g, [&](const Vec3& x) { return -k * std::sin(k * x[2]); });
  CHECK(max_diff(apply(u, Multiplier::derivative(2)), d) < 1e-12);
}

TEST_CASE("Sobolev norm of a single mode") {
  auto g = grid_of(8);
  Field u = scalar_from(g, [](const Vec3& x) { return std::exp(cplx(0.0, x[0] + 2.0 * x[1])); });
  const double L3 = g->volume();
  for (double s : {0.0, 0.95, 1.0, -0.5}) {
    const double want = std::sqrt(L3) * std::pow(6.0, 0.5 * s);
    CHECK(std::abs(sobolev_norm(u, s) - want) < 1e-12 * want);
  }
  CHECK(std::abs(l2_norm(u) - std::sqrt(L3)) < 1e-12);
}

TEST_CASE("Parseval for algebra fields") {
  auto g = grid_of(16);
  Field u = random_field(g, AlgebraKind::su(2), 9, 5, 0.3, false);
  CHECK(std::abs(sobolev_norm(u, 0.0) - l2_norm(u)) < 1e-12 * l2_norm(u));
}

TEST_CASE("multiplier identities") {
  auto g = grid_of(16);
  Field u = random_field(g, std::nullopt, 3, 4, 1.0, true);
  // sum_i R_i R_i = -1 on mean-zero fields
  Field acc = u.zeros_like().spectral();
  for (int i = 0; i < 3; ++i) acc += apply(apply(u, Multiplier::riesz(i)), Multiplier::riesz(i));
  CHECK(max_diff(acc, -u) < 1e-13);
  // |grad|^{-1} |grad| = 1 on mean-zero fields
  CHECK(max_diff(apply(apply(u, Multiplier::abs_grad()), Multiplier::inv_abs_grad()), u) < 1e-13);
  // <grad>^s <grad>^{-s} = 1
  CHECK(max_diff(apply(apply(u, Multiplier::bessel(0.7)), Multiplier::bessel(-0.7)), u) < 1e-13);
  // -lap = |grad|^2
  Field lap = u.zeros_like().spectral();
  for (int i = 0; i < 3; ++i) lap -= apply(apply(u, Multiplier::derivative(i)), Multiplier::derivative(i));
  CHECK(max_diff(lap, apply(apply(u, Multiplier::abs_grad()), Multiplier::abs_grad())) < 1e-12);
}

TEST_CASE("odd multipliers keep real fields real") {
  auto g = grid_of(8, Dealias::None);
  Field u = random_field(g, std::nullopt, 4, 4, 1.0, false);  // includes the Nyquist plane
  for (int i = 0; i < 3; ++i) {
    Field d = apply(u, Multiplier::derivative(i)).to_physical();
    double im = 0.0;
    for (std::size_t p = 0; p < d.size(); ++p) im = std::max(im, std::abs(d.data()[p].imag()));
    CHECK(im < 1e-13);
  }
}

TEST_CASE("multiplier names") {
  CHECK(Multiplier::from_name("d2").kind() == Multiplier::Kind::Derivative);
  CHECK(Multiplier::from_name("d2").axis() == 1);
  CHECK(Multiplier::from_name("riesz3").axis() == 2);
  CHECK(Multiplier::from_name("bessel:0.5").power() == doctest::Approx(0.5));
  CHECK(Multiplier::from_name("invabs").kind() == Multiplier::Kind::InvAbsGrad);
  CHECK_THROWS_AS(Multiplier::from_name("d4"), StructuralError);
  CHECK_THROWS_AS(Multiplier::from_name("laplace"), StructuralError);
  const Vec3 xi{1.0, 2.0, 2.0};
  CHECK(std::abs(Multiplier::derivative(1).symbol(xi) - cplx(0.0, 2.0)) < 1e-15);
  CHECK(std::abs(Multiplier::riesz(0).symbol(xi) - cplx(0.0, 1.0 / 3.0)) < 1e-15);
  CHECK(std::abs(Multiplier::derivative(1).reflected().symbol(xi) - cplx(0.0, -2.0)) < 1e-15);
}

TEST_CASE("products of resolved fields are exact") {
  auto g = grid_of(16);
  // bands 2 + 2 <= N/3 so the dealiased product equals the pointwise one
  Field u = random_field(g, AlgebraKind::su(2), 1, 2, 1.0, false);
  Field v = random_field(g, AlgebraKind::su(2), 2, 2, 1.0, false);
  Field c = commutator(u, v);
  Field m = pointwise_product(u, v, ProductOp::Matrix);
  double worst_c = 0.0, worst_m = 0.0;
  Field pc = c.physical(), pm = m.physical();
  for (std::size_t p = 0; p < g->points(); p += 7) {
    Matrix a = u.matrix_at(p), b = v.matrix_at(p);
    worst_c = std::max(worst_c, (pc.matrix_at(p) - (a * b - b * a)).cwiseAbs().maxCoeff());
    worst_m = std::max(worst_m, (pm.matrix_at(p) - a * b).cwiseAbs().maxCoeff());
  }
  const double scale = max_diff(u, u.zeros_like()) * max_diff(v, v.zeros_like());
  CHECK(worst_c < 1e-14 * scale);
  CHECK(worst_m < 1e-14 * scale);
  CHECK(closure_residual(pc) < 1e-13);
}

TEST_CASE("accumulating commutator kernels agree with matrix algebra") {
  auto g = grid_of(8, Dealias::None);
  for (auto kind : {AlgebraKind::su(2), AlgebraKind::su(3), AlgebraKind::so(3)}) {
    Field x = random_field(g, kind, 11, 3, 1.0, false), y = random_field(g, kind, 12, 3, 1.0, false);
    Field acc = x.zeros_like();
    add_commutator(acc, cplx(0.5, 0.0), x, y);
    double worst = 0.0;
    for (std::size_t p = 0; p < g->points(); ++p) {
      Matrix a = x.matrix_at(p), b = y.matrix_at(p);
      worst = std::max(worst, (acc.matrix_at(p) - 0.5 * (a * b - b * a)).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-14 * max_diff(x, x.zeros_like()) * max_diff(y, y.zeros_like()));
  }
}

TEST_CASE("two-thirds rule removes high modes") {
  auto g = grid_of(16);
  Field u = scalar_from(g, [](const Vec3& x) { return std::cos(6.0 * x[0]) + std::cos(5.0 * x[1]); });
  u.to_spectral();
  u.dealias();
  CHECK(spectral_tail(u, 5) < 1e-15);
  CHECK(std::abs(u.block(0)[g->index_of_mode(0, 5, 0)] - 0.5) < 1e-14);
  CHECK(std::abs(u.block(0)[g->index_of_mode(6, 0, 0)]) == 0.0);
}

TEST_CASE("random fields are band limited and closed") {
  auto g = grid_of(16);
  Field u = random_field(g, AlgebraKind::su(2), 7, 3, 1.0, true);
  CHECK(spectral_tail(u, 3) < 1e-14);
  CHECK(closure_residual(u) < 1e-14);
  Field s = u.spectral();
  for (int e = 0; e < s.entries(); ++e) CHECK(std::abs(s.block(e)[0]) < 1e-15);
}

TEST_CASE("grid mismatch is structural") {
  auto a = grid_of(8), b = grid_of(16);
  Field u = Field::scalar(a), v = Field::scalar(b);
  CHECK_FALSE(u.compatible(v));
  CHECK_THROWS_AS(u += v, StructuralError);
}

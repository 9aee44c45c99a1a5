#include <cmath>

#include "doctest.h"
#include "ymh/data.hpp"
#include "ymh/system.hpp"

using namespace ymh;

namespace {

GridPtr grid_of(int N) {
  GridSpec g;
  g.N = N;
  return Grid::make(g);
}

/// Random state with every component band limited to |k_i| <= 1 so that all
/// products up to quartic order are resolved on N = 16.
GaugeState random_state(const GridPtr& g, const AlgebraKind& kind, std::uint64_t seed, double amp) {
  GaugeState s = GaugeState::zeros(g, kind);
  std::uint64_t k = seed * 1000;
  for (Field* f : s.components()) *f = random_field(g, kind, ++k, 1, amp, false);
  return s;
}

Matrix br(const Matrix& x, const Matrix& y) { return x * y - y * x; }

struct PointData {
  Matrix A[4], dA[4][4], F[4][4], dF[4][4][4], phi, dphi[4];
};

/// Gathers fields and first derivatives at every point; d_0 comes from the
/// stored time derivatives.
class Sampler {
 public:
  explicit Sampler(const GaugeState& s) : s_(s) {
    for (int a = 0; a < 4; ++a) {
      A_[a] = s.A[a].physical();
      dA_[0][a] = s.dtA[a].physical();
      for (int i = 0; i < 3; ++i) dA_[i + 1][a] = apply(s.A[a], Multiplier::derivative(i)).to_physical();
    }
    for (int k = 0; k < 6; ++k) {
      F_[k] = s.F[k].physical();
      dF_[0][k] = s.dtF[k].physical();
      for (int i = 0; i < 3; ++i) dF_[i + 1][k] = apply(s.F[k], Multiplier::derivative(i)).to_physical();
    }
    phi_ = s.phi.physical();
    dphi_[0] = s.dtphi.physical();
    for (int i = 0; i < 3; ++i) dphi_[i + 1] = apply(s.phi, Multiplier::derivative(i)).to_physical();
  }

  PointData at(std::size_t p) const {
    PointData d;
    const int n = s_.phi.matrix_n();
    for (int a = 0; a < 4; ++a) {
      d.A[a] = A_[a].matrix_at(p);
      for (int b = 0; b < 4; ++b) d.dA[a][b] = dA_[a][b].matrix_at(p);
    }
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) {
        if (a == b) {
          d.F[a][b] = Matrix::Zero(n, n);
          for (int c = 0; c < 4; ++c) d.dF[c][a][b] = Matrix::Zero(n, n);
          continue;
        }
        const int k = pair_index(std::min(a, b), std::max(a, b));
        const double sg = a < b ? 1.0 : -1.0;
        d.F[a][b] = sg * F_[k].matrix_at(p);
        for (int c = 0; c < 4; ++c) d.dF[c][a][b] = sg * dF_[c][k].matrix_at(p);
      }
    d.phi = phi_.matrix_at(p);
    for (int a = 0; a < 4; ++a) d.dphi[a] = dphi_[a].matrix_at(p);
    return d;
  }

 private:
  const GaugeState& s_;
  Field A_[4], dA_[4][4], F_[6], dF_[4][6], phi_, dphi_[4];
};

double m_(int a) { return a == 0 ? -1.0 : 1.0; }

Matrix lambda_oracle(const PointData& d, int b) {
  Matrix r = br(d.phi, d.dphi[b]) + br(d.phi, br(d.A[b], d.phi));
  for (int a = 0; a < 4; ++a) r -= m_(a) * (br(d.A[a], d.dA[a][b]) + br(d.A[a], d.F[a][b]));
  return r;
}

/// All fourteen terms written out separately.
Matrix gamma_oracle(const PointData& d, int be, int ga) {
  Matrix r = 2.0 * br(d.dphi[be], d.dphi[ga]);
  for (int a = 0; a < 4; ++a) {
    const double m = m_(a);
    r += -2.0 * m * br(d.A[a], d.dF[a][be][ga]);
    r += 2.0 * m * br(d.dA[ga][a], d.dA[a][be]);
    r += -2.0 * m * br(d.dA[be][a], d.dA[a][ga]);
    r += 2.0 * m * br(d.dA[a][be], d.dA[a][ga]);
    r += 2.0 * m * br(d.dA[be][a], d.dA[ga][a]);
    r += -m * br(d.A[a], br(d.A[a], d.F[be][ga]));
    r += 2.0 * m * br(d.F[a][be], br(d.A[a], d.A[ga]));
    r += -2.0 * m * br(d.F[a][ga], br(d.A[a], d.A[be]));
    r += -2.0 * m * br(br(d.A[a], d.A[be]), br(d.A[a], d.A[ga]));
  }
  r += 2.0 * br(d.dphi[be], br(d.A[ga], d.phi));
  r += -2.0 * br(d.dphi[ga], br(d.A[be], d.phi));
  r += br(d.phi, br(d.F[be][ga], d.phi));
  r += 2.0 * br(br(d.A[be], d.phi), br(d.A[ga], d.phi));
  return r;
}

Matrix phi_oracle(const PointData& d, double p) {
  Matrix r = Matrix::Zero(d.phi.rows(), d.phi.cols());
  for (int a = 0; a < 4; ++a) r -= m_(a) * (2.0 * br(d.A[a], d.dphi[a]) + br(d.A[a], br(d.A[a], d.phi)));
  const double n2 = d.phi.cwiseAbs2().sum();
  if (n2 > 0.0) r += std::pow(n2, 0.5 * (p - 1.0)) * d.phi;
  return r;
}

double rel_l2(const Field& a, const Field& b) {
  return l2_norm(a.physical() - b.physical()) / std::max(l2_norm(b.physical()), 1e-300);
}

}  // namespace

TEST_CASE("pair indexing") {
  for (int k = 0; k < 6; ++k) {
    auto [a, b] = pair_of(k);
    CHECK(a < b);
    CHECK(pair_index(a, b) == k);
  }
  CHECK(pair_of(0) == std::array<int, 2>{0, 1});
  CHECK(pair_of(5) == std::array<int, 2>{2, 3});
  CHECK_THROWS_AS(pair_index(2, 2), StructuralError);
}

TEST_CASE("Higgs exponent range") {
  CHECK_NOTHROW(validate_exponent(3.0));
  CHECK_NOTHROW(validate_exponent(2.0));
  CHECK_NOTHROW(validate_exponent(4.9));
  CHECK_THROWS_AS(validate_exponent(5.0), ConfigError);
  CHECK_THROWS_AS(validate_exponent(1.0), ConfigError);
}

TEST_CASE("zero state has zero nonlinearity") {
  auto g = grid_of(8);
  auto nl = nonlinearity(GaugeState::zeros(g, AlgebraKind::su(2)), 3.0);
  for (const auto& f : nl.Lambda) CHECK(l2_norm(f.physical()) == 0.0);
  for (const auto& f : nl.Gamma) CHECK(l2_norm(f.physical()) == 0.0);
  CHECK(l2_norm(nl.Phi.physical()) == 0.0);
}

TEST_CASE("nonlinearities match a pointwise matrix oracle") {
  auto g = grid_of(16);
  for (auto kind : {AlgebraKind::su(2), AlgebraKind::so(3)}) {
    GaugeState s = random_state(g, kind, 3, 0.3);
    const double p = 3.0;
    auto nl = nonlinearity(s, p);
    Sampler sm(s);
    std::array<Field, 4> L;
    std::array<Field, 6> G;
    Field P = nl.Phi.physical();
    for (int b = 0; b < 4; ++b) L[b] = nl.Lambda[b].physical();
    for (int k = 0; k < 6; ++k) G[k] = nl.Gamma[k].physical();
    double worst = 0.0, scale = 0.0;
    for (std::size_t q = 0; q < g->points(); q += 37) {
      PointData d = sm.at(q);
      for (int b = 0; b < 4; ++b) {
        Matrix want = lambda_oracle(d, b);
        worst = std::max(worst, (L[b].matrix_at(q) - want).cwiseAbs().maxCoeff());
        scale = std::max(scale, want.cwiseAbs().maxCoeff());
      }
      for (int k = 0; k < 6; ++k) {
        auto [be, ga] = pair_of(k);
        Matrix want = gamma_oracle(d, be, ga);
        worst = std::max(worst, (G[k].matrix_at(q) - want).cwiseAbs().maxCoeff());
        scale = std::max(scale, want.cwiseAbs().maxCoeff());
      }
      Matrix want = phi_oracle(d, p);
      worst = std::max(worst, (P.matrix_at(q) - want).cwiseAbs().maxCoeff());
    }
    CAPTURE(kind.name());
    // the potential term |phi|^2 phi is cubic and resolved as well
    CHECK(worst < 1e-12 * scale);
  }
}

TEST_CASE("term masks partition the nonlinearity") {
  auto g = grid_of(16);
  GaugeState s = random_state(g, AlgebraKind::su(2), 5, 0.3);
  auto full = nonlinearity(s, 3.0);
  auto sum = nonlinearity(s, 3.0, TermMask::only(2));
  for (int deg : {0, 3, 4}) {
    auto part = nonlinearity(s, 3.0, TermMask::only(deg));
    for (int b = 0; b < 4; ++b) sum.Lambda[b] += part.Lambda[b];
    for (int k = 0; k < 6; ++k) sum.Gamma[k] += part.Gamma[k];
    sum.Phi += part.Phi;
  }
  for (int b = 0; b < 4; ++b) CHECK(rel_l2(sum.Lambda[b], full.Lambda[b]) < 1e-14);
  for (int k = 0; k < 6; ++k) CHECK(rel_l2(sum.Gamma[k], full.Gamma[k]) < 1e-14);
  CHECK(rel_l2(sum.Phi, full.Phi) < 1e-14);
  CHECK_THROWS_AS(TermMask::only(1), StructuralError);
}

TEST_CASE("abelian theories only keep the Higgs potential") {
  auto g = grid_of(16);
  GaugeState s = random_state(g, AlgebraKind::so(2), 7, 0.3);
  auto nl = nonlinearity(s, 3.0);
  for (const auto& f : nl.Lambda) CHECK(l2_norm(f.physical()) < 1e-14);
  for (const auto& f : nl.Gamma) CHECK(l2_norm(f.physical()) < 1e-14);
  CHECK(l2_norm(nl.Phi.physical()) > 1e-3);
}

TEST_CASE("nonlinearities are equivariant under constant gauge maps") {
  auto g = grid_of(16);
  auto kind = AlgebraKind::su(2);
  GaugeState s = random_state(g, kind, 9, 0.3);
  GaugeMap U = GaugeMap::constant(g, random_element(kind, 4, 1.0));
  CHECK(U.unitarity_defect() < 1e-14);
  GaugeState t = gauge_transform(s, U);
  auto a = nonlinearity(t, 3.0), b = nonlinearity(s, 3.0);
  for (int k = 0; k < 6; ++k) CHECK(rel_l2(a.Gamma[k], conjugate(b.Gamma[k].physical(), U.U)) < 1e-13);
  for (int c = 0; c < 4; ++c) CHECK(rel_l2(a.Lambda[c], conjugate(b.Lambda[c].physical(), U.U)) < 1e-13);
  CHECK(rel_l2(a.Phi, conjugate(b.Phi.physical(), U.U)) < 1e-13);
}

TEST_CASE("identity gauge map leaves the state unchanged") {
  auto g = grid_of(8);
  GaugeState s = random_state(g, AlgebraKind::su(2), 2, 0.3);
  GaugeState t = gauge_transform(s, GaugeMap::identity(g, AlgebraKind::su(2)));
  CHECK(state_distance(s, t) < 1e-15);
}

TEST_CASE("curvature of an abelian plane wave") {
  auto g = grid_of(16);
  GaugeState s = abelian_plane_wave(g, AlgebraKind::so(2), {2, 0, 1}, 2, 0.5, 0.3);
  // A_2 = a cos(th) E with th = 2x + z - w t: F_12 = -2 a sin(th) E, F_23 = a sin(th) E
  const double w = std::sqrt(5.0);
  const Matrix E = orthonormal_basis(AlgebraKind::so(2)).front().matrix();
  Field F12 = s.F[pair_index(1, 2)].physical(), F23 = s.F[pair_index(2, 3)].physical();
  Field F02 = s.F[pair_index(0, 2)].physical();
  double worst = 0.0;
  for (std::size_t q = 0; q < g->points(); q += 11) {
    auto x = g->position(q);
    const double th = 2.0 * x[0] + x[2] - w * 0.3;
    worst = std::max(worst, (F12.matrix_at(q) + 2.0 * 0.5 * std::sin(th) * E).cwiseAbs().maxCoeff());
    worst = std::max(worst, (F23.matrix_at(q) - 0.5 * std::sin(th) * E).cwiseAbs().maxCoeff());
    worst = std::max(worst, (F02.matrix_at(q) - 0.5 * w * std::sin(th) * E).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-13);
}

TEST_CASE("plane wave satisfies the curvature wave equation") {
  auto g = grid_of(16);
  auto kind = AlgebraKind::so(2);
  std::vector<double> hs, res;
  for (double h : {0.1, 0.05, 0.025}) {
    auto prev = abelian_plane_wave(g, kind, {1, 1, 0}, 3, 1.0, 0.5 - h);
    auto mid = abelian_plane_wave(g, kind, {1, 1, 0}, 3, 1.0, 0.5);
    auto next = abelian_plane_wave(g, kind, {1, 1, 0}, 3, 1.0, 0.5 + h);
    auto r = wave_residual_F(prev, mid, next, h);
    double m = 0.0;
    for (double x : r) m = std::max(m, x);
    hs.push_back(h);
    res.push_back(m);
  }
  // second-order stencil
  CHECK(res[0] / res[1] == doctest::Approx(4.0).epsilon(0.02));
  CHECK(res[1] / res[2] == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("split recombines on Lorenz states") {
  auto g = grid_of(16);
  auto d = make_compliant_data(g, AlgebraKind::su(2), 3, 2, 0.05, 3.0);
  auto r = recombination_residual(state_from_data(d), 3.0);
  CHECK(r.max() < 1e-12);
}

TEST_CASE("state arithmetic") {
  auto g = grid_of(8);
  GaugeState a = random_state(g, AlgebraKind::su(2), 1, 1.0);
  GaugeState b = a;
  b *= 2.0;
  b.axpy(-1.0, a);
  CHECK(state_distance(a, b) < 1e-15);
  CHECK(state_norm(a) > 0.0);
  CHECK(GaugeState::component_names().size() == 22);
  CHECK(GaugeState::component_names().front() == "A0");
}

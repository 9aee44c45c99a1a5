#include "ymh/system.hpp"

#include <cmath>
#include <memory>

namespace ymh {

int pair_index(int a, int b) {
  static const int table[4][4] = {{-1, 0, 1, 2}, {-1, -1, 3, 4}, {-1, -1, -1, 5}, {-1, -1, -1, -1}};
  if (a < 0 || a > 3 || b < 0 || b > 3 || a >= b) throw StructuralError("invalid curvature index pair");
  return table[a][b];
}

std::array<int, 2> pair_of(int k) {
  static const int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  if (k < 0 || k > 5) throw StructuralError("invalid curvature component");
  return {pairs[k][0], pairs[k][1]};
}

// ---------------------------------------------------------------- GaugeState

GaugeState GaugeState::zeros(GridPtr grid, const AlgebraKind& kind) {
  GaugeState s;
  const Field z = Field::algebra(grid, kind);
  for (auto& f : s.A) f = z;
  for (auto& f : s.dtA) f = z;
  for (auto& f : s.F) f = z;
  for (auto& f : s.dtF) f = z;
  s.phi = z;
  s.dtphi = z;
  return s;
}

Field GaugeState::F_at(int a, int b) const {
  if (a == b) return F[0].zeros_like();
  if (a < b) return F[pair_index(a, b)];
  return -F[pair_index(b, a)];
}

std::vector<Field*> GaugeState::components() {
  std::vector<Field*> out;
  for (auto& f : A) out.push_back(&f);
  for (auto& f : dtA) out.push_back(&f);
  for (auto& f : F) out.push_back(&f);
  for (auto& f : dtF) out.push_back(&f);
  out.push_back(&phi);
  out.push_back(&dtphi);
  return out;
}

std::vector<const Field*> GaugeState::components() const {
  std::vector<const Field*> out;
  for (Field* f : const_cast<GaugeState*>(this)->components()) out.push_back(f);
  return out;
}

std::vector<std::string> GaugeState::component_names() {
  std::vector<std::string> n;
  for (int a = 0; a < 4; ++a) n.push_back("A" + std::to_string(a));
  for (int a = 0; a < 4; ++a) n.push_back("dtA" + std::to_string(a));
  for (int k = 0; k < 6; ++k) {
    const auto p = pair_of(k);
    n.push_back("F" + std::to_string(p[0]) + std::to_string(p[1]));
  }
  for (int k = 0; k < 6; ++k) {
    const auto p = pair_of(k);
    n.push_back("dtF" + std::to_string(p[0]) + std::to_string(p[1]));
  }
  n.push_back("phi");
  n.push_back("dtphi");
  return n;
}

GaugeState& GaugeState::operator*=(double c) {
  for (Field* f : components()) *f *= c;
  return *this;
}

GaugeState& GaugeState::axpy(double a, const GaugeState& x) {
  auto mine = components();
  auto theirs = x.components();
  for (std::size_t i = 0; i < mine.size(); ++i) mine[i]->axpy(a, *theirs[i]);
  return *this;
}

double state_norm(const GaugeState& s) {
  double sum = 0.0;
  for (const Field* f : s.components()) {
    const double n = sobolev_norm(*f, 0.0);
    sum += n * n;
  }
  return std::sqrt(sum);
}

double state_distance(const GaugeState& a, const GaugeState& b) {
  const auto ca = a.components();
  const auto cb = b.components();
  double diff = 0.0;
  for (std::size_t i = 0; i < ca.size(); ++i) {
    const double n = sobolev_norm(*ca[i] - *cb[i], 0.0);
    diff += n * n;
  }
  const double scale = std::max(state_norm(a), state_norm(b));
  return scale > 0.0 ? std::sqrt(diff) / scale : 0.0;
}

// ---------------------------------------------------------------- helpers

namespace {

Field finish(Field acc) {
  acc.to_spectral();
  acc.dealias();
  return acc;
}

/// Dealiased commutator returned in physical space, for nesting.
Field inner_commutator(const Field& x, const Field& y) {
  Field acc = x.zeros_like();
  add_commutator(acc, 1.0, x, y);
  acc.to_spectral().dealias();
  return std::move(acc.to_physical());
}

struct Work {
  std::array<Field, 4> A;
  std::array<std::array<Field, 4>, 4> dA;  // dA[a][b] = d_a A_b
  std::array<Field, 6> F;
  std::array<std::array<Field, 6>, 4> dF;  // dF[a][k] = d_a F_k
  Field phi;
  std::array<Field, 4> dphi;
  std::array<Field, 6> lin;  // d_a A_b - d_b A_a for a < b
  Field zero;

  const Field& lin_at(int a, int b, double& sign) const {
    if (a == b) {
      sign = 0.0;
      return zero;
    }
    sign = a < b ? 1.0 : -1.0;
    return a < b ? lin[pair_index(a, b)] : lin[pair_index(b, a)];
  }

  // F_ab with sign; `sign` is 0 for a == b
  const Field& F_at(int a, int b, double& sign) const {
    if (a == b) {
      sign = 0.0;
      return zero;
    }
    sign = a < b ? 1.0 : -1.0;
    return a < b ? F[pair_index(a, b)] : F[pair_index(b, a)];
  }
};

Work build_work(const GaugeState& s, bool curvature_gradient) {
  Work w;
  for (int b = 0; b < 4; ++b) {
    w.A[b] = s.A[b].physical();
    w.dA[0][b] = s.dtA[b].physical();
    for (int i = 1; i <= 3; ++i) w.dA[i][b] = apply(s.A[b], Multiplier::derivative(i - 1)).to_physical();
  }
  for (int k = 0; k < 6; ++k) {
    w.F[k] = s.F[k].physical();
    if (curvature_gradient) {
      w.dF[0][k] = s.dtF[k].physical();
      for (int i = 1; i <= 3; ++i) w.dF[i][k] = apply(s.F[k], Multiplier::derivative(i - 1)).to_physical();
    }
  }
  w.phi = s.phi.physical();
  w.dphi[0] = s.dtphi.physical();
  for (int i = 1; i <= 3; ++i) w.dphi[i] = apply(s.phi, Multiplier::derivative(i - 1)).to_physical();
  w.zero = w.phi.zeros_like();
  if (curvature_gradient) {
    for (int k = 0; k < 6; ++k) {
      const auto [a, b] = pair_of(k);
      w.lin[k] = w.dA[a][b] - w.dA[b][a];
    }
  }
  return w;
}

void add_potential(Field& acc, const Field& phi, double p) {
  const std::size_t np = phi.points();
  const int ne = phi.entries();
  for (std::size_t q = 0; q < np; ++q) {
    double r2 = 0.0;
    for (int e = 0; e < ne; ++e) r2 += std::norm(phi.block(e)[q]);
    if (r2 == 0.0) continue;
    const double w = std::pow(r2, 0.5 * (p - 1.0));
    for (int e = 0; e < ne; ++e) acc.block(e)[q] += w * phi.block(e)[q];
  }
}

/// Evaluates the nonlinearities. With `null_terms` false, the quadratic terms
/// that admit a null-form rewriting are skipped, leaving the non-null part.
Nonlinearity evaluate(const GaugeState& s, double p, const TermMask& mask, bool null_terms) {
  validate_exponent(p);
  const Work w = build_work(s, mask.quadratic && null_terms);
  const bool nested = mask.cubic || mask.quartic;

  std::array<std::array<Field, 4>, 4> C;  // [A_a, A_b]
  std::array<Field, 4> Aphi;              // [A_a, phi]
  std::array<std::array<Field, 6>, 4> AF; // [A_a, F_k]
  std::array<Field, 6> Fphi;              // [F_k, phi]
  if (nested) {
    for (int a = 0; a < 4; ++a) {
      C[a][a] = w.zero;
      for (int b = a + 1; b < 4; ++b) {
        C[a][b] = inner_commutator(w.A[a], w.A[b]);
        C[b][a] = -C[a][b];
      }
      Aphi[a] = inner_commutator(w.A[a], w.phi);
    }
    if (mask.cubic) {
      for (int a = 0; a < 4; ++a)
        for (int k = 0; k < 6; ++k) AF[a][k] = inner_commutator(w.A[a], w.F[k]);
      for (int k = 0; k < 6; ++k) Fphi[k] = inner_commutator(w.F[k], w.phi);
    }
  }

  Nonlinearity out;
  double sg = 0.0;

  for (int b = 0; b < 4; ++b) {
    Field acc = w.zero;
    if (mask.quadratic) {
      for (int a = 0; a < 4; ++a) {
        if (null_terms) add_commutator(acc, -metric(a), w.A[a], w.dA[a][b]);
        const Field& Fab = w.F_at(a, b, sg);
        if (sg != 0.0) add_commutator(acc, -metric(a) * sg, w.A[a], Fab);
      }
      add_commutator(acc, 1.0, w.phi, w.dphi[b]);
    }
    if (mask.cubic) add_commutator(acc, 1.0, w.phi, Aphi[b]);
    out.Lambda[b] = finish(std::move(acc));
  }

  for (int k = 0; k < 6; ++k) {
    const auto [be, ga] = pair_of(k);
    Field acc = w.zero;
    if (mask.quadratic && null_terms) {
      for (int a = 0; a < 4; ++a) {
        const double m = metric(a);
        add_commutator(acc, -2.0 * m, w.A[a], w.dF[a][k]);
        // [d_g A_a, d_a A_b] - [d_b A_a, d_a A_g] + [d_a A_b, d_a A_g] + [d_b A_a, d_g A_a]
        // = [d_a A_b - d_b A_a, d_a A_g - d_g A_a]
        double sb = 0.0, sgm = 0.0;
        const Field& Lb = w.lin_at(a, be, sb);
        const Field& Lg = w.lin_at(a, ga, sgm);
        if (sb != 0.0 && sgm != 0.0) add_commutator(acc, 2.0 * m * sb * sgm, Lb, Lg);
      }
      add_commutator(acc, 2.0, w.dphi[be], w.dphi[ga]);
    }
    if (mask.cubic) {
      for (int a = 0; a < 4; ++a) {
        const double m = metric(a);
        add_commutator(acc, -m, w.A[a], AF[a][k]);
        const Field& Fab = w.F_at(a, be, sg);
        if (sg != 0.0) add_commutator(acc, 2.0 * m * sg, Fab, C[a][ga]);
        const Field& Fag = w.F_at(a, ga, sg);
        if (sg != 0.0) add_commutator(acc, -2.0 * m * sg, Fag, C[a][be]);
      }
      add_commutator(acc, 2.0, w.dphi[be], Aphi[ga]);
      add_commutator(acc, -2.0, w.dphi[ga], Aphi[be]);
      add_commutator(acc, 1.0, w.phi, Fphi[k]);
    }
    if (mask.quartic) {
      for (int a = 0; a < 4; ++a) add_commutator(acc, -2.0 * metric(a), C[a][be], C[a][ga]);
      add_commutator(acc, 2.0, Aphi[be], Aphi[ga]);
    }
    out.Gamma[k] = finish(std::move(acc));
  }

  {
    Field acc = w.zero;
    for (int a = 0; a < 4; ++a) {
      if (mask.quadratic && null_terms) add_commutator(acc, -2.0 * metric(a), w.A[a], w.dphi[a]);
      if (mask.cubic) add_commutator(acc, -metric(a), w.A[a], Aphi[a]);
    }
    if (mask.potential) add_potential(acc, w.phi, p);
    out.Phi = finish(std::move(acc));
  }
  return out;
}

SpacetimeField pair_field(const Field& u, const Field& dt) { return {u, dt}; }

Potential potential_of(const GaugeState& s) {
  Potential P;
  for (int a = 0; a < 4; ++a) P[a] = pair_field(s.A[a], s.dtA[a]);
  return P;
}

Potential derivative_of(const Potential& P, int axis) {
  Potential out;
  for (int a = 0; a < 4; ++a) out[a] = P[a].apply(Multiplier::derivative(axis));
  return out;
}

double relative_sum(const std::vector<Field>& a, const std::vector<Field>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = sobolev_norm(a[i] - b[i], 0.0);
    const double x = sobolev_norm(a[i], 0.0);
    const double y = sobolev_norm(b[i], 0.0);
    diff += d * d;
    na += x * x;
    nb += y * y;
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale > 0.0 ? std::sqrt(diff) / scale : 0.0;
}

}  // namespace

void validate_exponent(double p) {
  if (!(p >= 2.0 && p < 5.0)) {
    throw ConfigError("Higgs exponent p must satisfy 2 <= p < 5 (energy-subcritical range)");
  }
}

TermMask TermMask::only(int degree) {
  TermMask m{false, false, false, false};
  switch (degree) {
    case 0: m.potential = true; break;
    case 2: m.quadratic = true; break;
    case 3: m.cubic = true; break;
    case 4: m.quartic = true; break;
    default: throw StructuralError("term degree must be 0 (potential), 2, 3 or 4");
  }
  return m;
}

std::array<Field, 6> curvature_from_potential(const std::array<Field, 4>& A,
                                              const std::array<Field, 4>& dtA) {
  std::array<Field, 6> F;
  std::array<Field, 4> Ap;
  for (int a = 0; a < 4; ++a) Ap[a] = A[a].physical();
  auto d = [&](int a, int b) {
    return a == 0 ? dtA[b].spectral() : apply(A[b], Multiplier::derivative(a - 1));
  };
  for (int k = 0; k < 6; ++k) {
    const auto [a, b] = pair_of(k);
    Field f = d(a, b);
    f -= d(b, a);
    f += commutator(Ap[a], Ap[b]);
    F[k] = std::move(f);
  }
  return F;
}

Field covariant_derivative(const Field& A_alpha, const SpacetimeField& X, int alpha) {
  if (alpha < 0 || alpha > 3) throw StructuralError("spacetime index out of range");
  Field out = alpha == 0 ? X.dt.spectral() : apply(X.u, Multiplier::derivative(alpha - 1));
  out += commutator(A_alpha, X.u);
  return out;
}

Nonlinearity nonlinearity(const GaugeState& s, double p, const TermMask& mask) {
  return evaluate(s, p, mask, true);
}

std::array<Field, 4> Lambda(const GaugeState& s, const TermMask& mask) {
  return evaluate(s, 3.0, mask, true).Lambda;
}

std::array<Field, 6> Gamma(const GaugeState& s, const TermMask& mask) {
  return evaluate(s, 3.0, mask, true).Gamma;
}

Field Phi(const GaugeState& s, double p, const TermMask& mask) { return evaluate(s, p, mask, true).Phi; }

Split nonlinearity_split(const GaugeState& s, double p) {
  Split out;
  out.rest = evaluate(s, p, {}, false);

  const Potential P = potential_of(s);
  const RieszGradients U(inv_abs_grad(P));
  std::array<std::unique_ptr<RieszGradients>, 3> dU;
  for (int i = 0; i < 3; ++i) dU[i] = std::make_unique<RieszGradients>(inv_abs_grad(derivative_of(P, i)));
  std::array<std::array<Field, 4>, 4> dA;
  for (int a = 0; a < 4; ++a) dA[a] = gradient(P[a]);
  const auto dphi = gradient(pair_field(s.phi, s.dtphi));
  const Field zero = s.phi.zeros_like().physical();
  auto done = [](Field acc) {
    acc.to_spectral();
    acc.dealias();
    return acc;
  };

  for (int b = 0; b < 4; ++b) {
    Field acc = zero;
    add_frakQ(acc, -1.0, U, dA[b]);
    out.null.Lambda[b] = done(std::move(acc));
  }

  for (int k = 0; k < 6; ++k) {
    const auto [be, ga] = pair_of(k);
    const auto dF = gradient(pair_field(s.F[k], s.dtF[k]));
    Field g = zero;
    add_frakQ(g, -2.0, U, dF);
    if (be > 0) {
      const int i = be, j = ga;
      add_frakQ(g, 2.0, *dU[j - 1], dA[i]);
      add_frakQ(g, -2.0, *dU[i - 1], dA[j]);
      add_Q0_bracket(g, 2.0, dA[i], dA[j]);
      for (int a = 0; a < 4; ++a) add_Qab_bracket(g, metric(a), dA[a], dA[a], i, j);
      add_Qab_bracket(g, 1.0, dphi, dphi, i, j);
    } else {
      const int i = ga;
      add_frakQ(g, 2.0, *dU[i - 1], dA[0]);
      for (int j = 1; j <= 3; ++j) add_Qab_bracket(g, -2.0, dA[j], dA[i], 0, j);
      add_Q0_bracket(g, 2.0, dA[0], dA[i]);
      for (int a = 0; a < 4; ++a) add_Qab_bracket(g, metric(a), dA[a], dA[a], 0, i);
      add_Qab_bracket(g, 1.0, dphi, dphi, 0, i);
    }
    out.null.Gamma[k] = done(std::move(g));
  }

  Field acc = zero;
  add_frakQ(acc, -2.0, U, dphi);
  out.null.Phi = done(std::move(acc));
  return out;
}

RecombinationReport recombination_residual(const GaugeState& s, double p) {
  const Nonlinearity full = nonlinearity(s, p);
  const Split sp = nonlinearity_split(s, p);
  RecombinationReport r;
  std::vector<Field> a, b;
  for (int i = 0; i < 4; ++i) {
    a.push_back(sp.null.Lambda[i] + sp.rest.Lambda[i]);
    b.push_back(full.Lambda[i]);
  }
  r.lambda = relative_sum(a, b);
  a.clear();
  b.clear();
  for (int k = 0; k < 6; ++k) {
    a.push_back(sp.null.Gamma[k] + sp.rest.Gamma[k]);
    b.push_back(full.Gamma[k]);
  }
  r.gamma = relative_sum(a, b);
  r.phi = relative_sum({sp.null.Phi + sp.rest.Phi}, {full.Phi});
  return r;
}

std::array<double, 6> wave_residual_F(const GaugeState& prev, const GaugeState& mid,
                                      const GaugeState& next, double h) {
  if (!(h > 0.0)) throw StructuralError("time spacing must be positive");
  const auto G = Gamma(mid);
  std::array<double, 6> out{};
  const Multiplier lap_parts[3] = {Multiplier::derivative(0), Multiplier::derivative(1),
                                   Multiplier::derivative(2)};
  for (int k = 0; k < 6; ++k) {
    Field box = next.F[k].spectral();
    box -= 2.0 * mid.F[k].spectral();
    box += prev.F[k].spectral();
    box *= -1.0 / (h * h);
    for (const auto& d : lap_parts) box += apply(apply(mid.F[k], d), d);
    box -= G[k];
    out[k] = sobolev_norm(box, 0.0);
  }
  return out;
}

// ---------------------------------------------------------------- gauge maps

GaugeMap GaugeMap::identity(GridPtr grid, const AlgebraKind& kind) {
  GaugeMap g;
  g.U = Field::algebra(grid, kind);
  for (int i = 0; i < kind.n; ++i) {
    cplx* b = g.U.block(i * kind.n + i);
    for (std::size_t p = 0; p < g.U.points(); ++p) b[p] = 1.0;
  }
  g.dtU = g.U.zeros_like();
  g.ddtU = g.U.zeros_like();
  return g;
}

GaugeMap GaugeMap::constant(GridPtr grid, const AlgebraElement& X) {
  GaugeMap g = identity(grid, X.kind());
  const Matrix U = expm(X.matrix());
  for (std::size_t p = 0; p < g.U.points(); ++p) g.U.set_matrix(p, U);
  return g;
}

GaugeMap GaugeMap::exponential(const Field& Xin, const Field& Yin) {
  if (!Xin.compatible(Yin)) throw StructuralError("gauge generators do not match");
  const Field X = Xin.physical();
  const Field Y = Yin.physical();
  const int n = X.matrix_n();
  GaugeMap g;
  g.U = X.zeros_like();
  g.dtU = X.zeros_like();
  g.ddtU = X.zeros_like();
  Matrix B2 = Matrix::Zero(2 * n, 2 * n);
  Matrix B3 = Matrix::Zero(3 * n, 3 * n);
  for (std::size_t p = 0; p < X.points(); ++p) {
    const Matrix x = X.matrix_at(p);
    const Matrix y = Y.matrix_at(p);
    // d/dt exp(x + t y) is the upper-right block of exp([[x, y], [0, x]]);
    // the corner block of the 3x3 analogue is half the second derivative
    B2.block(0, 0, n, n) = x;
    B2.block(n, n, n, n) = x;
    B2.block(0, n, n, n) = y;
    for (int r = 0; r < 3; ++r) B3.block(r * n, r * n, n, n) = x;
    B3.block(0, n, n, n) = y;
    B3.block(n, 2 * n, n, n) = y;
    const Matrix E2 = expm(B2);
    const Matrix E3 = expm(B3);
    g.U.set_matrix(p, E2.block(0, 0, n, n));
    g.dtU.set_matrix(p, E2.block(0, n, n, n));
    g.ddtU.set_matrix(p, 2.0 * E3.block(0, 2 * n, n, n));
  }
  return g;
}

double GaugeMap::unitarity_defect() const {
  const Field u = U.physical();
  double worst = 0.0;
  for (std::size_t p = 0; p < u.points(); ++p) {
    const Matrix m = u.matrix_at(p);
    worst = std::max(worst, (m * m.adjoint() - Matrix::Identity(m.rows(), m.cols())).norm());
  }
  return worst;
}

Field conjugate(const Field& Xin, const Field& Uin) {
  const Field X = Xin.physical();
  const Field U = Uin.physical();
  Field out = X.zeros_like();
  for (std::size_t p = 0; p < X.points(); ++p) {
    const Matrix u = U.matrix_at(p);
    out.set_matrix(p, u * X.matrix_at(p) * u.adjoint());
  }
  return out;
}

GaugeState gauge_transform(const GaugeState& s, const GaugeMap& g) {
  const Field U = g.U.physical();
  const Field Ut = g.dtU.physical();
  const Field Utt = g.ddtU.physical();
  std::array<Field, 4> dU, dUt;  // d_a U and d_t d_a U
  dU[0] = Ut;
  dUt[0] = Utt;
  for (int i = 1; i <= 3; ++i) {
    dU[i] = apply(U, Multiplier::derivative(i - 1)).to_physical();
    dUt[i] = apply(Ut, Multiplier::derivative(i - 1)).to_physical();
  }
  GaugeState in = s;
  for (Field* f : in.components()) f->to_physical();
  GaugeState out = GaugeState::zeros(s.grid(), s.kind());

  for (std::size_t p = 0; p < U.points(); ++p) {
    const Matrix u = U.matrix_at(p);
    const Matrix ui = u.adjoint();
    const Matrix ut = Ut.matrix_at(p);
    const Matrix uit = -ui * ut * ui;  // d_t U^{-1}
    auto conj = [&](const Field& X, const Field& Xt, Field& Y, Field& Yt) {
      const Matrix x = X.matrix_at(p);
      const Matrix xt = Xt.matrix_at(p);
      Y.set_matrix(p, u * x * ui);
      Yt.set_matrix(p, ut * x * ui + u * xt * ui + u * x * uit);
    };
    for (int a = 0; a < 4; ++a) {
      conj(in.A[a], in.dtA[a], out.A[a], out.dtA[a]);
      const Matrix da = dU[a].matrix_at(p);
      const Matrix dat = dUt[a].matrix_at(p);
      out.A[a].set_matrix(p, out.A[a].matrix_at(p) - da * ui);
      out.dtA[a].set_matrix(p, out.dtA[a].matrix_at(p) - dat * ui - da * uit);
    }
    for (int k = 0; k < 6; ++k) conj(in.F[k], in.dtF[k], out.F[k], out.dtF[k]);
    conj(in.phi, in.dtphi, out.phi, out.dtphi);
  }
  return out;
}

}  // namespace ymh

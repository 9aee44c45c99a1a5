#include "ymh/nullform.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <random>

namespace ymh {

SpacetimeField SpacetimeField::zeros(GridPtr grid, const std::optional<AlgebraKind>& kind) {
  SpacetimeField s;
  s.u = kind ? Field::algebra(grid, *kind) : Field::scalar(grid);
  s.dt = s.u.zeros_like();
  return s;
}

SpacetimeField SpacetimeField::apply(const Multiplier& m) const {
  return {ymh::apply(u, m), ymh::apply(dt, m)};
}

std::array<Field, 4> gradient(const SpacetimeField& u) {
  if (!u.u.compatible(u.dt)) throw StructuralError("field and time derivative do not match");
  std::array<Field, 4> d;
  d[0] = u.dt.physical();
  for (int i = 0; i < 3; ++i) d[i + 1] = apply(u.u, Multiplier::derivative(i)).to_physical();
  return d;
}

namespace {

Field product_accumulator(const Field& x, const Field& y, ProductOp op) {
  switch (op) {
    case ProductOp::Scalar:
      return x.is_scalar() ? y.zeros_like().physical() : x.zeros_like().physical();
    case ProductOp::Inner:
      return Field::scalar(x.grid());
    default:
      return x.zeros_like().physical();
  }
}

Field finish(Field acc) {
  acc.to_spectral();
  acc.dealias();
  return acc;
}

void require_pair(int alpha, int beta) {
  if (alpha < 0 || alpha > 3 || beta < 0 || beta > 3) throw StructuralError("spacetime index out of range");
  if (alpha == beta) throw StructuralError("null form Q_ab needs distinct indices");
}

void require_grid(const SpacetimeField& u, const SpacetimeField& v) {
  if (!(u.u.grid()->spec() == v.u.grid()->spec())) throw StructuralError("grid mismatch in null form");
}

double relative(const Field& a, const Field& b) {
  const double na = sobolev_norm(a, 0.0);
  const double nb = sobolev_norm(b, 0.0);
  const double scale = std::max(na, nb);
  if (scale == 0.0) return 0.0;
  return sobolev_norm(a - b, 0.0) / scale;
}


}  // namespace

Field Q0(const SpacetimeField& u, const SpacetimeField& v, ProductOp op) {
  require_grid(u, v);
  const auto du = gradient(u);
  const auto dv = gradient(v);
  Field acc = product_accumulator(du[0], dv[0], op);
  for (int a = 0; a < 4; ++a) add_product(acc, metric(a), du[a], dv[a], op);
  return finish(std::move(acc));
}

Field Qab(const SpacetimeField& u, const SpacetimeField& v, int alpha, int beta, ProductOp op) {
  require_pair(alpha, beta);
  require_grid(u, v);
  const auto du = gradient(u);
  const auto dv = gradient(v);
  Field acc = product_accumulator(du[0], dv[0], op);
  add_product(acc, 1.0, du[alpha], dv[beta], op);
  add_product(acc, -1.0, du[beta], dv[alpha], op);
  return finish(std::move(acc));
}

Field Q0_bracket(const SpacetimeField& u, const SpacetimeField& v) {
  return Q0(u, v, ProductOp::Commutator);
}

Field Qab_bracket(const SpacetimeField& u, const SpacetimeField& v, int alpha, int beta) {
  return Qab(u, v, alpha, beta, ProductOp::Commutator);
}

void add_Qab_bracket(Field& acc, cplx coeff, const std::array<Field, 4>& du,
                     const std::array<Field, 4>& dv, int alpha, int beta) {
  require_pair(alpha, beta);
  add_commutator(acc, coeff, du[alpha], dv[beta]);
  add_commutator(acc, -coeff, du[beta], dv[alpha]);
}

RieszGradients::RieszGradients(const Potential& u) {
  for (int l = 1; l <= 3; ++l)
    for (int m = 0; m < 4; ++m) {
      if (m == l) continue;
      require_grid(u[m], u[0]);
      g[l - 1][m] = gradient(u[m].apply(Multiplier::riesz(l - 1)));
    }
}

void add_Q0_bracket(Field& acc, cplx coeff, const std::array<Field, 4>& du,
                    const std::array<Field, 4>& dv) {
  for (int a = 0; a < 4; ++a) add_commutator(acc, coeff * metric(a), du[a], dv[a]);
}

void add_frakQ(Field& acc, cplx coeff, const RieszGradients& u, const std::array<Field, 4>& dv) {
  // -1/2 eps^{ijk} eps_{klm} Q_ij[R^l u^m, v] = -Q_ij[R^i u^j, v] summed over i != j
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j)
      if (i != j) add_Qab_bracket(acc, -coeff, u.g[i - 1][j], dv, i, j);
  for (int i = 1; i <= 3; ++i) add_Qab_bracket(acc, -coeff, u.g[i - 1][0], dv, 0, i);
}

Field frakQ(const Potential& u, const SpacetimeField& v) {
  for (const auto& c : u) require_grid(c, v);
  const auto dv = gradient(v);
  Field acc = dv[0].zeros_like();
  add_frakQ(acc, 1.0, RieszGradients(u), dv);
  return finish(std::move(acc));
}

Potential inv_abs_grad(const Potential& a) {
  Potential out;
  for (int i = 0; i < 4; ++i) out[i] = a[i].apply(Multiplier::inv_abs_grad());
  return out;
}

Lemma1Report verify_lemma1(const Potential& A, const SpacetimeField& psi) {
  const auto dpsi = gradient(psi);
  Field lhs1 = dpsi[0].zeros_like();
  Field lhs2 = dpsi[0].zeros_like();
  for (int a = 0; a < 4; ++a) {
    add_commutator(lhs1, metric(a), A[a].u.physical(), dpsi[a]);
    add_commutator(lhs2, metric(a), A[a].dt.physical(), dpsi[a]);
  }
  lhs1 = finish(std::move(lhs1));
  lhs2 = finish(std::move(lhs2));
  const Field rhs1 = frakQ(inv_abs_grad(A), psi);
  Field rhs2 = dpsi[0].zeros_like();
  for (int i = 1; i <= 3; ++i) add_Qab_bracket(rhs2, 1.0, gradient(A[i]), dpsi, 0, i);
  rhs2 = finish(std::move(rhs2));
  return {relative(lhs1, rhs1), relative(lhs2, rhs2)};
}

double nullform_trick_residual(const SpacetimeField& u, int alpha, int beta) {
  require_pair(alpha, beta);
  const auto du = gradient(u);
  Field lhs = du[0].zeros_like();
  add_commutator(lhs, 1.0, du[alpha], du[beta]);
  lhs = finish(std::move(lhs));
  Field rhs = Qab_bracket(u, u, alpha, beta);
  rhs *= 0.5;
  return relative(lhs, rhs);
}

// ---------------------------------------------------------------- symbols

BilinearSymbol BilinearSymbol::named(const std::string& name) {
  BilinearSymbol s;
  s.name_ = name;
  const auto one = Multiplier::identity();
  const auto jap = Multiplier::bessel(1.0);
  const cplx I(0.0, 1.0);
  auto digit = [&](char c) {
    if (c < '1' || c > '3') throw StructuralError("unregistered bilinear symbol '" + name + "'");
    return c - '1';
  };
  if (name == "one") {
    s.terms_ = {{1.0, one, one}};
  } else if (name == "q0") {
    // <xi><eta> - sum xi_i eta_i, and -xi_i eta_i = (i xi_i)(i eta_i)
    s.terms_ = {{1.0, jap, jap}};
    for (int i = 0; i < 3; ++i) s.terms_.push_back({1.0, Multiplier::derivative(i), Multiplier::derivative(i)});
  } else if (name.size() == 3 && name[0] == 'q' && name[1] == '0') {
    const int i = digit(name[2]);
    s.i_ = i;
    // -<xi> eta_i + xi_i <eta>, with eta_i = -i (i eta_i)
    s.terms_ = {{I, jap, Multiplier::derivative(i)}, {-I, Multiplier::derivative(i), jap}};
  } else if (name.size() == 3 && name[0] == 'q') {
    const int i = digit(name[1]);
    const int j = digit(name[2]);
    if (i == j) throw StructuralError("q_ij needs distinct indices");
    s.i_ = i;
    s.j_ = j;
    // -xi_i eta_j + xi_j eta_i, with xi_i eta_j = -(i xi_i)(i eta_j)
    s.terms_ = {{1.0, Multiplier::derivative(i), Multiplier::derivative(j)},
                {-1.0, Multiplier::derivative(j), Multiplier::derivative(i)}};
  } else {
    throw StructuralError("unregistered bilinear symbol '" + name + "'");
  }
  return s;
}

std::vector<std::string> BilinearSymbol::registered() {
  return {"one", "q0", "q01", "q02", "q03", "q12", "q13", "q23", "q21", "q31", "q32"};
}

BilinearSymbol BilinearSymbol::with_signs(int s1, int s2) const {
  if ((s1 != 1 && s1 != -1) || (s2 != 1 && s2 != -1)) throw StructuralError("signs must be +1 or -1");
  BilinearSymbol out = *this;
  out.s1_ = s1_ * s1;
  out.s2_ = s2_ * s2;
  for (auto& t : out.terms_) {
    if (s1 < 0) t.a = t.a.reflected();
    if (s2 < 0) t.b = t.b.reflected();
  }
  return out;
}

cplx BilinearSymbol::operator()(const Vec3& xi, const Vec3& eta) const {
  cplx sum = 0.0;
  for (const auto& t : terms_) sum += t.coeff * t.a.symbol(xi) * t.b.symbol(eta);
  return sum;
}

cplx BilinearSymbol::closed_form(const Vec3& xi_in, const Vec3& eta_in) const {
  Vec3 xi, eta;
  for (int k = 0; k < 3; ++k) {
    xi[k] = s1_ * xi_in[k];
    eta[k] = s2_ * eta_in[k];
  }
  const double nx = std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  const double ne = std::sqrt(1.0 + eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2]);
  if (name_ == "one") return 1.0;
  if (name_ == "q0") return nx * ne - (xi[0] * eta[0] + xi[1] * eta[1] + xi[2] * eta[2]);
  if (name_[1] == '0') return -nx * eta[i_] + xi[i_] * ne;
  return -xi[i_] * eta[j_] + xi[j_] * eta[i_];
}

Field B_sigma(const BilinearSymbol& sigma, const Field& u, const Field& v, ProductOp op) {
  if (!(u.grid()->spec() == v.grid()->spec())) throw StructuralError("grid mismatch in B_sigma");
  Field acc;
  for (const auto& t : sigma.terms()) {
    const Field ua = apply(u, t.a).to_physical();
    const Field vb = apply(v, t.b).to_physical();
    if (acc.empty()) acc = product_accumulator(ua, vb, op);
    add_product(acc, t.coeff, ua, vb, op);
  }
  return finish(std::move(acc));
}

// ---------------------------------------------------------------- bounds

double angle(const Vec3& a, const Vec3& b) {
  const Vec3 c = {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  const double cross = std::sqrt(c[0] * c[0] + c[1] * c[1] + c[2] * c[2]);
  return std::atan2(cross, a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
}

namespace {

double norm3(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }
double jap(double r) { return std::sqrt(1.0 + r * r); }

struct Sampler {
  explicit Sampler(std::uint64_t seed) : rng(seed) {}
  std::mt19937_64 rng;
  std::uniform_real_distribution<double> expo{-3.0, 3.0};
  std::bernoulli_distribution coin{0.5};

  double log_uniform() { return std::pow(10.0, expo(rng)); }
  double signed_log_uniform() { return coin(rng) ? log_uniform() : -log_uniform(); }
  Vec3 vec() { return {signed_log_uniform(), signed_log_uniform(), signed_log_uniform()}; }
};

void record(BoundReport& r, double ratio, const Vec3& xi, const Vec3& eta, double tau = 0.0,
            double lambda = 0.0) {
  if (ratio > r.max_ratio || !std::isfinite(ratio)) {
    r.max_ratio = ratio;
    r.argmax_xi = xi;
    r.argmax_eta = eta;
    r.argmax_tau = tau;
    r.argmax_lambda = lambda;
  }
}

double ratio_of(double lhs, double rhs) {
  if (lhs == 0.0) return 0.0;
  return lhs / rhs;
}

}  // namespace

std::vector<BoundReport> check_symbol_bounds(std::size_t samples, std::uint64_t seed) {
  if (samples < 1) throw ConfigError("symbol bound check needs at least one sample");
  std::vector<BoundReport> out(4);
  out[0].id = "q0";
  out[1].id = "q0j";
  out[2].id = "qij";
  out[3].id = "q0-maxmin";
  for (auto& r : out) r.samples = samples;
  Sampler s(seed);
  for (std::size_t n = 0; n < samples; ++n) {
    const Vec3 xi = s.vec();
    const Vec3 eta = s.vec();
    const double a = norm3(xi), b = norm3(eta);
    const double ja = jap(a), jb = jap(b);
    const double th = angle(xi, eta);
    // q0 = (<xi><eta> - |xi||eta|) + |xi||eta|(1 - cos theta), both parts
    // evaluated without cancellation
    const double half = std::sin(0.5 * th);
    const double q0 = (1.0 + a * a + b * b) / (ja * jb + a * b) + 2.0 * a * b * half * half;
    record(out[0], ratio_of(std::abs(q0), a * b * th * th + 1.0 / std::min(ja, jb)), xi, eta);
    record(out[3], ratio_of(std::abs(q0), a * b * th * th + std::max(ja, jb) / std::min(ja, jb)), xi, eta);
    double q0j = 0.0;
    for (int j = 0; j < 3; ++j) q0j = std::max(q0j, std::abs(-ja * eta[j] + xi[j] * jb));
    record(out[1], ratio_of(q0j, a * b * th + a / jb + b / ja), xi, eta);
    double qij = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) qij = std::max(qij, std::abs(-xi[i] * eta[j] + xi[j] * eta[i]));
    record(out[2], ratio_of(qij, a * b * th), xi, eta);
  }
  return out;
}

std::vector<BoundReport> check_angle_estimate(std::size_t samples, std::uint64_t seed, double alpha,
                                              double beta, double gamma) {
  for (double e : {alpha, beta, gamma})
    if (e < 0.0 || e > 0.5) throw ConfigError("angle estimate exponents must lie in [0, 1/2]");
  std::vector<BoundReport> out;
  const int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
  char buf[96];
  for (const auto& sg : signs) {
    BoundReport r;
    std::snprintf(buf, sizeof buf, "angle(%c,%c;%g,%g,%g)", sg[0] > 0 ? '+' : '-', sg[1] > 0 ? '+' : '-',
                  alpha, beta, gamma);
    r.id = buf;
    r.samples = samples;
    Sampler s(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t n = 0; n < samples; ++n) {
      const Vec3 xi = s.vec();
      const Vec3 eta = s.vec();
      const double a = norm3(xi), b = norm3(eta);
      double tau, lambda;
      if (unit(s.rng) < 0.5) {
        // near the cones, where the modulations are small
        tau = sg[0] * a + s.signed_log_uniform();
        lambda = sg[1] * b + s.signed_log_uniform();
      } else {
        tau = s.signed_log_uniform();
        lambda = s.signed_log_uniform();
      }
      const Vec3 sum = {xi[0] + eta[0], xi[1] + eta[1], xi[2] + eta[2]};
      const double mn = std::min(jap(a), jap(b));
      const double rhs = std::pow(jap(std::abs(tau + lambda) - norm3(sum)) / mn, alpha) +
                         std::pow(jap(-tau + sg[0] * a) / mn, beta) +
                         std::pow(jap(-lambda + sg[1] * b) / mn, gamma);
      const Vec3 sxi = {sg[0] * xi[0], sg[0] * xi[1], sg[0] * xi[2]};
      const Vec3 seta = {sg[1] * eta[0], sg[1] * eta[1], sg[1] * eta[2]};
      record(r, ratio_of(angle(sxi, seta), rhs), xi, eta, tau, lambda);
    }
    out.push_back(r);
  }
  return out;
}

std::string bound_csv_header() {
  return "id,samples,max_ratio,xi1,xi2,xi3,eta1,eta2,eta3,tau,lambda";
}

std::string bound_csv_row(const BoundReport& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g", r.id.c_str(),
                r.samples, r.max_ratio, r.argmax_xi[0], r.argmax_xi[1], r.argmax_xi[2], r.argmax_eta[0],
                r.argmax_eta[1], r.argmax_eta[2], r.argmax_tau, r.argmax_lambda);
  return buf;
}

}  // namespace ymh

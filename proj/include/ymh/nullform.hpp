#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ymh/grid.hpp"

namespace ymh {

/// A field together with its time derivative.
struct SpacetimeField {
  Field u;
  Field dt;

  static SpacetimeField zeros(GridPtr grid, const std::optional<AlgebraKind>& kind);
  bool compatible(const SpacetimeField& o) const { return u.compatible(o.u) && dt.compatible(o.dt); }
  SpacetimeField apply(const Multiplier& m) const;
};

/// Four-potential (u_0, u_1, u_2, u_3), each with its time derivative.
using Potential = std::array<SpacetimeField, 4>;

/// Physical-space derivatives d_alpha u for alpha = 0..3 (d_0 = stored dt).
std::array<Field, 4> gradient(const SpacetimeField& u);

/// Minkowski metric diag(-1, 1, 1, 1).
inline double metric(int alpha) { return alpha == 0 ? -1.0 : 1.0; }

/// Ordinary null forms with product `op` (Scalar for scalar fields, Matrix
/// for matrix-valued ones). Dealiased spectral results.
Field Q0(const SpacetimeField& u, const SpacetimeField& v, ProductOp op);
Field Qab(const SpacetimeField& u, const SpacetimeField& v, int alpha, int beta, ProductOp op);

/// Commutator null forms Q_0[u,v] = [d_a u, d^a v] and
/// Q_ab[u,v] = [d_a u, d_b v] - [d_b u, d_a v].
Field Q0_bracket(const SpacetimeField& u, const SpacetimeField& v);
Field Qab_bracket(const SpacetimeField& u, const SpacetimeField& v, int alpha, int beta);

/// Accumulates coeff * Q_ab[u, v] into a physical accumulator given the
/// physical gradients of u and v. Hot-path variant used by the system module.
void add_Qab_bracket(Field& acc, cplx coeff, const std::array<Field, 4>& du,
                     const std::array<Field, 4>& dv, int alpha, int beta);

/// frakQ[u,v] = -1/2 eps^{ijk} eps_{klm} Q_ij[R^l u^m, v] - Q_0i[R^i u_0, v].
Field frakQ(const Potential& u, const SpacetimeField& v);

/// Physical gradients of R^l u_m, computed once for repeated frakQ calls.
struct RieszGradients {
  /// g[l - 1][m] for l = 1..3, m = 0..3; g[l - 1][l] is unused.
  std::array<std::array<std::array<Field, 4>, 4>, 3> g;
  explicit RieszGradients(const Potential& u);
};

/// Accumulates coeff * frakQ[u, v] given the physical gradient of v.
void add_frakQ(Field& acc, cplx coeff, const RieszGradients& u, const std::array<Field, 4>& dv);

/// Accumulates coeff * Q_0[u, v] given both physical gradients.
void add_Q0_bracket(Field& acc, cplx coeff, const std::array<Field, 4>& du,
                    const std::array<Field, 4>& dv);

/// |grad|^{-1} applied to every component and time derivative.
Potential inv_abs_grad(const Potential& a);

struct Lemma1Report {
  double potential_residual = 0.0;   ///< [A^a, d_a psi] vs frakQ[|grad|^{-1} A, psi]
  double derivative_residual = 0.0;  ///< [d_t A^a, d_a psi] vs Q_0i[A^i, psi]
};

/// Relative L2 residuals of both identities (0 when both sides vanish).
Lemma1Report verify_lemma1(const Potential& A, const SpacetimeField& psi);

/// Relative L2 residual of [d_a u, d_b u] = 1/2 Q_ab[u,u].
double nullform_trick_residual(const SpacetimeField& u, int alpha, int beta);

/// Spatial bilinear symbol sigma(xi, eta) = sum_m c_m a_m(xi) b_m(eta).
class BilinearSymbol {
 public:
  struct Term {
    cplx coeff;
    Multiplier a;
    Multiplier b;
  };

  /// Registered names: "one", "q0", "q0i" (i = 1..3), "qij" (i != j in 1..3).
  static BilinearSymbol named(const std::string& name);
  static std::vector<std::string> registered();

  const std::string& name() const { return name_; }
  const std::vector<Term>& terms() const { return terms_; }

  /// sigma(s1 xi, s2 eta) for a sign pair s1, s2 in {+1, -1}.
  BilinearSymbol with_signs(int s1, int s2) const;
  int sign_u() const { return s1_; }
  int sign_v() const { return s2_; }

  /// Tensor-product evaluation.
  cplx operator()(const Vec3& xi, const Vec3& eta) const;
  /// Independent closed form (q0 = <xi><eta> - xi.eta, etc.).
  cplx closed_form(const Vec3& xi, const Vec3& eta) const;

 private:
  std::string name_;
  std::vector<Term> terms_;
  int s1_ = 1;
  int s2_ = 1;
  int i_ = 0;
  int j_ = 0;
};

/// B_sigma(u, v) = sum_m c_m (a_m u)(b_m v), dealiased, spectral result.
Field B_sigma(const BilinearSymbol& sigma, const Field& u, const Field& v,
              ProductOp op = ProductOp::Scalar);

double angle(const Vec3& xi, const Vec3& eta);

struct BoundReport {
  std::string id;
  std::size_t samples = 0;
  double max_ratio = 0.0;
  Vec3 argmax_xi{};
  Vec3 argmax_eta{};
  double argmax_tau = 0.0;
  double argmax_lambda = 0.0;
};

/// Symbol bounds over log-uniform xi, eta in [1e-3, 1e3]^3 with random signs.
/// Reports "q0", "q0j", "qij" as stated and "q0-maxmin" with the second term
/// replaced by max(<xi>,<eta>)/min(<xi>,<eta>).
std::vector<BoundReport> check_symbol_bounds(std::size_t samples, std::uint64_t seed);

/// Angle estimate for one exponent triple over all four sign pairs.
std::vector<BoundReport> check_angle_estimate(std::size_t samples, std::uint64_t seed, double alpha,
                                              double beta, double gamma);

std::string bound_csv_header();
std::string bound_csv_row(const BoundReport& r);

}  // namespace ymh

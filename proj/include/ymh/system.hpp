#pragma once

#include <array>
#include <functional>
#include <vector>

#include "ymh/nullform.hpp"

namespace ymh {

/// Index of the stored pair (a, b), a < b, in the order 01 02 03 12 13 23.
int pair_index(int a, int b);
/// The ordered pair stored at index k.
std::array<int, 2> pair_of(int k);

/// (A, F, phi) with time derivatives. F is stored for a < b only.
struct GaugeState {
  std::array<Field, 4> A;
  std::array<Field, 4> dtA;
  std::array<Field, 6> F;
  std::array<Field, 6> dtF;
  Field phi;
  Field dtphi;

  static GaugeState zeros(GridPtr grid, const AlgebraKind& kind);

  const GridPtr& grid() const { return phi.grid(); }
  const AlgebraKind& kind() const { return phi.kind(); }

  /// F_ab for any a != b (antisymmetric accessor); zero field for a == b.
  Field F_at(int a, int b) const;

  /// Every component in manifest order: A0..A3, dtA0..dtA3, F01..F23,
  /// dtF01..dtF23, phi, dtphi.
  std::vector<Field*> components();
  std::vector<const Field*> components() const;
  static std::vector<std::string> component_names();

  GaugeState& operator*=(double c);
  GaugeState& axpy(double a, const GaugeState& x);
};

/// Relative L2 distance summed over all components (0 if both vanish).
double state_distance(const GaugeState& a, const GaugeState& b);
double state_norm(const GaugeState& s);

/// F_ab = d_a A_b - d_b A_a + [A_a, A_b] with d_0 taken from dtA.
std::array<Field, 6> curvature_from_potential(const std::array<Field, 4>& A,
                                              const std::array<Field, 4>& dtA);

/// D_a X = d_a X + [A_a, X], spectral result.
Field covariant_derivative(const Field& A_alpha, const SpacetimeField& X, int alpha);

/// Which polynomial degrees to include when evaluating the nonlinearities.
struct TermMask {
  bool quadratic = true;
  bool cubic = true;
  bool quartic = true;
  bool potential = true;  ///< the |phi|^{p-1} phi term

  static TermMask only(int degree);
};

void validate_exponent(double p);

struct Nonlinearity {
  std::array<Field, 4> Lambda;
  std::array<Field, 6> Gamma;
  Field Phi;
};

/// Lambda, Gamma and Phi from one shared workspace; dealiased spectral.
Nonlinearity nonlinearity(const GaugeState& s, double p, const TermMask& mask = {});
std::array<Field, 4> Lambda(const GaugeState& s, const TermMask& mask = {});
std::array<Field, 6> Gamma(const GaugeState& s, const TermMask& mask = {});
Field Phi(const GaugeState& s, double p, const TermMask& mask = {});

struct Split {
  Nonlinearity null;    ///< Lambda1, Gamma1, Phi1
  Nonlinearity rest;    ///< Lambda2, Gamma2, Phi2
};

/// Null-form and non-null parts. The null parts rely on the Lorenz gauge and
/// on mean-zero potentials.
Split nonlinearity_split(const GaugeState& s, double p);

struct RecombinationReport {
  double lambda = 0.0;
  double gamma = 0.0;
  double phi = 0.0;
  double max() const { return std::max(lambda, std::max(gamma, phi)); }
};

/// Relative residuals of split sums against the unsplit evaluation.
RecombinationReport recombination_residual(const GaugeState& s, double p);

/// L2 norms of box F_bc - Gamma_bc at the middle of three slices spaced h
/// apart (second-order difference in time, spectral Laplacian).
std::array<double, 6> wave_residual_F(const GaugeState& prev, const GaugeState& mid,
                                      const GaugeState& next, double h);

/// Group-valued map U(t, x) = exp(X(x) + t Y(x)) near t = 0. The fields hold
/// n x n group matrices, not algebra elements.
struct GaugeMap {
  Field U;
  Field dtU;
  Field ddtU;

  static GaugeMap identity(GridPtr grid, const AlgebraKind& kind);
  static GaugeMap constant(GridPtr grid, const AlgebraElement& X);
  /// X and Y are physical algebra fields.
  static GaugeMap exponential(const Field& X, const Field& Y);

  /// max |U U^* - I| over the grid.
  double unitarity_defect() const;
};

/// A' = U A U^{-1} - (dU) U^{-1}, phi' = U phi U^{-1}, F' = U F U^{-1},
/// with consistent time derivatives at t = 0.
GaugeState gauge_transform(const GaugeState& s, const GaugeMap& g);

/// Pointwise conjugation U X U^{-1} of a physical field.
Field conjugate(const Field& X, const Field& U);

}  // namespace ymh

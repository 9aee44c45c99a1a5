#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "ymh/system.hpp"

namespace ymh {

/// Initial data (a, a_dot, phi0, phi1) at t = 0.
struct CauchyData {
  std::array<Field, 4> a;
  std::array<Field, 4> dota;
  Field phi0;
  Field phi1;
  double p = 3.0;

  static CauchyData zeros(GridPtr grid, const AlgebraKind& kind, double p = 3.0);
  const GridPtr& grid() const { return phi0.grid(); }
  const AlgebraKind& kind() const { return phi0.kind(); }
  CauchyData& operator*=(double c);
};

struct FData {
  std::array<Field, 6> f;
  std::array<Field, 6> dotf;
};

/// Curvature data: f_ij, f_0i from the potential and its time derivative,
/// f_dot_ij by differentiating in time, f_dot_0i from the field equation.
FData build_F_data(const CauchyData& d);

/// L2 norm of d^i f_i0 + [a^i, f_i0] - [phi0, phi1] - [phi0, [a0, phi0]].
double gauss_residual(const CauchyData& d, const FData& f);

/// L2 norm of a_dot_0 - d^i a_i.
double lorenz_data_residual(const CauchyData& d);

/// Sets a_dot_0 = d^i a_i; spatial components are untouched.
CauchyData finalize_lorenz(const CauchyData& d);

/// |a|_{H^1} + |a_dot|_{L^2} + |phi0|_{H^1} + |phi1|_{L^2}; vector norms are
/// the root sum of squares over components.
double data_norm(const CauchyData& d);

struct FBoundReport {
  double f_printed = 0.0;    ///< |f| / ((1+|a|_{H^1})^2 |a_dot|)
  double f_corrected = 0.0;  ///< |f| / ((1+|a|_{H^1})^2 (|a|_{H^1} + |a_dot|))
  double fdot = 0.0;         ///< |f_dot|_{H^{-1}} / ((1+|a|_{H^1})^3 (|a_dot| + |phi0|_{H^1}^2))
};

/// Ratios with 0/0 reported as 0.
FBoundReport check_f_bounds(const CauchyData& d, const FData& f);

/// Random band-limited mean-zero potential with d_t A_0 = d^i A_i exactly.
Potential make_lorenz_potential(GridPtr grid, const AlgebraKind& kind, std::uint64_t seed, int band,
                                double amplitude);

/// Random data satisfying both constraints with mean-zero a: a_dot_i = d_i a0 - [a0, a_i]
/// (so f_0i = 0) and phi1 = lambda phi0 - [a0, phi0], then finalized.
CauchyData make_compliant_data(GridPtr grid, const AlgebraKind& kind, std::uint64_t seed, int band,
                               double amplitude, double p, double lambda = 0.5);

/// Unconstrained random data (finalized for the Lorenz condition only).
CauchyData make_random_data(GridPtr grid, const AlgebraKind& kind, std::uint64_t seed, int band,
                            double amplitude, double p);

/// GaugeState at t = 0 with F from build_F_data.
GaugeState state_from_data(const CauchyData& d);

/// Exact transverse plane wave of an abelian theory at time t:
/// A_axis = amplitude cos(k.x - |k| t) E with A_0 = 0 and phi = 0, where E is
/// the unit basis element. Needs kind abelian, k != 0 and k[axis] = 0.
GaugeState abelian_plane_wave(GridPtr grid, const AlgebraKind& kind, const std::array<int, 3>& k,
                              int axis, double amplitude, double t);

void save_data(const std::string& path, const CauchyData& d, std::uint64_t config_hash);

}  // namespace ymh

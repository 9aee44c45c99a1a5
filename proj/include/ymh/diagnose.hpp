#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ymh/evolve.hpp"

namespace ymh {

/// E = int 1/2 sum_{a<b} |F_ab|^2 + 1/2 sum_a |D_a phi|^2 + |phi|^{p+1}/(p+1),
/// with the evolved F.
double energy(const GaugeState& s, double p);

/// |-d_t A_0 + d^i A_i|_{L^2}.
double lorenz_residual(const GaugeState& s);

/// (sum_k |F_k - F^{(A)}_k|^2_{L^2})^{1/2}.
double compatibility_residual(const GaugeState& s);

/// L2 norm of the beta = 0 field equation evaluated on the state.
double gauss_residual(const GaugeState& s);

struct DiagnosticSeries {
  std::vector<double> times;
  std::vector<double> energy;
  std::vector<double> lorenz_residual;
  std::vector<double> compat_residual;
  std::vector<double> gauss_residual;

  void record(const GaugeState& s, double t, double p);
  /// max_t |E(t) - E(0)| / E(0); 0 when E(0) = 0.
  double drift() const;
  std::string csv(std::uint64_t config_hash) const;
};

/// Evolves `g0` and `U g0 U^{-1}` and returns the largest relative L2
/// deviation of U s(t) U^{-1} from the transformed run.
double gauge_covariance_test(const GaugeState& g0, const AlgebraElement& X, const Stepper& stepper,
                             const EvolveConfig& cfg);

/// Least-squares slope of log(err) against log(h).
double fit_order(const std::vector<double>& h, const std::vector<double>& err);

}  // namespace ymh

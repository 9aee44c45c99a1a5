#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ymh/grid.hpp"

namespace ymh {

enum class Window { None, Hann };

/// Scalar space-time samples u(t_m, x_p), t_m = m T_window / M, stored
/// time-major (index m * N^3 + p).
struct SpacetimeSample {
  GridSpec grid;
  int M = 8;
  double T_window = 1.0;
  std::vector<cplx> values;
  Window window = Window::None;

  static SpacetimeSample zeros(const GridSpec& grid, int M, double T_window,
                               Window window = Window::None);
  std::size_t points() const { return grid.points(); }
  cplx& at(int m, std::size_t p) { return values[static_cast<std::size_t>(m) * points() + p]; }
  cplx at(int m, std::size_t p) const { return values[static_cast<std::size_t>(m) * points() + p]; }
  double time(int m) const { return T_window * m / M; }
  void validate() const;
};

enum class Sign { Plus, Minus, Wave };

/// Weight <xi>^s <modulation>^b, optionally times |xi| (for |grad| u norms).
struct NormSpec {
  double s = 0.0;
  double b = 0.0;
  Sign sign = Sign::Wave;
  bool abs_grad = false;

  double weight(double tau, const Vec3& xi) const;
};

/// Space-time coefficients c(j, k), u = sum c e^{i(tau_j t + k.x)}, after the
/// optional window. Same layout as the sample.
std::vector<cplx> spacetime_coefficients(const SpacetimeSample& u);

/// (T L^3 sum |w c|^2)^{1/2} over the (tau, xi) lattice, tau_j = 2 pi j / T.
double xsb_norm(const SpacetimeSample& u, const NormSpec& spec);

struct HxhReport {
  double s = 0.0;
  double b = 0.0;
  double norm_wave = 0.0;
  double norm_plus = 0.0;
  double norm_minus = 0.0;
  /// Largest pointwise excess of the weight that should be smaller.
  double max_weight_violation = 0.0;
  /// Excess at the level of norms, for both signs.
  double norm_violation = 0.0;
};

HxhReport hxh_check(const SpacetimeSample& u, double s, double b);

/// One hypothesis with its verdict; `equality` marks a non-strict condition met
/// with equality.
struct Condition {
  std::string text;
  bool holds = false;
  bool equality = false;
};

struct Admissibility {
  std::vector<Condition> conditions;
  bool admissible = false;
  std::string summary() const;
};

/// Product theorem hypotheses on (s0, s1, s2, b0, b1, b2).
Admissibility atlas_admissible(double s0, double s1, double s2, double b0, double b1, double b2);
/// Null form theorem hypotheses on (sigma0, sigma1, sigma2, beta0, beta1, beta2).
Admissibility nullform_admissible(double sigma0, double sigma1, double sigma2, double beta0,
                                  double beta1, double beta2);

/// One factor of a probed product: u in H^{s,b} (or X^{s,b}_sign for null
/// forms). `abs_grad` puts |grad| on the factor inside its norm; `bessel`
/// applies <grad> to the factor inside the product.
struct FactorSpec {
  double s = 0.0;
  double b = 0.0;
  bool abs_grad = false;
  bool bessel = false;
};

enum class EstimateForm { Product, NullForm };

/// A registered estimate ||lhs||_{H^{s_out,b_out}} <~ prod ||factor||.
struct EstimateDef {
  std::string id;
  std::string text;
  EstimateForm form = EstimateForm::Product;
  double s_out = 0.0;
  double b_out = 0.0;
  std::vector<FactorSpec> factors;
  /// Product steps as (s0, s1, s2, b0, b1, b2); all must be admissible.
  std::vector<std::array<double, 6>> atlas_steps;
  /// Null form tuple (sigma0, sigma1, sigma2, beta0, beta1, beta2).
  std::array<double, 6> nullform_tuple{};

  Admissibility admissibility() const;
  std::string tuple_string() const;
};

/// The registered estimates at s = 1 - eps, b = 1/2 + 2 eps.
std::vector<EstimateDef> estimate_catalog(double eps);
const EstimateDef& find_estimate(const std::vector<EstimateDef>& catalog, const std::string& id);

struct ProbeResult {
  std::string id;
  std::string tuple;
  bool admissible = false;
  int batch = 0;
  double max_ratio = 0.0;
  int N = 0;
  int M = 0;
  std::uint64_t seed = 0;
};

/// Max ratio over `batch` random band-limited windowed samples on the
/// (N, M) lattice with L = 2 pi and T_window = 2 pi. Null forms take the max
/// over the four sign pairs.
ProbeResult run_estimate_probe(const EstimateDef& def, int N, int M, int batch,
                               std::uint64_t seed);

/// ||uv||_{H^{-s0,-b0}} against ||u||_{H^{s1,b1}} ||v||_{H^{s2,b2}}.
ProbeResult product_estimate_probe(double s0, double s1, double s2, double b0, double b1,
                                   double b2, int N, int M, int batch, std::uint64_t seed);

/// ||B_theta(u,v)||_{H^{-sigma0,-beta0}} against X^{sigma1,beta1}_{s1} and
/// X^{sigma2,beta2}_{s2} norms for the sign pair (s1, s2).
ProbeResult nullform_estimate_probe(double sigma0, double sigma1, double sigma2, double beta0,
                                    double beta1, double beta2, std::array<int, 2> signs, int N,
                                    int M, int batch, std::uint64_t seed);

/// Band-limited coefficient box for the probes: |j| <= jband in time,
/// |k_i| <= kband in space, stored densely.
struct SpectralBox {
  int jband = 0;
  int kband = 0;
  std::vector<cplx> c;

  int jw() const { return 2 * jband + 1; }
  int kw() const { return 2 * kband + 1; }
  std::size_t index(int j, int k1, int k2, int k3) const;
};

/// Exact products of the boxed functions on a zero-padded lattice. Returns
/// coefficients of the product as a box.
SpectralBox box_product(const std::vector<const SpectralBox*>& factors);
/// B_theta(u, v) with theta = angle(s1 (xi - eta), s2 eta) by direct double sum.
SpectralBox box_nullform(const SpectralBox& u, const SpectralBox& v, int s1, int s2);
double box_norm(const SpectralBox& u, const NormSpec& spec, double T_window);

struct LinearProbeRow {
  double T = 0.0;
  double max_ratio = 0.0;
  double max_ratio_no_power = 0.0;
};

/// Exact Duhamel solution of (i d_t + <grad>) u = G, u(0) = u0, restricted to
/// [-T, T] by a Hann window; reports lhs / (||u0||_{H^s} + T^eps ||G||).
std::vector<LinearProbeRow> linear_estimate_probe(int N, int M, const std::vector<double>& Ts,
                                                  double eps, int batch, std::uint64_t seed);

struct LinearParts {
  double lhs = 0.0;      ///< ||u||_{X^{s,b}_+} on the windowed slab
  double data = 0.0;     ///< ||u0||_{H^s}
  double forcing = 0.0;  ///< ||G||_{X^{s,b-1+eps}_+} on the windowed slab
  double ratio(double T, double eps) const;
};

/// Same with caller supplied data: u0 coefficients on the grid and forcing
/// coefficients g(j, k) over the window [-T, T) (box layout).
LinearParts linear_estimate_parts(const GridSpec& grid, int M, double T, double eps,
                                  const std::vector<cplx>& u0_coeffs, const SpectralBox& g);

std::string probe_csv_header();
std::string probe_csv_row(const ProbeResult& r);

}  // namespace ymh

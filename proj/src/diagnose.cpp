#include "ymh/diagnose.hpp"

#include <cmath>
#include <cstdio>

namespace ymh {

namespace {

double squared_integral(const Field& u) {
  const Field ph = u.physical();
  double sum = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) sum += std::norm(ph.data()[i]);
  return sum * u.grid()->volume() / static_cast<double>(u.points());
}

Field d_(const Field& u, int i) { return apply(u, Multiplier::derivative(i - 1)); }

}  // namespace

double energy(const GaugeState& s, double p) {
  validate_exponent(p);
  double e = 0.0;
  for (const auto& f : s.F) e += 0.5 * squared_integral(f);
  const SpacetimeField phi{s.phi, s.dtphi};
  for (int a = 0; a < 4; ++a) e += 0.5 * squared_integral(covariant_derivative(s.A[a], phi, a));
  const Field ph = s.phi.physical();
  double pot = 0.0;
  for (std::size_t q = 0; q < ph.points(); ++q) {
    double r2 = 0.0;
    for (int k = 0; k < ph.entries(); ++k) r2 += std::norm(ph.block(k)[q]);
    pot += std::pow(r2, 0.5 * (p + 1.0));
  }
  e += pot / (p + 1.0) * ph.grid()->volume() / static_cast<double>(ph.points());
  return e;
}

double lorenz_residual(const GaugeState& s) {
  Field r = -s.dtA[0].spectral();
  for (int i = 1; i <= 3; ++i) r += d_(s.A[i], i);
  return sobolev_norm(r, 0.0);
}

double compatibility_residual(const GaugeState& s) {
  const auto FA = curvature_from_potential(s.A, s.dtA);
  double sum = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double n = sobolev_norm(s.F[k] - FA[k], 0.0);
    sum += n * n;
  }
  return std::sqrt(sum);
}

double gauss_residual(const GaugeState& s) {
  Field r = s.phi.zeros_like().spectral();
  for (int i = 1; i <= 3; ++i) {
    const Field fi0 = -s.F[pair_index(0, i)];
    r += d_(fi0, i);
    r += commutator(s.A[i], fi0);
  }
  r -= commutator(s.phi, s.dtphi);
  r -= commutator(s.phi, commutator(s.A[0], s.phi));
  return sobolev_norm(r, 0.0);
}

void DiagnosticSeries::record(const GaugeState& s, double t, double p) {
  if (!times.empty() && !(t > times.back())) throw StructuralError("diagnostic times must increase");
  times.push_back(t);
  energy.push_back(ymh::energy(s, p));
  lorenz_residual.push_back(ymh::lorenz_residual(s));
  compat_residual.push_back(compatibility_residual(s));
  gauss_residual.push_back(ymh::gauss_residual(s));
}

double DiagnosticSeries::drift() const {
  if (energy.empty() || energy.front() == 0.0) return 0.0;
  double worst = 0.0;
  for (double e : energy) worst = std::max(worst, std::abs(e - energy.front()));
  return worst / energy.front();
}

std::string DiagnosticSeries::csv(std::uint64_t config_hash) const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "# config_hash %016llx\n", static_cast<unsigned long long>(config_hash));
  std::string out = buf;
  out += "time,energy,lorenz_residual,compat_residual,gauss_residual\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", times[i], energy[i], lorenz_residual[i],
                  compat_residual[i], gauss_residual[i]);
    out += buf;
  }
  return out;
}

double gauge_covariance_test(const GaugeState& g0, const AlgebraElement& X, const Stepper& stepper,
                             const EvolveConfig& cfg) {
  const GaugeMap U = GaugeMap::constant(g0.grid(), X);
  HalfWaveState a = to_half_wave(g0);
  HalfWaveState b = to_half_wave(gauge_transform(g0, U));
  auto deviation = [&]() {
    GaugeState s = from_half_wave(a);
    for (Field* f : s.components()) *f = conjugate(*f, U.U);
    return state_distance(s, from_half_wave(b));
  };
  double worst = deviation();
  const int n = cfg.steps();
  const double h = cfg.step_size();
  for (int i = 0; i < n; ++i) {
    a = stepper.step(a, h, cfg.integrator);
    b = stepper.step(b, h, cfg.integrator);
    if (!a.finite() || !b.finite()) throw NanAbort(i * h);
    worst = std::max(worst, deviation());
  }
  return worst;
}

double fit_order(const std::vector<double>& h, const std::vector<double>& err) {
  if (h.size() != err.size() || h.size() < 2) throw StructuralError("order fit needs matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace ymh

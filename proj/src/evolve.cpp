#include "ymh/evolve.hpp"

#include <cmath>
#include <string>

namespace ymh {

HalfWaveState HalfWaveState::zeros_like() const {
  HalfWaveState z;
  for (int c = 0; c < kComponents; ++c) {
    z.plus[c] = plus[c].zeros_like();
    z.minus[c] = minus[c].zeros_like();
  }
  z.time = time;
  return z;
}

HalfWaveState& HalfWaveState::axpy(cplx a, const HalfWaveState& x) {
  for (int c = 0; c < kComponents; ++c) {
    plus[c].axpy(a, x.plus[c]);
    minus[c].axpy(a, x.minus[c]);
  }
  return *this;
}

HalfWaveState& HalfWaveState::operator*=(cplx c) {
  for (int k = 0; k < kComponents; ++k) {
    plus[k] *= c;
    minus[k] *= c;
  }
  return *this;
}

double HalfWaveState::norm(double s) const {
  double sum = 0.0;
  for (int c = 0; c < kComponents; ++c) {
    const double a = sobolev_norm(plus[c], s);
    const double b = sobolev_norm(minus[c], s);
    sum += a * a + b * b;
  }
  return std::sqrt(sum);
}

bool HalfWaveState::finite() const {
  for (int c = 0; c < kComponents; ++c)
    for (const Field* f : {&plus[c], &minus[c]})
      for (std::size_t i = 0; i < f->size(); ++i)
        if (!std::isfinite(f->data()[i].real()) || !std::isfinite(f->data()[i].imag())) return false;
  return true;
}

double halfwave_distance(const HalfWaveState& a, const HalfWaveState& b, double s) {
  HalfWaveState d = a;
  d.axpy(-1.0, b);
  return d.norm(s);
}

namespace {

const Field& source(const GaugeState& g, int c, bool derivative) {
  if (c < 4) return derivative ? g.dtA[c] : g.A[c];
  if (c < 10) return derivative ? g.dtF[c - 4] : g.F[c - 4];
  return derivative ? g.dtphi : g.phi;
}

Field& target(GaugeState& g, int c, bool derivative) {
  return const_cast<Field&>(source(g, c, derivative));
}

}  // namespace

HalfWaveState to_half_wave(const GaugeState& g, double time) {
  HalfWaveState h;
  h.time = time;
  const Multiplier inv = Multiplier::bessel(-1.0);
  for (int c = 0; c < HalfWaveState::kComponents; ++c) {
    const Field u = source(g, c, false).spectral();
    const Field w = apply(source(g, c, true), inv);
    // (1/(i<grad>)) d_t u = -i <grad>^{-1} d_t u
    h.plus[c] = 0.5 * u;
    h.plus[c].axpy(cplx(0.0, -0.5), w);
    h.minus[c] = 0.5 * u;
    h.minus[c].axpy(cplx(0.0, 0.5), w);
  }
  return h;
}

GaugeState from_half_wave(const HalfWaveState& h) {
  GaugeState g;
  const Multiplier jap = Multiplier::bessel(1.0);
  for (int c = 0; c < HalfWaveState::kComponents; ++c) {
    target(g, c, false) = h.plus[c] + h.minus[c];
    Field d = apply(h.plus[c] - h.minus[c], jap);
    d *= cplx(0.0, 1.0);
    target(g, c, true) = std::move(d);
  }
  return g;
}

void EvolveConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("evolve.dt must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("evolve.T must be positive");
  if (dt > T * (1.0 + 1e-12)) throw ConfigError("evolve.dt must not exceed evolve.T");
  if (picard_depth < 0) throw ConfigError("evolve.picard_depth must be nonnegative");
}

int EvolveConfig::steps() const {
  validate();
  return static_cast<int>(std::ceil(T / dt - 1e-9));
}

double EvolveConfig::step_size() const { return T / steps(); }

NanAbort::NanAbort(double last_valid_time)
    : std::runtime_error("non-finite values after t = " + std::to_string(last_valid_time)),
      last_(last_valid_time) {}

Stepper::Stepper(GridPtr grid, double p, Dynamics mode) : grid_(std::move(grid)), p_(p), mode_(mode) {
  validate_exponent(p);
  jap_.resize(grid_->points());
  for (std::size_t q = 0; q < jap_.size(); ++q) {
    const Vec3 xi = grid_->xi(q);
    jap_[q] = std::sqrt(1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
  }
}

HalfWaveState Stepper::forcing(const HalfWaveState& u) const {
  HalfWaveState out = u.zeros_like();
  if (mode_ == Dynamics::Free) return out;
  const GaugeState g = from_half_wave(u);
  Nonlinearity nl;
  if (mode_ == Dynamics::Full) nl = nonlinearity(g, p_);
  const std::size_t np = grid_->points();
  for (int c = 0; c < HalfWaveState::kComponents; ++c) {
    Field n = -source(g, c, false).spectral();
    if (mode_ == Dynamics::Full) {
      if (c < 4) n += nl.Lambda[c];
      else if (c < 10) n += nl.Gamma[c - 4];
      else n += nl.Phi;
    }
    for (int e = 0; e < n.entries(); ++e) {
      cplx* b = n.block(e);
      for (std::size_t q = 0; q < np; ++q) b[q] *= cplx(0.0, 0.5 / jap_[q]);
    }
    out.plus[c] = n;
    out.minus[c] = -n;
  }
  return out;
}

void Stepper::propagate(HalfWaveState& u, double t) const {
  if (t == 0.0) return;
  const std::size_t np = grid_->points();
  std::vector<cplx> ph(np);
  for (std::size_t q = 0; q < np; ++q) ph[q] = std::polar(1.0, t * jap_[q]);
  for (int c = 0; c < HalfWaveState::kComponents; ++c) {
    u.plus[c].to_spectral();
    u.minus[c].to_spectral();
    for (int e = 0; e < u.plus[c].entries(); ++e) {
      cplx* bp = u.plus[c].block(e);
      cplx* bm = u.minus[c].block(e);
      for (std::size_t q = 0; q < np; ++q) {
        bp[q] *= ph[q];
        bm[q] *= std::conj(ph[q]);
      }
    }
  }
}

HalfWaveState Stepper::rhs(const HalfWaveState& u) const {
  HalfWaveState out = forcing(u);
  const std::size_t np = grid_->points();
  for (int c = 0; c < HalfWaveState::kComponents; ++c) {
    const Field up = u.plus[c].spectral();
    const Field um = u.minus[c].spectral();
    for (int e = 0; e < up.entries(); ++e) {
      for (std::size_t q = 0; q < np; ++q) {
        out.plus[c].block(e)[q] += cplx(0.0, jap_[q]) * up.block(e)[q];
        out.minus[c].block(e)[q] -= cplx(0.0, jap_[q]) * um.block(e)[q];
      }
    }
  }
  return out;
}

HalfWaveState Stepper::step(const HalfWaveState& u, double h, Integrator integrator) const {
  if (h == 0.0) return u;
  if (integrator == Integrator::ExpEuler) {
    HalfWaveState v = u;
    v.axpy(h, forcing(u));
    propagate(v, h);
    v.time = u.time + h;
    return v;
  }
  // Lawson RK4 in the variables rotated by the free flow
  const HalfWaveState k1 = forcing(u);
  HalfWaveState a = u;
  a.axpy(0.5 * h, k1);
  propagate(a, 0.5 * h);
  const HalfWaveState k2 = forcing(a);

  HalfWaveState half_u = u;
  propagate(half_u, 0.5 * h);
  HalfWaveState b = half_u;
  b.axpy(0.5 * h, k2);
  const HalfWaveState k3 = forcing(b);

  HalfWaveState c = half_u;
  propagate(c, 0.5 * h);
  HalfWaveState k3r = k3;
  propagate(k3r, 0.5 * h);
  c.axpy(h, k3r);
  const HalfWaveState k4 = forcing(c);

  HalfWaveState mid = k2;
  mid.axpy(1.0, k3);
  propagate(mid, 0.5 * h);
  HalfWaveState k1r = k1;
  propagate(k1r, h);
  HalfWaveState out = half_u;
  propagate(out, 0.5 * h);
  out.axpy(h / 6.0, k1r);
  out.axpy(h / 3.0, mid);
  out.axpy(h / 6.0, k4);
  out.time = u.time + h;
  return out;
}

HalfWaveState evolve(const HalfWaveState& h0, const Stepper& stepper, const EvolveConfig& cfg,
                     const std::function<void(const HalfWaveState&)>& observer) {
  const int n = cfg.steps();
  const double h = cfg.step_size();
  HalfWaveState u = h0;
  if (observer) observer(u);
  for (int i = 0; i < n; ++i) {
    HalfWaveState next = stepper.step(u, h, cfg.integrator);
    next.time = h0.time + (i + 1) * h;
    if (!next.finite()) throw NanAbort(u.time);
    u = std::move(next);
    if (observer) observer(u);
  }
  return u;
}

namespace {

/// Cumulative integrals I_n = int_0^{t_n} g on a uniform grid: composite
/// Simpson for even n, Simpson plus a closing 3/8 panel for odd n >= 3, and a
/// four-point rule on the first interval.
std::vector<HalfWaveState> cumulative_integral(const std::vector<HalfWaveState>& g, double h) {
  const std::size_t n = g.size();
  std::vector<HalfWaveState> I(n);
  I[0] = g[0].zeros_like();
  if (n < 4) throw ConfigError("Picard iteration needs at least three time steps");
  {
    HalfWaveState v = g[0].zeros_like();
    v.axpy(9.0 * h / 24.0, g[0]);
    v.axpy(19.0 * h / 24.0, g[1]);
    v.axpy(-5.0 * h / 24.0, g[2]);
    v.axpy(h / 24.0, g[3]);
    I[1] = std::move(v);
  }
  for (std::size_t m = 2; m < n; m += 2) {
    HalfWaveState v = I[m - 2];
    v.axpy(h / 3.0, g[m - 2]);
    v.axpy(4.0 * h / 3.0, g[m - 1]);
    v.axpy(h / 3.0, g[m]);
    I[m] = std::move(v);
  }
  for (std::size_t m = 3; m < n; m += 2) {
    HalfWaveState v = I[m - 3];
    v.axpy(3.0 * h / 8.0, g[m - 3]);
    v.axpy(9.0 * h / 8.0, g[m - 2]);
    v.axpy(9.0 * h / 8.0, g[m - 1]);
    v.axpy(3.0 * h / 8.0, g[m]);
    I[m] = std::move(v);
  }
  return I;
}

}  // namespace

PicardResult picard_iterate(const HalfWaveState& h0, const Stepper& stepper, const EvolveConfig& cfg,
                            int depth, double s_norm) {
  if (depth < 1) throw ConfigError("Picard depth must be at least 1");
  const int n = cfg.steps();
  const double h = cfg.step_size();
  PicardResult res;
  for (int i = 0; i <= n; ++i) res.times.push_back(h0.time + i * h);

  std::vector<HalfWaveState> cur(n + 1);
  for (int i = 0; i <= n; ++i) {
    cur[i] = h0;
    stepper.propagate(cur[i], i * h);
    cur[i].time = res.times[i];
  }
  int growth = 0;
  for (int k = 1; k < depth; ++k) {
    std::vector<HalfWaveState> g(n + 1);
    for (int i = 0; i <= n; ++i) {
      g[i] = stepper.forcing(cur[i]);
      stepper.propagate(g[i], -i * h);
    }
    const auto I = cumulative_integral(g, h);
    g.clear();
    std::vector<HalfWaveState> next(n + 1);
    double dist = 0.0;
    for (int i = 0; i <= n; ++i) {
      HalfWaveState v = h0;
      v.axpy(1.0, I[i]);
      stepper.propagate(v, i * h);
      v.time = res.times[i];
      if (!v.finite()) throw NanAbort(i == 0 ? h0.time : res.times[i - 1]);
      dist = std::max(dist, halfwave_distance(v, cur[i], s_norm));
      next[i] = std::move(v);
    }
    if (!res.distances.empty() && dist > res.distances.back()) {
      if (++growth >= 3) res.diverged = true;
    } else {
      growth = 0;
    }
    res.distances.push_back(dist);
    cur = std::move(next);
  }
  res.last = std::move(cur);
  return res;
}

}  // namespace ymh

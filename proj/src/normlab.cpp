#include "ymh/normlab.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

namespace ymh {

namespace {

double jap(double x) { return std::sqrt(1.0 + x * x); }

int signed_index(int i, int n) { return i < n / 2 ? i : i - n; }

int wrap(int k, int n) { return ((k % n) + n) % n; }

/// Smallest 2,3,5-smooth integer >= n.
int smooth_size(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

struct Plan4 {
  fftw_plan fwd = nullptr;
  fftw_plan inv = nullptr;
};

/// In-place 4D transforms of size M x N^3 on fftw-allocated buffers.
class Fft4 {
 public:
  static Fft4& instance() {
    static Fft4 f;
    return f;
  }
  void run(cplx* data, int M, int N, bool forward) {
    const Plan4& p = plan(M, N);
    auto* d = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(forward ? p.fwd : p.inv, d, d);
  }

 private:
  const Plan4& plan(int M, int N) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(M, N);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t size = static_cast<std::size_t>(M) * N * N * N;
    fftw_complex* tmp = fftw_alloc_complex(size);
    int dims[4] = {M, N, N, N};
    Plan4 p;
    p.fwd = fftw_plan_dft(4, dims, tmp, tmp, FFTW_FORWARD, FFTW_ESTIMATE);
    p.inv = fftw_plan_dft(4, dims, tmp, tmp, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(tmp);
    return plans_.emplace(key, p).first->second;
  }
  std::mutex mutex_;
  std::map<std::pair<int, int>, Plan4> plans_;
};

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : n(n), p(reinterpret_cast<cplx*>(fftw_alloc_complex(n))) {
    std::fill(p, p + n, cplx(0.0));
  }
  ~FftwBuffer() { fftw_free(p); }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
  std::size_t n;
  cplx* p;
};

double hann(int m, int M) { return 0.5 * (1.0 - std::cos(2.0 * kPi * m / M)); }

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

constexpr double kTol = 1e-12;

Condition strict(const std::string& text, double lhs, double rhs) {
  return {text, lhs > rhs + kTol, false};
}

Condition weak(const std::string& text, double lhs, double rhs) {
  return {text, lhs >= rhs - kTol, std::abs(lhs - rhs) <= kTol};
}

Admissibility finish(std::vector<Condition> c) {
  const Condition& a = c[c.size() - 2];
  const Condition& b = c[c.size() - 1];
  c.push_back({"last two not both equalities", !(a.equality && b.equality), false});
  Admissibility r;
  r.admissible = std::all_of(c.begin(), c.end(), [](const Condition& x) { return x.holds; });
  r.conditions = std::move(c);
  return r;
}

}  // namespace

SpacetimeSample SpacetimeSample::zeros(const GridSpec& grid, int M, double T_window, Window window) {
  SpacetimeSample u;
  u.grid = grid;
  u.M = M;
  u.T_window = T_window;
  u.window = window;
  u.values.assign(static_cast<std::size_t>(M) * grid.points(), cplx(0.0));
  u.validate();
  return u;
}

void SpacetimeSample::validate() const {
  grid.validate();
  if (M < 2 || (M & (M - 1)) != 0) throw StructuralError("SpacetimeSample: M must be a power of two");
  if (!(T_window > 0.0)) throw StructuralError("SpacetimeSample: T_window must be positive");
  if (values.size() != static_cast<std::size_t>(M) * grid.points())
    throw StructuralError("SpacetimeSample: value count does not match M x N^3");
}

double NormSpec::weight(double tau, const Vec3& xi) const {
  double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  double jx = std::sqrt(1.0 + r2);
  double mod = 0.0;
  switch (sign) {
    case Sign::Plus: mod = -tau + jx; break;
    case Sign::Minus: mod = -tau - jx; break;
    case Sign::Wave: mod = std::abs(tau) - jx; break;
  }
  double w = std::pow(jx, s) * std::pow(jap(mod), b);
  if (abs_grad) w *= std::sqrt(r2);
  return w;
}

std::vector<cplx> spacetime_coefficients(const SpacetimeSample& u) {
  u.validate();
  const int M = u.M, N = u.grid.N;
  const std::size_t P = u.points();
  FftwBuffer buf(u.values.size());
  for (int m = 0; m < M; ++m) {
    double w = u.window == Window::Hann ? hann(m, M) : 1.0;
    for (std::size_t p = 0; p < P; ++p) buf.p[m * P + p] = w * u.values[m * P + p];
  }
  Fft4::instance().run(buf.p, M, N, true);
  double scale = 1.0 / (static_cast<double>(M) * P);
  std::vector<cplx> c(buf.p, buf.p + buf.n);
  for (auto& x : c) x *= scale;
  return c;
}

namespace {

template <typename F>
void for_lattice(const SpacetimeSample& u, F&& f) {
  const int M = u.M, N = u.grid.N;
  const double dk = u.grid.dk();
  const double dtau = 2.0 * kPi / u.T_window;
  std::size_t idx = 0;
  for (int m = 0; m < M; ++m) {
    double tau = dtau * signed_index(m, M);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        for (int c = 0; c < N; ++c, ++idx) {
          Vec3 xi{dk * signed_index(a, N), dk * signed_index(b, N), dk * signed_index(c, N)};
          f(idx, tau, xi);
        }
  }
}

}  // namespace

double xsb_norm(const SpacetimeSample& u, const NormSpec& spec) {
  auto c = spacetime_coefficients(u);
  double sum = 0.0;
  for_lattice(u, [&](std::size_t i, double tau, const Vec3& xi) {
    double w = spec.weight(tau, xi);
    sum += w * w * std::norm(c[i]);
  });
  double L = u.grid.L;
  return std::sqrt(u.T_window * L * L * L * sum);
}

HxhReport hxh_check(const SpacetimeSample& u, double s, double b) {
  auto c = spacetime_coefficients(u);
  HxhReport r;
  r.s = s;
  r.b = b;
  NormSpec wave{s, b, Sign::Wave, false}, plus{s, b, Sign::Plus, false}, minus{s, b, Sign::Minus, false};
  double sw = 0.0, sp = 0.0, sm = 0.0, viol = 0.0;
  for_lattice(u, [&](std::size_t i, double tau, const Vec3& xi) {
    double ww = wave.weight(tau, xi), wp = plus.weight(tau, xi), wm = minus.weight(tau, xi);
    if (b >= 0.0)
      viol = std::max({viol, ww - wp, ww - wm});
    else
      viol = std::max({viol, wp - ww, wm - ww});
    double a2 = std::norm(c[i]);
    sw += ww * ww * a2;
    sp += wp * wp * a2;
    sm += wm * wm * a2;
  });
  double vol = u.T_window * std::pow(u.grid.L, 3);
  r.norm_wave = std::sqrt(vol * sw);
  r.norm_plus = std::sqrt(vol * sp);
  r.norm_minus = std::sqrt(vol * sm);
  r.max_weight_violation = viol;
  if (b >= 0.0)
    r.norm_violation = std::max({0.0, r.norm_wave - r.norm_plus, r.norm_wave - r.norm_minus});
  else
    r.norm_violation = std::max({0.0, r.norm_plus - r.norm_wave, r.norm_minus - r.norm_wave});
  return r;
}

std::string Admissibility::summary() const {
  std::string out;
  for (const auto& c : conditions) {
    if (!out.empty()) out += "; ";
    out += c.text + (c.holds ? (c.equality ? " [eq]" : " [ok]") : " [FAIL]");
  }
  return out;
}

Admissibility atlas_admissible(double s0, double s1, double s2, double b0, double b1, double b2) {
  double S = s0 + s1 + s2, B = b0 + b1 + b2;
  double minb = std::min({b0 + b1, b0 + b2, b1 + b2});
  double mixed = std::min({b0 + s1 + s2, s0 + b1 + s2, s0 + s1 + b2});
  double mins = std::min({s0 + s1, s0 + s2, s1 + s2});
  std::vector<Condition> c;
  c.push_back({"b_i >= 0", b0 >= 0.0 && b1 >= 0.0 && b2 >= 0.0, false});
  c.push_back(strict("sum b > 1/2", B, 0.5));
  c.push_back(strict("sum s > 2 - sum b", S, 2.0 - B));
  c.push_back(strict("sum s > 3/2 - min(b_i+b_j)", S, 1.5 - minb));
  c.push_back(strict("sum s > 3/2 - min(b0+s1+s2, s0+b1+s2, s0+s1+b2)", S, 1.5 - mixed));
  c.push_back(weak("sum s >= 1", S, 1.0));
  c.push_back(weak("min(s_i+s_j) >= 0", mins, 0.0));
  return finish(std::move(c));
}

Admissibility nullform_admissible(double sigma0, double sigma1, double sigma2, double beta0,
                                  double beta1, double beta2) {
  double S = sigma0 + sigma1 + sigma2;
  std::vector<Condition> c;
  bool range = beta0 >= 0.0 && beta0 < 0.5 && 0.5 < beta1 && beta1 < 1.0 && 0.5 < beta2 && beta2 < 1.0;
  c.push_back({"0 <= beta0 < 1/2 < beta1, beta2 < 1", range, false});
  c.push_back(strict("sum sigma + beta0 > 3/2 - (beta0+sigma1+sigma2)", S + beta0,
                     1.5 - (beta0 + sigma1 + sigma2)));
  c.push_back(strict("sum sigma > 3/2 - (sigma0+beta1+sigma2)", S, 1.5 - (sigma0 + beta1 + sigma2)));
  c.push_back(strict("sum sigma > 3/2 - (sigma0+sigma1+beta2)", S, 1.5 - (sigma0 + sigma1 + beta2)));
  c.push_back(weak("sum sigma + beta0 >= 1", S + beta0, 1.0));
  c.push_back(weak("min(sigma0+sigma1, sigma0+sigma2, beta0+sigma1+sigma2) >= 0",
                   std::min({sigma0 + sigma1, sigma0 + sigma2, beta0 + sigma1 + sigma2}), 0.0));
  return finish(std::move(c));
}

Admissibility EstimateDef::admissibility() const {
  if (form == EstimateForm::NullForm) {
    const auto& t = nullform_tuple;
    return nullform_admissible(t[0], t[1], t[2], t[3], t[4], t[5]);
  }
  Admissibility all;
  all.admissible = !atlas_steps.empty();
  for (std::size_t i = 0; i < atlas_steps.size(); ++i) {
    const auto& t = atlas_steps[i];
    Admissibility a = atlas_admissible(t[0], t[1], t[2], t[3], t[4], t[5]);
    for (auto& c : a.conditions) {
      if (atlas_steps.size() > 1) c.text = "step " + std::to_string(i + 1) + ": " + c.text;
      all.conditions.push_back(c);
    }
    all.admissible = all.admissible && a.admissible;
  }
  return all;
}

std::string EstimateDef::tuple_string() const {
  auto six = [](const std::array<double, 6>& t) {
    std::string s = "(";
    for (int i = 0; i < 6; ++i) s += (i ? " " : "") + fmt(t[i]);
    return s + ")";
  };
  if (form == EstimateForm::NullForm) return six(nullform_tuple);
  std::string out;
  for (const auto& t : atlas_steps) out += (out.empty() ? "" : "|") + six(t);
  return out;
}

std::vector<EstimateDef> estimate_catalog(double eps) {
  const double s = 1.0 - eps, b = 0.5 + 2.0 * eps;
  const double bn = 1.0 + eps - b;  // -(b - 1 - eps)
  std::vector<EstimateDef> cat;

  auto nullform = [&](std::string id, std::string text, double s_out, double s1, double s2) {
    EstimateDef d;
    d.id = std::move(id);
    d.text = std::move(text);
    d.form = EstimateForm::NullForm;
    d.s_out = s_out;
    d.b_out = b - 1.0 + eps;
    d.factors = {{s1, b, false, false}, {s2, b, false, false}};
    d.nullform_tuple = {-s_out, s1, s2, -d.b_out, b, b};
    cat.push_back(d);
  };
  nullform("NullEst1:1", "B(u,v) in H^{s-1,b-1+e} <~ X^{s,b} x X^{s-1,b}", s - 1.0, s, s - 1.0);
  nullform("NullEst2:1", "B(u,v) in H^{-1,b-1+e} <~ X^{s,b} x X^{-1,b}", -1.0, s, -1.0);
  nullform("NullEst3:1", "B(u,v) in H^{-1,b-1+e} <~ X^{s-1,b} x X^{s-1,b}", -1.0, s - 1.0, s - 1.0);
  nullform("NullEst4:1", "B(u,v) in H^{-1,b-1+e} <~ X^{0,b} x X^{0,b}", -1.0, 0.0, 0.0);
  nullform("NullEst5:1", "B(u,v) in H^{0,b-1+e} <~ X^{s,b} x X^{0,b}", 0.0, s, 0.0);

  // u carries |grad| in its norm when `grad`; the reduction replaces it by
  // <grad>, i.e. s1 + 1 in the product theorem.
  auto product = [&](std::string id, std::string text, double s_out, bool grad, double s1, double s2) {
    EstimateDef d;
    d.id = std::move(id);
    d.text = std::move(text);
    d.s_out = s_out;
    d.b_out = 0.0;
    d.factors = {{s1, b, grad, false}, {s2, b, false, false}};
    d.atlas_steps = {{-s_out, grad ? s1 + 1.0 : s1, s2, 0.0, b, b}};
    cat.push_back(d);
  };
  product("NullEst1:2", "uv in H^{s-1,0} <~ |grad|u in H^{s-1,b}, v in H^{s+1,b}", s - 1.0, true, s - 1.0, s + 1.0);
  product("NullEst1:3", "uv in H^{s-1,0} <~ |grad|u in H^{s+1,b}, v in H^{s-1,b}", s - 1.0, true, s + 1.0, s - 1.0);
  product("NullEst1:4", "uv in H^{-1,0} <~ |grad|u in H^{s-1,b}, v in H^{1,b}", -1.0, true, s - 1.0, 1.0);
  product("NullEst1:5", "uv in H^{-1,0} <~ |grad|u in H^{s+1,b}, v in H^{-1,b}", -1.0, true, s + 1.0, -1.0);
  product("NullEst1:6", "uv in H^{-1,0} <~ u in H^{s-1,b}, v in H^{s+1,b}", -1.0, false, s - 1.0, s + 1.0);
  product("NullEst1:7", "uv in H^{-1,0} <~ u in H^{0,b}, v in H^{2,b}", -1.0, false, 0.0, 2.0);
  product("NullEst1:8", "uv in L^2 <~ |grad|u in H^{s-1,b}, v in H^{2,b}", 0.0, true, s - 1.0, 2.0);
  product("NullEst1:9", "uv in L^2 <~ |grad|u in H^{s+1,b}, v in H^{0,b}", 0.0, true, s + 1.0, 0.0);

  auto multi = [&](std::string id, std::string text, double s_out, std::vector<FactorSpec> f,
                   std::vector<std::array<double, 6>> steps) {
    EstimateDef d;
    d.id = std::move(id);
    d.text = std::move(text);
    d.s_out = s_out;
    d.b_out = b - 1.0 - eps;
    d.factors = std::move(f);
    d.atlas_steps = std::move(steps);
    cat.push_back(d);
  };
  const FactorSpec hs{s, b, false, false}, h0{0.0, b, false, false}, h1{1.0, b, false, false},
      h1b{1.0, b, false, true};
  const std::array<double, 6> half_step{-0.5, s, s, 0.0, b, b};
  multi("NonLinEst-A-13", "uv in H^{s-1,b-1-e} <~ H^{s,b} x H^{0,b}", s - 1.0, {hs, h0},
        {{1.0 - s, s, 0.0, bn, b, b}});
  multi("NonLinEst-A-14", "u<grad>v in H^{s-1,b-1-e} <~ H^{1,b} x H^{1,b}", s - 1.0, {h1, h1b},
        {{1.0 - s, 1.0, 0.0, bn, b, b}});
  multi("NonLinEst-A-15", "uvw in H^{s-1,b-1-e} <~ H^{s,b}^3", s - 1.0, {hs, hs, hs},
        {{1.0 - s, 0.5, 1.0, bn, 0.0, b}, half_step});
  multi("NonLinEst-F-13", "uvw in H^{-1,b-1-e} <~ H^{s,b} x H^{s,b} x H^{0,b}", -1.0, {hs, hs, h0},
        {{1.0, 0.5, 0.0, bn, 0.0, b}, half_step});
  multi("NonLinEst-F-14", "uv<grad>w in H^{-1,b-1-e} <~ H^{s,b} x H^{1,b} x H^{1,b}", -1.0,
        {hs, h1, h1b}, {{1.0, 0.5, 0.0, bn, 0.0, b}, half_step});
  multi("NonLinEst-F-15", "uvwz in H^{-1,b-1-e} <~ H^{s,b}^4", -1.0, {hs, hs, hs, hs},
        {{1.0, 0.0, s, bn, 0.0, b}, {0.0, 0.5 + eps, s, 0.0, 0.0, b}, {-0.5 - eps, s, s, 0.0, b, b}});
  multi("NonLinEst-P-13", "uvw in H^{0,b-1-e} <~ H^{s,b} x H^{s,b} x H^{1,b}", 0.0, {hs, hs, h1},
        {{0.0, 0.5, 1.0, bn, 0.0, b}, half_step});
  return cat;
}

const EstimateDef& find_estimate(const std::vector<EstimateDef>& catalog, const std::string& id) {
  for (const auto& d : catalog)
    if (d.id == id) return d;
  throw StructuralError("unknown estimate id: " + id);
}

std::size_t SpectralBox::index(int j, int k1, int k2, int k3) const {
  const std::size_t w = kw();
  return ((static_cast<std::size_t>(j + jband) * w + (k1 + kband)) * w + (k2 + kband)) * w + (k3 + kband);
}

namespace {

SpectralBox empty_box(int jband, int kband) {
  SpectralBox b;
  b.jband = jband;
  b.kband = kband;
  b.c.assign(static_cast<std::size_t>(b.jw()) * b.kw() * b.kw() * b.kw(), cplx(0.0));
  return b;
}

template <typename F>
void for_box(const SpectralBox& b, F&& f) {
  std::size_t i = 0;
  for (int j = -b.jband; j <= b.jband; ++j)
    for (int k1 = -b.kband; k1 <= b.kband; ++k1)
      for (int k2 = -b.kband; k2 <= b.kband; ++k2)
        for (int k3 = -b.kband; k3 <= b.kband; ++k3, ++i) f(i, j, k1, k2, k3);
}

double jap3(int k1, int k2, int k3) { return std::sqrt(1.0 + k1 * k1 + k2 * k2 + k3 * k3); }

}  // namespace

SpectralBox box_product(const std::vector<const SpectralBox*>& factors) {
  if (factors.empty()) throw StructuralError("box_product: no factors");
  int J = 0, K = 0;
  for (const auto* f : factors) {
    J += f->jband;
    K += f->kband;
  }
  const int Mp = smooth_size(2 * J + 1), Np = smooth_size(2 * K + 1);
  const std::size_t P = static_cast<std::size_t>(Np) * Np * Np;
  const std::size_t size = static_cast<std::size_t>(Mp) * P;
  auto lin = [&](int j, int k1, int k2, int k3) {
    return static_cast<std::size_t>(wrap(j, Mp)) * P +
           (static_cast<std::size_t>(wrap(k1, Np)) * Np + wrap(k2, Np)) * Np + wrap(k3, Np);
  };
  FftwBuffer acc(size), tmp(size);
  bool first = true;
  for (const auto* f : factors) {
    std::fill(tmp.p, tmp.p + size, cplx(0.0));
    for_box(*f, [&](std::size_t i, int j, int k1, int k2, int k3) { tmp.p[lin(j, k1, k2, k3)] = f->c[i]; });
    Fft4::instance().run(tmp.p, Mp, Np, false);
    if (first)
      std::copy(tmp.p, tmp.p + size, acc.p);
    else
      for (std::size_t i = 0; i < size; ++i) acc.p[i] *= tmp.p[i];
    first = false;
  }
  Fft4::instance().run(acc.p, Mp, Np, true);
  const double scale = 1.0 / static_cast<double>(size);
  SpectralBox out = empty_box(J, K);
  for_box(out, [&](std::size_t i, int j, int k1, int k2, int k3) { out.c[i] = scale * acc.p[lin(j, k1, k2, k3)]; });
  return out;
}

SpectralBox box_nullform(const SpectralBox& u, const SpectralBox& v, int s1, int s2) {
  if (u.jband != v.jband || u.kband != v.kband) throw StructuralError("box_nullform: band mismatch");
  const int J = u.jband, K = u.kband;
  const int Mp = 4 * J + 1;  // enough time samples to resolve the product exactly
  const int kw = u.kw();
  const std::size_t S = static_cast<std::size_t>(kw) * kw * kw;

  // Spatial modes, and per-mode time samples of u and v.
  std::vector<std::array<int, 3>> modes(S);
  {
    std::size_t i = 0;
    for (int a = -K; a <= K; ++a)
      for (int b = -K; b <= K; ++b)
        for (int c = -K; c <= K; ++c) modes[i++] = {a, b, c};
  }
  std::vector<cplx> phase(static_cast<std::size_t>(Mp) * (2 * (2 * J) + 1));
  auto ph = [&](int m, int j) -> cplx& { return phase[static_cast<std::size_t>(m) * (4 * J + 1) + (j + 2 * J)]; };
  for (int m = 0; m < Mp; ++m)
    for (int j = -2 * J; j <= 2 * J; ++j) ph(m, j) = std::polar(1.0, 2.0 * kPi * j * m / Mp);

  auto samples = [&](const SpectralBox& x) {
    std::vector<cplx> t(static_cast<std::size_t>(Mp) * S, cplx(0.0));
    for (int m = 0; m < Mp; ++m)
      for (int j = -J; j <= J; ++j) {
        cplx e = ph(m, j);
        const cplx* src = x.c.data() + static_cast<std::size_t>(j + J) * S;
        cplx* dst = t.data() + static_cast<std::size_t>(m) * S;
        for (std::size_t q = 0; q < S; ++q) dst[q] += e * src[q];
      }
    return t;
  };
  auto U = samples(u), V = samples(v);

  SpectralBox out = empty_box(2 * J, 2 * K);
  const int ow = out.kw();
  const std::size_t OS = static_cast<std::size_t>(ow) * ow * ow;
  std::vector<cplx> O(static_cast<std::size_t>(Mp) * OS, cplx(0.0));

  std::vector<double> norms(S);
  for (std::size_t q = 0; q < S; ++q) {
    const auto& k = modes[q];
    norms[q] = std::sqrt(double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
  }
  const double sgn = static_cast<double>(s1 * s2);
  std::vector<double> theta(S);
  std::vector<std::size_t> target(S);
  for (std::size_t qa = 0; qa < S; ++qa) {
    const auto& a = modes[qa];
    if (norms[qa] == 0.0) continue;
    for (std::size_t qb = 0; qb < S; ++qb) {
      const auto& b = modes[qb];
      if (norms[qb] == 0.0) {
        theta[qb] = 0.0;
      } else {
        double dot = sgn * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
        double cx = a[1] * b[2] - a[2] * b[1], cy = a[2] * b[0] - a[0] * b[2], cz = a[0] * b[1] - a[1] * b[0];
        theta[qb] = std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
      }
      target[qb] = ((static_cast<std::size_t>(a[0] + b[0] + 2 * K) * ow) + (a[1] + b[1] + 2 * K)) * ow +
                   (a[2] + b[2] + 2 * K);
    }
    for (int m = 0; m < Mp; ++m) {
      const cplx ua = U[static_cast<std::size_t>(m) * S + qa];
      if (ua == cplx(0.0)) continue;
      const cplx* vm = V.data() + static_cast<std::size_t>(m) * S;
      cplx* om = O.data() + static_cast<std::size_t>(m) * OS;
      for (std::size_t qb = 0; qb < S; ++qb)
        if (norms[qb] != 0.0) om[target[qb]] += theta[qb] * ua * vm[qb];
    }
  }
  // Back to time frequencies.
  for (int j = -2 * J; j <= 2 * J; ++j) {
    cplx* dst = out.c.data() + static_cast<std::size_t>(j + 2 * J) * OS;
    for (int m = 0; m < Mp; ++m) {
      cplx e = std::conj(ph(m, j)) / static_cast<double>(Mp);
      const cplx* src = O.data() + static_cast<std::size_t>(m) * OS;
      for (std::size_t q = 0; q < OS; ++q) dst[q] += e * src[q];
    }
  }
  return out;
}

double box_norm(const SpectralBox& u, const NormSpec& spec, double T_window) {
  const double dtau = 2.0 * kPi / T_window;
  double sum = 0.0;
  for_box(u, [&](std::size_t i, int j, int k1, int k2, int k3) {
    if (u.c[i] == cplx(0.0)) return;
    double w = spec.weight(dtau * j, Vec3{double(k1), double(k2), double(k3)});
    sum += w * w * std::norm(u.c[i]);
  });
  const double L = 2.0 * kPi;
  return std::sqrt(T_window * L * L * L * sum);
}

namespace {

constexpr double kWindow = 2.0 * kPi;

/// Gaussian coefficients for |j| < jband, |k_i| <= kband with a random power
/// law profile in |k|, then a Hann window in time (which fills |j| = jband).
SpectralBox random_box(std::mt19937_64& rng, int jband, int kband, bool mean_zero) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> decay(0.0, 2.0);
  const double gamma = decay(rng);
  SpectralBox raw = empty_box(jband, kband);
  for_box(raw, [&](std::size_t i, int j, int k1, int k2, int k3) {
    double re = g(rng), im = g(rng);
    if (std::abs(j) >= jband) return;
    if (mean_zero && k1 == 0 && k2 == 0 && k3 == 0) return;
    raw.c[i] = cplx(re, im) * std::pow(jap3(k1, k2, k3), -gamma);
  });
  SpectralBox out = empty_box(jband, kband);
  const std::size_t S = static_cast<std::size_t>(raw.kw()) * raw.kw() * raw.kw();
  for (int j = -jband; j <= jband; ++j) {
    cplx* dst = out.c.data() + static_cast<std::size_t>(j + jband) * S;
    for (int d : {-1, 0, 1}) {
      int src = j - d;
      if (src < -jband || src > jband) continue;
      double w = d == 0 ? 0.5 : -0.25;
      const cplx* s = raw.c.data() + static_cast<std::size_t>(src + jband) * S;
      for (std::size_t q = 0; q < S; ++q) dst[q] += w * s[q];
    }
  }
  return out;
}

SpectralBox with_bessel(SpectralBox u) {
  for_box(u, [&](std::size_t i, int, int k1, int k2, int k3) { u.c[i] *= jap3(k1, k2, k3); });
  return u;
}

Sign sign_of(int s) { return s > 0 ? Sign::Plus : Sign::Minus; }

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

ProbeResult run_estimate_probe(const EstimateDef& def, int N, int M, int batch, std::uint64_t seed) {
  if (N < 4 || M < 4) throw StructuralError("run_estimate_probe: N and M must be at least 4");
  ProbeResult r;
  r.id = def.id;
  r.tuple = def.tuple_string();
  r.admissible = def.admissibility().admissible;
  r.batch = batch;
  r.N = N;
  r.M = M;
  r.seed = seed;
  const int kband = N / 4, jband = M / 4;
  const NormSpec out_spec{def.s_out, def.b_out, Sign::Wave, false};
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(N), static_cast<std::uint32_t>(M)};
  std::mt19937_64 rng(seq);

  for (int n = 0; n < batch; ++n) {
    std::vector<SpectralBox> f;
    for (const auto& fs : def.factors)
      f.push_back(random_box(rng, jband, kband, fs.abs_grad || def.form == EstimateForm::NullForm));
    if (def.form == EstimateForm::NullForm) {
      for (int s1 : {1, -1})
        for (int s2 : {1, -1}) {
          SpectralBox B = box_nullform(f[0], f[1], s1, s2);
          double lhs = box_norm(B, out_spec, kWindow);
          double rhs = box_norm(f[0], {def.factors[0].s, def.factors[0].b, sign_of(s1), false}, kWindow) *
                       box_norm(f[1], {def.factors[1].s, def.factors[1].b, sign_of(s2), false}, kWindow);
          r.max_ratio = std::max(r.max_ratio, safe_ratio(lhs, rhs));
        }
      continue;
    }
    std::vector<SpectralBox> inside;
    std::vector<const SpectralBox*> ptrs;
    double rhs = 1.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto& fs = def.factors[i];
      rhs *= box_norm(f[i], {fs.s, fs.b, Sign::Wave, fs.abs_grad}, kWindow);
      inside.push_back(fs.bessel ? with_bessel(f[i]) : f[i]);
    }
    for (const auto& x : inside) ptrs.push_back(&x);
    double lhs = box_norm(box_product(ptrs), out_spec, kWindow);
    r.max_ratio = std::max(r.max_ratio, safe_ratio(lhs, rhs));
  }
  return r;
}

ProbeResult product_estimate_probe(double s0, double s1, double s2, double b0, double b1, double b2,
                                   int N, int M, int batch, std::uint64_t seed) {
  EstimateDef d;
  d.id = "product";
  d.s_out = -s0;
  d.b_out = -b0;
  d.factors = {{s1, b1, false, false}, {s2, b2, false, false}};
  d.atlas_steps = {{s0, s1, s2, b0, b1, b2}};
  return run_estimate_probe(d, N, M, batch, seed);
}

ProbeResult nullform_estimate_probe(double sigma0, double sigma1, double sigma2, double beta0,
                                    double beta1, double beta2, std::array<int, 2> signs, int N,
                                    int M, int batch, std::uint64_t seed) {
  ProbeResult r;
  r.id = "nullform";
  EstimateDef d;
  d.form = EstimateForm::NullForm;
  d.nullform_tuple = {sigma0, sigma1, sigma2, beta0, beta1, beta2};
  r.tuple = d.tuple_string();
  r.admissible = d.admissibility().admissible;
  r.batch = batch;
  r.N = N;
  r.M = M;
  r.seed = seed;
  const NormSpec out_spec{-sigma0, -beta0, Sign::Wave, false};
  const NormSpec us{sigma1, beta1, sign_of(signs[0]), false}, vs{sigma2, beta2, sign_of(signs[1]), false};
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(N), static_cast<std::uint32_t>(M)};
  std::mt19937_64 rng(seq);
  for (int n = 0; n < batch; ++n) {
    SpectralBox u = random_box(rng, M / 4, N / 4, true), v = random_box(rng, M / 4, N / 4, true);
    SpectralBox B = box_nullform(u, v, signs[0], signs[1]);
    double lhs = box_norm(B, out_spec, kWindow);
    double rhs = box_norm(u, us, kWindow) * box_norm(v, vs, kWindow);
    r.max_ratio = std::max(r.max_ratio, safe_ratio(lhs, rhs));
  }
  return r;
}

namespace {

/// X^{s,b} norm of samples that are physical in time and spectral in space
/// (index m * N^3 + p), with a Hann window over the time axis.
double mixed_xsb_norm(const std::vector<cplx>& vals, const GridSpec& grid, int M, double T_window,
                      const NormSpec& spec) {
  const int N = grid.N;
  const std::size_t P = grid.points();
  const double dk = grid.dk(), dtau = 2.0 * kPi / T_window;
  std::vector<cplx> e(static_cast<std::size_t>(M) * M);
  for (int j = 0; j < M; ++j)
    for (int m = 0; m < M; ++m) e[static_cast<std::size_t>(j) * M + m] = std::polar(hann(m, M) / M, -2.0 * kPi * j * m / M);
  double sum = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    Vec3 xi{dk * signed_index(static_cast<int>(p / (N * N)), N), dk * signed_index(static_cast<int>((p / N) % N), N),
            dk * signed_index(static_cast<int>(p % N), N)};
    for (int j = 0; j < M; ++j) {
      cplx c(0.0);
      for (int m = 0; m < M; ++m) c += e[static_cast<std::size_t>(j) * M + m] * vals[static_cast<std::size_t>(m) * P + p];
      if (c == cplx(0.0)) continue;
      double w = spec.weight(dtau * signed_index(j, M), xi);
      sum += w * w * std::norm(c);
    }
  }
  return std::sqrt(T_window * std::pow(grid.L, 3) * sum);
}

}  // namespace

LinearParts linear_estimate_parts(const GridSpec& grid, int M, double T, double eps,
                                  const std::vector<cplx>& u0_coeffs, const SpectralBox& g) {
  const double s = 1.0 - eps, b = 0.5 + 2.0 * eps;
  const int N = grid.N;
  const std::size_t P = grid.points();
  if (u0_coeffs.size() != P) throw StructuralError("linear_estimate_parts: u0 size mismatch");
  if (2 * g.kband >= N || 2 * g.jband >= M) throw StructuralError("linear_estimate_parts: forcing band too wide");
  const double dk = grid.dk();
  const double dtau = kPi / T;  // window [-T, T)

  std::vector<cplx> u(static_cast<std::size_t>(M) * P, cplx(0.0)), G(u.size(), cplx(0.0));
  double u0_norm2 = 0.0;
  for (std::size_t p = 0; p < P; ++p) {
    int k1 = signed_index(static_cast<int>(p / (N * N)), N);
    int k2 = signed_index(static_cast<int>((p / N) % N), N);
    int k3 = signed_index(static_cast<int>(p % N), N);
    double xk = dk * std::sqrt(double(k1 * k1 + k2 * k2 + k3 * k3));
    double om = std::sqrt(1.0 + xk * xk);
    u0_norm2 += std::pow(om, 2.0 * s) * std::norm(u0_coeffs[p]);
    bool in_box = std::abs(k1) <= g.kband && std::abs(k2) <= g.kband && std::abs(k3) <= g.kband;
    for (int m = 0; m < M; ++m) {
      double t = -T + 2.0 * T * m / M;
      cplx duhamel(0.0), force(0.0);
      if (in_box) {
        for (int j = -g.jband; j <= g.jband; ++j) {
          cplx c = g.c[g.index(j, k1, k2, k3)];
          if (c == cplx(0.0)) continue;
          double tau = dtau * j;
          cplx gj = c * std::polar(1.0, tau * T);  // G(t) = sum c e^{i tau (t + T)}
          force += gj * std::polar(1.0, tau * t);
          double w = tau - om;
          cplx integral = std::abs(w * t) < 1e-12 ? cplx(t) : (std::polar(1.0, w * t) - 1.0) / cplx(0.0, w);
          duhamel += gj * integral;
        }
      }
      u[static_cast<std::size_t>(m) * P + p] = std::polar(1.0, om * t) * (u0_coeffs[p] - cplx(0.0, 1.0) * duhamel);
      G[static_cast<std::size_t>(m) * P + p] = force;
    }
  }
  LinearParts r;
  r.lhs = mixed_xsb_norm(u, grid, M, 2.0 * T, {s, b, Sign::Plus, false});
  r.data = std::sqrt(std::pow(grid.L, 3) * u0_norm2);
  r.forcing = mixed_xsb_norm(G, grid, M, 2.0 * T, {s, b - 1.0 + eps, Sign::Plus, false});
  return r;
}

double LinearParts::ratio(double T, double eps) const {
  return safe_ratio(lhs, data + std::pow(T, eps) * forcing);
}

std::vector<LinearProbeRow> linear_estimate_probe(int N, int M, const std::vector<double>& Ts,
                                                  double eps, int batch, std::uint64_t seed) {
  GridSpec grid;
  grid.N = N;
  grid.dealias = Dealias::None;
  std::vector<LinearProbeRow> rows;
  for (double T : Ts) {
    LinearProbeRow row;
    row.T = T;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int n = 0; n < batch; ++n) {
      std::vector<cplx> u0(grid.points(), cplx(0.0));
      for (std::size_t p = 0; p < grid.points(); ++p) {
        int k1 = signed_index(static_cast<int>(p / (N * N)), N);
        int k2 = signed_index(static_cast<int>((p / N) % N), N);
        int k3 = signed_index(static_cast<int>(p % N), N);
        double re = gauss(rng), im = gauss(rng);
        if (std::max({std::abs(k1), std::abs(k2), std::abs(k3)}) <= N / 4) u0[p] = cplx(re, im);
      }
      SpectralBox g = random_box(rng, M / 4, N / 4, false);
      LinearParts parts = linear_estimate_parts(grid, M, T, eps, u0, g);
      row.max_ratio = std::max(row.max_ratio, parts.ratio(T, eps));
      row.max_ratio_no_power = std::max(row.max_ratio_no_power, parts.ratio(1.0, eps));
    }
    rows.push_back(row);
  }
  return rows;
}

std::string probe_csv_header() { return "estimate,tuple,admissible,batch,max_ratio,N,M,seed"; }

std::string probe_csv_row(const ProbeResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,\"%s\",%d,%d,%.17g,%d,%d,%llu", r.id.c_str(), r.tuple.c_str(),
                r.admissible ? 1 : 0, r.batch, r.max_ratio, r.N, r.M, static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace ymh

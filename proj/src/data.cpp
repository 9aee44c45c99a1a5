#include "ymh/data.hpp"

#include <cmath>
#include <limits>

#include "ymh/snapshot.hpp"

namespace ymh {

CauchyData CauchyData::zeros(GridPtr grid, const AlgebraKind& kind, double p) {
  validate_exponent(p);
  CauchyData d;
  const Field z = Field::algebra(grid, kind);
  for (auto& f : d.a) f = z;
  for (auto& f : d.dota) f = z;
  d.phi0 = z;
  d.phi1 = z;
  d.p = p;
  return d;
}

CauchyData& CauchyData::operator*=(double c) {
  for (auto& f : a) f *= c;
  for (auto& f : dota) f *= c;
  phi0 *= c;
  phi1 *= c;
  return *this;
}

namespace {

Field d_(const Field& u, int i) { return apply(u, Multiplier::derivative(i - 1)); }

double vec_norm(const std::array<Field, 4>& v, double s) {
  double sum = 0.0;
  for (const auto& f : v) {
    const double n = sobolev_norm(f, s);
    sum += n * n;
  }
  return std::sqrt(sum);
}

double vec_norm6(const std::array<Field, 6>& v, double s) {
  double sum = 0.0;
  for (const auto& f : v) {
    const double n = sobolev_norm(f, s);
    sum += n * n;
  }
  return std::sqrt(sum);
}

double ratio(double num, double den) {
  if (num == 0.0) return 0.0;
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace

FData build_F_data(const CauchyData& d) {
  FData out;
  for (int k = 0; k < 6; ++k) {
    const auto [a, b] = pair_of(k);
    if (a == 0) {
      const int i = b;
      Field f = d.dota[i].spectral();
      f -= d_(d.a[0], i);
      f += commutator(d.a[0], d.a[i]);
      out.f[k] = std::move(f);
    } else {
      const int i = a, j = b;
      Field f = d_(d.a[j], i);
      f -= d_(d.a[i], j);
      f += commutator(d.a[i], d.a[j]);
      out.f[k] = std::move(f);
      Field fd = d_(d.dota[j], i);
      fd -= d_(d.dota[i], j);
      fd += commutator(d.dota[i], d.a[j]);
      fd += commutator(d.a[i], d.dota[j]);
      out.dotf[k] = std::move(fd);
    }
  }
  auto f_at = [&](int a, int b) -> Field {
    if (a == b) return out.f[0].zeros_like();
    return a < b ? out.f[pair_index(a, b)] : -out.f[pair_index(b, a)];
  };
  for (int i = 1; i <= 3; ++i) {
    Field fd = out.f[0].zeros_like();
    for (int j = 1; j <= 3; ++j) {
      if (j == i) continue;
      fd += d_(f_at(j, i), j);
    }
    for (int a = 0; a < 4; ++a) {
      if (a == i) continue;
      fd += metric(a) * commutator(d.a[a], f_at(a, i));
    }
    fd += commutator(d_(d.phi0, i), d.phi0);
    fd += commutator(commutator(d.a[i], d.phi0), d.phi0);
    out.dotf[pair_index(0, i)] = std::move(fd);
  }
  return out;
}

double gauss_residual(const CauchyData& d, const FData& f) {
  Field r = d.phi0.zeros_like().spectral();
  for (int i = 1; i <= 3; ++i) {
    const Field fi0 = -f.f[pair_index(0, i)];
    r += d_(fi0, i);
    r += commutator(d.a[i], fi0);
  }
  r -= commutator(d.phi0, d.phi1);
  r -= commutator(d.phi0, commutator(d.a[0], d.phi0));
  return sobolev_norm(r, 0.0);
}

double lorenz_data_residual(const CauchyData& d) {
  Field r = d.dota[0].spectral();
  for (int i = 1; i <= 3; ++i) r -= d_(d.a[i], i);
  return sobolev_norm(r, 0.0);
}

CauchyData finalize_lorenz(const CauchyData& d) {
  CauchyData out = d;
  Field div = d_(d.a[1], 1);
  div += d_(d.a[2], 2);
  div += d_(d.a[3], 3);
  if (d.dota[0].repr() == Repr::Physical) div.to_physical();
  out.dota[0] = std::move(div);
  return out;
}

double data_norm(const CauchyData& d) {
  return vec_norm(d.a, 1.0) + vec_norm(d.dota, 0.0) + sobolev_norm(d.phi0, 1.0) + sobolev_norm(d.phi1, 0.0);
}

FBoundReport check_f_bounds(const CauchyData& d, const FData& f) {
  const double a1 = vec_norm(d.a, 1.0);
  const double ad = vec_norm(d.dota, 0.0);
  const double p1 = sobolev_norm(d.phi0, 1.0);
  const double fn = vec_norm6(f.f, 0.0);
  const double fdn = vec_norm6(f.dotf, -1.0);
  FBoundReport r;
  r.f_printed = ratio(fn, std::pow(1.0 + a1, 2) * ad);
  r.f_corrected = ratio(fn, std::pow(1.0 + a1, 2) * (a1 + ad));
  r.fdot = ratio(fdn, std::pow(1.0 + a1, 3) * (ad + p1 * p1));
  return r;
}

Potential make_lorenz_potential(GridPtr grid, const AlgebraKind& kind, std::uint64_t seed, int band,
                                double amplitude) {
  if (band < 0 || 3 * band > grid->N()) throw ConfigError("potential band must satisfy 0 <= band <= N/3");
  Potential P;
  for (int a = 0; a < 4; ++a) {
    P[a].u = random_field(grid, kind, seed * 8 + static_cast<std::uint64_t>(a), band, amplitude, true);
    if (a > 0) {
      P[a].dt = random_field(grid, kind, seed * 8 + 4 + static_cast<std::uint64_t>(a), band, amplitude, true);
    }
  }
  Field div = d_(P[1].u, 1);
  div += d_(P[2].u, 2);
  div += d_(P[3].u, 3);
  P[0].dt = std::move(div.to_physical());
  return P;
}

CauchyData make_random_data(GridPtr grid, const AlgebraKind& kind, std::uint64_t seed, int band,
                            double amplitude, double p) {
  CauchyData d = CauchyData::zeros(grid, kind, p);
  for (int a = 0; a < 4; ++a) {
    d.a[a] = random_field(grid, kind, seed * 16 + static_cast<std::uint64_t>(a), band, amplitude, false);
    d.dota[a] = random_field(grid, kind, seed * 16 + 4 + static_cast<std::uint64_t>(a), band, amplitude, false);
  }
  d.phi0 = random_field(grid, kind, seed * 16 + 8, band, amplitude, false);
  d.phi1 = random_field(grid, kind, seed * 16 + 9, band, amplitude, false);
  return finalize_lorenz(d);
}

CauchyData make_compliant_data(GridPtr grid, const AlgebraKind& kind, std::uint64_t seed, int band,
                               double amplitude, double p, double lambda) {
  CauchyData d = CauchyData::zeros(grid, kind, p);
  for (int a = 0; a < 4; ++a) {
    d.a[a] = random_field(grid, kind, seed * 16 + static_cast<std::uint64_t>(a), band, amplitude, true);
  }
  for (int i = 1; i <= 3; ++i) {
    Field v = d_(d.a[0], i);
    v -= commutator(d.a[0], d.a[i]);
    d.dota[i] = std::move(v.to_physical());
  }
  d.phi0 = random_field(grid, kind, seed * 16 + 8, band, amplitude, false);
  Field v = lambda * d.phi0.spectral();
  v -= commutator(d.a[0], d.phi0);
  d.phi1 = std::move(v.to_physical());
  return finalize_lorenz(d);
}

GaugeState state_from_data(const CauchyData& d) {
  const FData f = build_F_data(d);
  GaugeState s;
  for (int a = 0; a < 4; ++a) {
    s.A[a] = d.a[a].physical();
    s.dtA[a] = d.dota[a].physical();
  }
  for (int k = 0; k < 6; ++k) {
    s.F[k] = f.f[k].physical();
    s.dtF[k] = f.dotf[k].physical();
  }
  s.phi = d.phi0.physical();
  s.dtphi = d.phi1.physical();
  return s;
}

GaugeState abelian_plane_wave(GridPtr grid, const AlgebraKind& kind, const std::array<int, 3>& k,
                              int axis, double amplitude, double t) {
  if (!kind.abelian() || kind.dimension() != 1) throw StructuralError("plane wave needs a one-dimensional algebra");
  if (axis < 1 || axis > 3) throw StructuralError("plane wave polarization axis must be 1..3");
  if (k[axis - 1] != 0) throw StructuralError("plane wave must be transverse");
  const double dk = grid->spec().dk();
  const double w = dk * std::sqrt(double(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]));
  if (w == 0.0) throw StructuralError("plane wave needs a nonzero wavevector");
  const Matrix E = orthonormal_basis(kind).front().matrix();
  GaugeState s = GaugeState::zeros(grid, kind);
  std::array<Field, 4> ddtA;
  for (auto& f : ddtA) f = s.phi.zeros_like();
  Field& a = s.A[axis];
  Field& da = s.dtA[axis];
  Field& dda = ddtA[axis];
  for (std::size_t p = 0; p < grid->points(); ++p) {
    const Vec3 x = grid->position(p);
    const double th = dk * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]) - w * t;
    a.set_matrix(p, amplitude * std::cos(th) * E);
    da.set_matrix(p, amplitude * w * std::sin(th) * E);
    dda.set_matrix(p, -amplitude * w * w * std::cos(th) * E);
  }
  s.F = curvature_from_potential(s.A, s.dtA);
  s.dtF = curvature_from_potential(s.dtA, ddtA);
  for (auto& f : s.F) f.to_physical();
  for (auto& f : s.dtF) f.to_physical();
  return s;
}

void save_data(const std::string& path, const CauchyData& d, std::uint64_t config_hash) {
  std::vector<NamedField> fields;
  for (int a = 0; a < 4; ++a) fields.push_back({"a" + std::to_string(a), d.a[a]});
  for (int a = 0; a < 4; ++a) fields.push_back({"dota" + std::to_string(a), d.dota[a]});
  fields.push_back({"phi0", d.phi0});
  fields.push_back({"phi1", d.phi1});
  write_bundle(path, fields, config_hash);
}

}  // namespace ymh

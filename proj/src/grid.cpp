#include "ymh/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <new>
#include <random>

namespace ymh {

void GridSpec::validate() const {
  if (N < 4 || (N & (N - 1)) != 0) throw ConfigError("grid.N must be a power of two >= 4");
  if (!(L > 0.0) || !std::isfinite(L)) throw ConfigError("grid.L must be positive");
}

template <typename T>
T* AlignedAllocator<T>::allocate(std::size_t n) {
  const std::size_t bytes = ((n * sizeof(T) + 63) / 64) * 64;
  void* p = std::aligned_alloc(64, bytes == 0 ? 64 : bytes);
  if (!p) throw std::bad_alloc();
  return static_cast<T*>(p);
}

template <typename T>
void AlignedAllocator<T>::deallocate(T* p, std::size_t) noexcept {
  std::free(p);
}

template struct AlignedAllocator<cplx>;

// ---------------------------------------------------------------- Grid

struct Grid::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (inverse) fftw_destroy_plan(inverse);
  }
};

std::shared_ptr<const Grid> Grid::make(const GridSpec& spec) { return std::make_shared<Grid>(spec); }

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  spec_.validate();
  const int n = spec_.N;
  mask_.assign(points(), 1);
  if (spec_.dealias == Dealias::TwoThirds) {
    // keep |k_i| <= N/3
    const int cut = n / 3;
    for (std::size_t p = 0; p < points(); ++p) {
      const auto k = mode(p);
      if (std::abs(k[0]) > cut || std::abs(k[1]) > cut || std::abs(k[2]) > cut) mask_[p] = 0;
    }
  }
}

Grid::~Grid() = default;

std::array<int, 3> Grid::mode(std::size_t p) const {
  const std::size_t n = static_cast<std::size_t>(spec_.N);
  const int iz = static_cast<int>(p % n);
  const int iy = static_cast<int>((p / n) % n);
  const int ix = static_cast<int>(p / (n * n));
  return {wavenumber(ix), wavenumber(iy), wavenumber(iz)};
}

Vec3 Grid::xi(std::size_t p) const {
  const auto k = mode(p);
  const double dk = spec_.dk();
  return {dk * k[0], dk * k[1], dk * k[2]};
}

Vec3 Grid::position(std::size_t p) const {
  const std::size_t n = static_cast<std::size_t>(spec_.N);
  const double h = spec_.L / spec_.N;
  return {h * static_cast<double>(p / (n * n)), h * static_cast<double>((p / n) % n),
          h * static_cast<double>(p % n)};
}

std::size_t Grid::index_of_mode(int kx, int ky, int kz) const {
  const int n = spec_.N;
  auto wrap = [n](int k) { return static_cast<std::size_t>(((k % n) + n) % n); };
  return (wrap(kx) * n + wrap(ky)) * n + wrap(kz);
}

const Grid::Plans& Grid::plans(int howmany) const {
  std::lock_guard<std::mutex> lock(plan_mutex_);
  auto it = plans_.find(howmany);
  if (it != plans_.end()) return *it->second;
  auto plans = std::make_unique<Plans>();
  Buffer scratch(points() * static_cast<std::size_t>(howmany));
  int dims[3] = {spec_.N, spec_.N, spec_.N};
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const int dist = static_cast<int>(points());
  const unsigned flags = spec_.N >= 16 ? FFTW_MEASURE : FFTW_ESTIMATE;
  plans->forward = fftw_plan_many_dft(3, dims, howmany, buf, nullptr, 1, dist, buf, nullptr, 1,
                                      dist, FFTW_FORWARD, flags);
  plans->inverse = fftw_plan_many_dft(3, dims, howmany, buf, nullptr, 1, dist, buf, nullptr, 1,
                                      dist, FFTW_BACKWARD, flags);
  auto& ref = *plans;
  plans_.emplace(howmany, std::move(plans));
  return ref;
}

void Grid::forward(cplx* data, int howmany) const {
  const auto& p = plans(howmany);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p.forward, buf, buf);
  const double scale = 1.0 / static_cast<double>(points());
  const std::size_t total = points() * static_cast<std::size_t>(howmany);
  for (std::size_t i = 0; i < total; ++i) data[i] *= scale;
}

void Grid::inverse(cplx* data, int howmany) const {
  const auto& p = plans(howmany);
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_execute_dft(p.inverse, buf, buf);
}

// ---------------------------------------------------------------- Multiplier

Multiplier Multiplier::derivative(int axis) {
  if (axis < 0 || axis > 2) throw StructuralError("derivative axis must be 0, 1 or 2");
  return Multiplier(Kind::Derivative, axis, 0.0);
}

Multiplier Multiplier::riesz(int axis) {
  if (axis < 0 || axis > 2) throw StructuralError("Riesz axis must be 0, 1 or 2");
  return Multiplier(Kind::Riesz, axis, 0.0);
}

Multiplier Multiplier::from_name(const std::string& name) {
  if (name == "id") return identity();
  if (name == "abs") return abs_grad();
  if (name == "invabs") return inv_abs_grad();
  if (name.size() == 2 && name[0] == 'd' && name[1] >= '1' && name[1] <= '3') {
    return derivative(name[1] - '1');
  }
  if (name.size() == 6 && name.rfind("riesz", 0) == 0 && name[5] >= '1' && name[5] <= '3') {
    return riesz(name[5] - '1');
  }
  if (name.rfind("bessel:", 0) == 0) {
    try {
      std::size_t used = 0;
      const double s = std::stod(name.substr(7), &used);
      if (used == name.size() - 7) return bessel(s);
    } catch (const std::exception&) {
    }
  }
  throw StructuralError("unregistered multiplier symbol '" + name + "'");
}

Multiplier Multiplier::reflected() const {
  Multiplier m = *this;
  m.sign_ = -sign_;
  return m;
}

cplx Multiplier::symbol(const Vec3& xi_in) const {
  const Vec3 xi = {sign_ * xi_in[0], sign_ * xi_in[1], sign_ * xi_in[2]};
  const double r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
  const double r = std::sqrt(r2);
  switch (kind_) {
    case Kind::Identity:
      return 1.0;
    case Kind::Derivative:
      return cplx(0.0, xi[axis_]);
    case Kind::AbsGrad:
      return r;
    case Kind::InvAbsGrad:
      return r > 0.0 ? 1.0 / r : 0.0;
    case Kind::Riesz:
      return r > 0.0 ? cplx(0.0, xi[axis_] / r) : cplx(0.0);
    case Kind::Bessel:
      return std::pow(1.0 + r2, 0.5 * power_);
  }
  return 0.0;
}

std::string Multiplier::name() const {
  std::string base;
  switch (kind_) {
    case Kind::Identity: base = "id"; break;
    case Kind::Derivative: base = "d" + std::to_string(axis_ + 1); break;
    case Kind::AbsGrad: base = "abs"; break;
    case Kind::InvAbsGrad: base = "invabs"; break;
    case Kind::Riesz: base = "riesz" + std::to_string(axis_ + 1); break;
    case Kind::Bessel: base = "bessel:" + std::to_string(power_); break;
  }
  return sign_ < 0 ? base + "(-xi)" : base;
}

// ---------------------------------------------------------------- Field

Field Field::scalar(GridPtr grid, Repr repr) {
  Field f;
  f.grid_ = std::move(grid);
  f.entries_ = 1;
  f.repr_ = repr;
  f.data_.assign(f.grid_->points(), cplx(0.0));
  return f;
}

Field Field::algebra(GridPtr grid, const AlgebraKind& kind, Repr repr) {
  Field f;
  f.grid_ = std::move(grid);
  f.kind_ = kind;
  f.entries_ = kind.entries();
  f.repr_ = repr;
  f.data_.assign(f.grid_->points() * static_cast<std::size_t>(f.entries_), cplx(0.0));
  return f;
}

Field Field::zeros_like() const {
  return kind_ ? algebra(grid_, *kind_, repr_) : scalar(grid_, repr_);
}

const AlgebraKind& Field::kind() const {
  if (!kind_) throw StructuralError("scalar field has no algebra kind");
  return *kind_;
}

Field& Field::to_spectral() {
  if (repr_ == Repr::Physical) {
    grid_->forward(data_.data(), entries_);
    repr_ = Repr::Spectral;
  }
  return *this;
}

Field& Field::to_physical() {
  if (repr_ == Repr::Spectral) {
    grid_->inverse(data_.data(), entries_);
    repr_ = Repr::Physical;
  }
  return *this;
}

Field Field::spectral() const {
  Field f = *this;
  return std::move(f.to_spectral());
}

Field Field::physical() const {
  Field f = *this;
  return std::move(f.to_physical());
}

Field& Field::dealias() {
  if (grid_->spec().dealias == Dealias::None) return *this;
  if (repr_ != Repr::Spectral) throw StructuralError("dealias requires a spectral field");
  const std::size_t np = points();
  for (int e = 0; e < entries_; ++e) {
    cplx* b = block(e);
    for (std::size_t p = 0; p < np; ++p) {
      if (!grid_->kept(p)) b[p] = 0.0;
    }
  }
  return *this;
}

Matrix Field::matrix_at(std::size_t p) const {
  const int n = matrix_n();
  Matrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = block(i * n + j)[p];
  return m;
}

void Field::set_matrix(std::size_t p, const Matrix& m) {
  const int n = matrix_n();
  if (m.rows() != n || m.cols() != n) throw StructuralError("matrix size mismatch in set_matrix");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) block(i * n + j)[p] = m(i, j);
}

bool Field::compatible(const Field& o) const {
  if (!grid_ || !o.grid_) return false;
  if (!(grid_ == o.grid_ || grid_->spec() == o.grid_->spec())) return false;
  if (entries_ != o.entries_) return false;
  if (kind_.has_value() != o.kind_.has_value()) return false;
  return !kind_ || *kind_ == *o.kind_;
}

static void require_compatible(const Field& a, const Field& b, const char* what) {
  if (!a.compatible(b)) throw StructuralError(std::string("incompatible fields in ") + what);
}

Field& Field::axpy(cplx a, const Field& x) {
  require_compatible(*this, x, "axpy");
  if (x.repr_ != repr_) {
    Field y = repr_ == Repr::Spectral ? x.spectral() : x.physical();
    return axpy(a, y);
  }
  const std::size_t n = data_.size();
  const cplx* src = x.data_.data();
  cplx* dst = data_.data();
  for (std::size_t i = 0; i < n; ++i) dst[i] += a * src[i];
  return *this;
}

Field& Field::operator+=(const Field& o) { return axpy(1.0, o); }
Field& Field::operator-=(const Field& o) { return axpy(-1.0, o); }

Field& Field::operator*=(cplx c) {
  for (auto& v : data_) v *= c;
  return *this;
}

Field Field::operator-() const {
  Field f = *this;
  f *= -1.0;
  return f;
}

Field operator+(Field a, const Field& b) { return std::move(a += b); }
Field operator-(Field a, const Field& b) { return std::move(a -= b); }
Field operator*(cplx c, Field a) { return std::move(a *= c); }

// ---------------------------------------------------------------- operations

const std::vector<cplx>& Grid::symbol_table(const Multiplier& m) const {
  std::lock_guard<std::mutex> lock(symbol_mutex_);
  char exact[48];
  std::snprintf(exact, sizeof exact, "#%a", m.power());
  auto& slot = symbols_[m.name() + exact];
  if (!slot) {
    auto sym = std::make_unique<std::vector<cplx>>(points());
    const int nyq = -N() / 2;
    for (std::size_t p = 0; p < points(); ++p) {
      if (m.odd() && mode(p)[static_cast<std::size_t>(m.axis())] == nyq) {
        (*sym)[p] = 0.0;
      } else {
        (*sym)[p] = m.symbol(xi(p));
      }
    }
    slot = std::move(sym);
  }
  return *slot;
}

Field apply(const Field& u, const Multiplier& m) {
  Field out = u.spectral();
  const std::vector<cplx>& sym = u.grid()->symbol_table(m);
  const std::size_t np = sym.size();
  for (int e = 0; e < out.entries(); ++e) {
    cplx* b = out.block(e);
    for (std::size_t p = 0; p < np; ++p) b[p] *= sym[p];
  }
  return out;
}

namespace {

template <int n>
void commutator_kernel(Field& acc, cplx coeff, const Field& x, const Field& y) {
  const std::size_t np = x.points();
  const cplx* xb[n * n];
  const cplx* yb[n * n];
  cplx* ab[n * n];
  for (int e = 0; e < n * n; ++e) {
    xb[e] = x.block(e);
    yb[e] = y.block(e);
    ab[e] = acc.block(e);
  }
  for (std::size_t p = 0; p < np; ++p) {
    cplx X[n * n], Y[n * n];
    for (int e = 0; e < n * n; ++e) {
      X[e] = xb[e][p];
      Y[e] = yb[e][p];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cplx s = 0.0;
        for (int k = 0; k < n; ++k) s += X[i * n + k] * Y[k * n + j] - Y[i * n + k] * X[k * n + j];
        ab[i * n + j][p] += coeff * s;
      }
    }
  }
}

// 2x2 case: [X, Y] is traceless, so three entries need six products.
void commutator_kernel2(Field& acc, cplx coeff, const Field& x, const Field& y) {
  const std::size_t np = x.points();
  const cplx *x0 = x.block(0), *x1 = x.block(1), *x2 = x.block(2), *x3 = x.block(3);
  const cplx *y0 = y.block(0), *y1 = y.block(1), *y2 = y.block(2), *y3 = y.block(3);
  cplx *a0 = acc.block(0), *a1 = acc.block(1), *a2 = acc.block(2), *a3 = acc.block(3);
  for (std::size_t p = 0; p < np; ++p) {
    const cplx dx = x3[p] - x0[p], dy = y3[p] - y0[p];
    const cplx c00 = coeff * (x1[p] * y2[p] - y1[p] * x2[p]);
    const cplx c01 = coeff * (x1[p] * dy - y1[p] * dx);
    const cplx c10 = coeff * (y2[p] * dx - x2[p] * dy);
    a0[p] += c00;
    a1[p] += c01;
    a2[p] += c10;
    a3[p] -= c00;
  }
}

void commutator_generic(Field& acc, cplx coeff, const Field& x, const Field& y) {
  const std::size_t np = x.points();
  for (std::size_t p = 0; p < np; ++p) {
    const Matrix X = x.matrix_at(p);
    const Matrix Y = y.matrix_at(p);
    const Matrix c = coeff * (X * Y - Y * X);
    const int n = x.matrix_n();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) acc.block(i * n + j)[p] += c(i, j);
  }
}

void require_physical(const Field& f, const char* what) {
  if (f.repr() != Repr::Physical) throw StructuralError(std::string(what) + " requires physical fields");
}

}  // namespace

void add_commutator(Field& acc, cplx coeff, const Field& x, const Field& y) {
  require_compatible(x, y, "commutator");
  require_compatible(acc, x, "commutator accumulation");
  if (x.is_scalar()) throw StructuralError("commutator of scalar fields");
  require_physical(x, "add_commutator");
  require_physical(y, "add_commutator");
  require_physical(acc, "add_commutator");
  switch (x.matrix_n()) {
    case 2: commutator_kernel2(acc, coeff, x, y); break;
    case 3: commutator_kernel<3>(acc, coeff, x, y); break;
    default: commutator_generic(acc, coeff, x, y); break;
  }
}

void add_product(Field& acc, cplx coeff, const Field& x, const Field& y, ProductOp op) {
  if (op == ProductOp::Commutator) {
    add_commutator(acc, coeff, x, y);
    return;
  }
  require_physical(x, "add_product");
  require_physical(y, "add_product");
  require_physical(acc, "add_product");
  const std::size_t np = x.points();
  if (!(x.grid()->spec() == y.grid()->spec())) throw StructuralError("grid mismatch in product");
  switch (op) {
    case ProductOp::Scalar: {
      const Field& s = x.is_scalar() ? x : y;
      const Field& m = x.is_scalar() ? y : x;
      if (!s.is_scalar()) throw StructuralError("scalar product needs a scalar factor");
      if (acc.entries() != m.entries()) throw StructuralError("accumulator shape mismatch");
      for (int e = 0; e < m.entries(); ++e) {
        const cplx* sb = s.block(0);
        const cplx* mb = m.block(e);
        cplx* ab = acc.block(e);
        for (std::size_t p = 0; p < np; ++p) ab[p] += coeff * sb[p] * mb[p];
      }
      break;
    }
    case ProductOp::Matrix: {
      require_compatible(x, y, "matrix product");
      require_compatible(acc, x, "matrix product accumulation");
      const int n = x.matrix_n();
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          cplx* ab = acc.block(i * n + j);
          for (int k = 0; k < n; ++k) {
            const cplx* xb = x.block(i * n + k);
            const cplx* yb = y.block(k * n + j);
            for (std::size_t p = 0; p < np; ++p) ab[p] += coeff * xb[p] * yb[p];
          }
        }
      break;
    }
    case ProductOp::Inner: {
      require_compatible(x, y, "inner product");
      if (!acc.is_scalar()) throw StructuralError("inner product accumulates into a scalar field");
      cplx* ab = acc.block(0);
      for (int e = 0; e < x.entries(); ++e) {
        const cplx* xb = x.block(e);
        const cplx* yb = y.block(e);
        for (std::size_t p = 0; p < np; ++p) ab[p] += coeff * xb[p] * std::conj(yb[p]);
      }
      break;
    }
    case ProductOp::Commutator:
      break;
  }
}

Field pointwise_product(const Field& u, const Field& v, ProductOp op) {
  if (!(u.grid()->spec() == v.grid()->spec())) throw StructuralError("grid mismatch in pointwise_product");
  const Field up = u.physical();
  const Field vp = v.physical();
  Field out;
  switch (op) {
    case ProductOp::Scalar:
      out = up.is_scalar() ? vp.zeros_like() : up.zeros_like();
      break;
    case ProductOp::Inner:
      out = Field::scalar(u.grid());
      break;
    default:
      out = up.zeros_like();
      break;
  }
  add_product(out, 1.0, up, vp, op);
  out.to_spectral();
  out.dealias();
  return out;
}

Field commutator(const Field& u, const Field& v) {
  return pointwise_product(u, v, ProductOp::Commutator);
}

double sobolev_norm(const Field& u, double s) {
  const Field c = u.spectral();
  const Grid& g = *u.grid();
  double sum = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    double m2 = 0.0;
    for (int e = 0; e < c.entries(); ++e) m2 += std::norm(c.block(e)[p]);
    if (m2 == 0.0) continue;
    const Vec3 xi = g.xi(p);
    const double w = 1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    sum += std::pow(w, s) * m2;
  }
  return std::sqrt(g.volume() * sum);
}

double l2_norm(const Field& u) {
  const Field ph = u.physical();
  double sum = 0.0;
  for (std::size_t i = 0; i < ph.size(); ++i) sum += std::norm(ph.data()[i]);
  return std::sqrt(sum * u.grid()->volume() / static_cast<double>(u.points()));
}

cplx integrate(const Field& u) {
  if (!u.is_scalar()) throw StructuralError("integrate expects a scalar field");
  const Field ph = u.physical();
  cplx sum = 0.0;
  for (std::size_t p = 0; p < ph.points(); ++p) sum += ph.block(0)[p];
  return sum * u.grid()->volume() / static_cast<double>(u.points());
}

Field random_field(GridPtr grid, const std::optional<AlgebraKind>& kind, std::uint64_t seed,
                   int band, double amplitude, bool mean_zero) {
  Field f = kind ? Field::algebra(grid, *kind, Repr::Spectral) : Field::scalar(grid, Repr::Spectral);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Grid& g = *grid;
  for (int kx = -band; kx <= band; ++kx)
    for (int ky = -band; ky <= band; ++ky)
      for (int kz = -band; kz <= band; ++kz) {
        if (mean_zero && kx == 0 && ky == 0 && kz == 0) continue;
        const std::size_t p = g.index_of_mode(kx, ky, kz);
        for (int e = 0; e < f.entries(); ++e) {
          const double re = gauss(rng);
          const double im = gauss(rng);
          f.block(e)[p] = amplitude * cplx(re, im);
        }
      }
  f.to_physical();
  if (!kind) {
    for (std::size_t p = 0; p < f.points(); ++p) f.block(0)[p] = f.block(0)[p].real();
  } else {
    for (std::size_t p = 0; p < f.points(); ++p) f.set_matrix(p, project_to_algebra(*kind, f.matrix_at(p)));
  }
  return f;
}

double closure_residual(const Field& u) {
  const Field ph = u.physical();
  const AlgebraKind& kind = u.kind();
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t p = 0; p < ph.points(); ++p) {
    const Matrix m = ph.matrix_at(p);
    scale = std::max(scale, m.norm());
    worst = std::max(worst, (m - project_to_algebra(kind, m)).norm());
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

double spectral_tail(const Field& u, int band) {
  const Field c = u.spectral();
  const Grid& g = *u.grid();
  double worst = 0.0;
  for (std::size_t p = 0; p < g.points(); ++p) {
    const auto k = g.mode(p);
    if (std::abs(k[0]) <= band && std::abs(k[1]) <= band && std::abs(k[2]) <= band) continue;
    for (int e = 0; e < c.entries(); ++e) worst = std::max(worst, std::abs(c.block(e)[p]));
  }
  return worst;
}

}  // namespace ymh

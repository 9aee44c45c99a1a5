#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ymh/algebra.hpp"

namespace ymh {

inline constexpr double kPi = 3.14159265358979323846;

enum class Dealias { None, TwoThirds };
enum class Repr { Physical, Spectral };

/// Periodic box [0, L)^3 sampled with N points per axis.
struct GridSpec {
  int N = 32;
  double L = 2.0 * kPi;
  Dealias dealias = Dealias::TwoThirds;

  std::size_t points() const { return static_cast<std::size_t>(N) * N * N; }
  double dk() const { return 2.0 * kPi / L; }
  void validate() const;

  bool operator==(const GridSpec&) const = default;
};

using Vec3 = std::array<double, 3>;

template <typename T>
struct AlignedAllocator {
  using value_type = T;
  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}
  T* allocate(std::size_t n);
  void deallocate(T* p, std::size_t) noexcept;
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const { return true; }
};

using Buffer = std::vector<cplx, AlignedAllocator<cplx>>;

/// Shared, immutable grid: wavenumber tables, dealias mask and cached FFT
/// plans. Coefficients are normalized so that u(x) = sum_k c_k e^{i k.x}.
class Grid {
 public:
  static std::shared_ptr<const Grid> make(const GridSpec& spec);
  explicit Grid(const GridSpec& spec);
  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  const GridSpec& spec() const { return spec_; }
  int N() const { return spec_.N; }
  std::size_t points() const { return spec_.points(); }
  double volume() const { return spec_.L * spec_.L * spec_.L; }

  /// Signed integer wavenumber of FFT index i, in [-N/2, N/2).
  int wavenumber(int i) const { return i < spec_.N / 2 ? i : i - spec_.N; }
  std::array<int, 3> mode(std::size_t p) const;
  Vec3 xi(std::size_t p) const;
  Vec3 position(std::size_t p) const;
  std::size_t index_of_mode(int kx, int ky, int kz) const;

  /// True if the mode survives the dealias rule of this grid.
  bool kept(std::size_t p) const { return mask_[p] != 0; }

  void forward(cplx* data, int howmany) const;
  void inverse(cplx* data, int howmany) const;

  /// Cached symbol of `m` on every grid point, Nyquist rule applied.
  const std::vector<cplx>& symbol_table(const class Multiplier& m) const;

 private:
  struct Plans;
  const Plans& plans(int howmany) const;

  GridSpec spec_;
  std::vector<std::uint8_t> mask_;
  mutable std::mutex plan_mutex_;
  mutable std::map<int, std::unique_ptr<Plans>> plans_;
  mutable std::mutex symbol_mutex_;
  mutable std::map<std::string, std::unique_ptr<std::vector<cplx>>> symbols_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Registered scalar Fourier multipliers.
class Multiplier {
 public:
  enum class Kind { Identity, Derivative, AbsGrad, InvAbsGrad, Riesz, Bessel };

  static Multiplier identity() { return Multiplier(Kind::Identity, 0, 0.0); }
  /// d/dx_axis, symbol i xi_axis.
  static Multiplier derivative(int axis);
  /// |grad|, symbol |xi|.
  static Multiplier abs_grad() { return Multiplier(Kind::AbsGrad, 0, 0.0); }
  /// |grad|^{-1}; the zero mode maps to 0.
  static Multiplier inv_abs_grad() { return Multiplier(Kind::InvAbsGrad, 0, 0.0); }
  /// R_axis = |grad|^{-1} d/dx_axis, symbol i xi_axis/|xi|; zero mode maps to 0.
  static Multiplier riesz(int axis);
  /// <grad>^s, symbol (1+|xi|^2)^{s/2}.
  static Multiplier bessel(double s) { return Multiplier(Kind::Bessel, 0, s); }

  /// Parses "id", "d1".."d3", "abs", "invabs", "riesz1".."riesz3",
  /// "bessel:<s>". Anything else is a StructuralError.
  static Multiplier from_name(const std::string& name);

  /// Same multiplier evaluated at -xi.
  Multiplier reflected() const;

  cplx symbol(const Vec3& xi) const;
  bool odd() const { return kind_ == Kind::Derivative || kind_ == Kind::Riesz; }
  Kind kind() const { return kind_; }
  int axis() const { return axis_; }
  double power() const { return power_; }
  std::string name() const;

 private:
  Multiplier(Kind kind, int axis, double power) : kind_(kind), axis_(axis), power_(power) {}
  Kind kind_;
  int axis_;
  double power_;
  double sign_ = 1.0;
};

/// A scalar or Lie-algebra valued function on the grid. Matrix-valued fields
/// store n*n entry blocks of N^3 complex values each; scalars one block.
class Field {
 public:
  Field() = default;
  static Field scalar(GridPtr grid, Repr repr = Repr::Physical);
  static Field algebra(GridPtr grid, const AlgebraKind& kind, Repr repr = Repr::Physical);

  Field zeros_like() const;

  bool empty() const { return !grid_; }
  bool is_scalar() const { return !kind_.has_value(); }
  const AlgebraKind& kind() const;
  int entries() const { return entries_; }
  int matrix_n() const { return kind_ ? kind_->n : 1; }
  std::size_t points() const { return grid_->points(); }
  const GridPtr& grid() const { return grid_; }
  Repr repr() const { return repr_; }

  cplx* block(int e) { return data_.data() + static_cast<std::size_t>(e) * points(); }
  const cplx* block(int e) const { return data_.data() + static_cast<std::size_t>(e) * points(); }
  cplx* data() { return data_.data(); }
  const cplx* data() const { return data_.data(); }
  std::size_t size() const { return data_.size(); }

  Field& to_spectral();
  Field& to_physical();
  Field spectral() const;
  Field physical() const;

  /// Zeroes every mode removed by the grid's dealias rule (spectral only).
  Field& dealias();

  Matrix matrix_at(std::size_t p) const;
  void set_matrix(std::size_t p, const Matrix& m);

  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(cplx c);
  Field& axpy(cplx a, const Field& x);
  Field operator-() const;

  bool compatible(const Field& o) const;

 private:
  GridPtr grid_;
  std::optional<AlgebraKind> kind_;
  int entries_ = 0;
  Repr repr_ = Repr::Physical;
  Buffer data_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(cplx c, Field a);

/// Applies a registered multiplier componentwise; result is spectral. Odd
/// symbols vanish on the Nyquist plane of their axis so real input stays real.
Field apply(const Field& u, const Multiplier& m);

enum class ProductOp {
  Scalar,      ///< scalar*scalar or scalar*matrix entrywise
  Commutator,  ///< [X, Y]
  Matrix,      ///< X Y
  Inner,       ///< sum_ij X_ij conj(Y_ij), scalar result
};

/// Pointwise bilinear map followed by the grid's dealias rule. Spectral result.
Field pointwise_product(const Field& u, const Field& v, ProductOp op);
Field commutator(const Field& u, const Field& v);

/// Undealiased accumulation kernels for hot loops; all arguments physical.
void add_commutator(Field& acc, cplx coeff, const Field& x, const Field& y);
void add_product(Field& acc, cplx coeff, const Field& x, const Field& y, ProductOp op);

/// H^s norm: (L^3 sum <xi>^{2s} |c_xi|^2)^{1/2}, pointwise modulus from the
/// algebra inner product.
double sobolev_norm(const Field& u, double s);
/// L^2 norm by physical-space quadrature.
double l2_norm(const Field& u);
/// Quadrature of a physical scalar field.
cplx integrate(const Field& u);

/// Random field with modes |k_i| <= band, Gaussian coefficients of size
/// `amplitude`, projected pointwise onto the algebra (real for scalars).
Field random_field(GridPtr grid, const std::optional<AlgebraKind>& kind, std::uint64_t seed,
                   int band, double amplitude, bool mean_zero);

/// Largest pointwise closure residual of a physical algebra field, relative
/// to the field's maximum entry.
double closure_residual(const Field& u);

/// Maximum spectral coefficient modulus outside |k_i| <= band.
double spectral_tail(const Field& u, int band);

}  // namespace ymh

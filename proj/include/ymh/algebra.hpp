#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ymh {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

/// Raised when two objects with incompatible structure meet (kind mismatch,
/// grid mismatch, unregistered symbol, invalid index).
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for user-facing configuration problems.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { SO, SU };

struct AlgebraKind {
  Family family = Family::SU;
  int n = 2;

  static AlgebraKind su(int n) { return {Family::SU, n}; }
  static AlgebraKind so(int n) { return {Family::SO, n}; }

  /// Real dimension of the algebra: n(n-1)/2 for so(n), n^2-1 for su(n).
  int dimension() const;
  int entries() const { return n * n; }
  bool abelian() const { return dimension() <= 1; }
  std::string name() const;

  bool operator==(const AlgebraKind&) const = default;
};

/// Orthogonal projection of an arbitrary complex matrix onto the algebra:
/// real antisymmetric part for so(n), traceless anti-hermitian part for su(n).
Matrix project_to_algebra(const AlgebraKind& kind, const Matrix& m);

/// Distance of m from the algebra, relative to max(|m|, 1e-300).
double closure_residual(const AlgebraKind& kind, const Matrix& m);

/// Positive definite invariant form Re Tr(X Y^*); for real skew matrices this
/// is Tr(X Y^T).
double matrix_inner(const Matrix& x, const Matrix& y);

/// One element of so(n) or su(n). The closure invariant holds for every
/// constructed value.
class AlgebraElement {
 public:
  explicit AlgebraElement(const AlgebraKind& kind);
  /// Projects `m` onto the algebra.
  AlgebraElement(const AlgebraKind& kind, const Matrix& m);

  const AlgebraKind& kind() const { return kind_; }
  const Matrix& matrix() const { return m_; }

  double norm() const;

  AlgebraElement operator+(const AlgebraElement& o) const;
  AlgebraElement operator-(const AlgebraElement& o) const;
  AlgebraElement operator-() const;
  AlgebraElement operator*(double c) const;

 private:
  struct Unchecked {};
  AlgebraElement(const AlgebraKind& kind, Matrix m, Unchecked);

  AlgebraKind kind_;
  Matrix m_;

  friend AlgebraElement commutator(const AlgebraElement&, const AlgebraElement&);
};

/// [X, Y] = XY - YX. The raw product is kept; no re-projection.
AlgebraElement commutator(const AlgebraElement& x, const AlgebraElement& y);

double inner(const AlgebraElement& x, const AlgebraElement& y);

/// Deterministic pseudo-random element with Gaussian entries of size `scale`.
AlgebraElement random_element(const AlgebraKind& kind, std::uint64_t seed, double scale);

/// An orthonormal basis of the algebra with respect to `inner`.
std::vector<AlgebraElement> orthonormal_basis(const AlgebraKind& kind);

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
Matrix expm(const Matrix& m);

}  // namespace ymh

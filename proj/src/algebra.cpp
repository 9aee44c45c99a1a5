#include "ymh/algebra.hpp"

#include <cmath>
#include <random>

namespace ymh {

int AlgebraKind::dimension() const {
  return family == Family::SO ? n * (n - 1) / 2 : n * n - 1;
}

std::string AlgebraKind::name() const {
  return (family == Family::SO ? "so(" : "su(") + std::to_string(n) + ")";
}

Matrix project_to_algebra(const AlgebraKind& kind, const Matrix& m) {
  if (m.rows() != kind.n || m.cols() != kind.n) {
    throw StructuralError("matrix size does not match " + kind.name());
  }
  if (kind.family == Family::SO) {
    Eigen::MatrixXd re = m.real();
    Eigen::MatrixXd skew = 0.5 * (re - re.transpose());
    return skew.cast<cplx>();
  }
  Matrix skew = 0.5 * (m - m.adjoint());
  const cplx tr = skew.trace() / static_cast<double>(kind.n);
  skew.diagonal().array() -= tr;
  return skew;
}

double closure_residual(const AlgebraKind& kind, const Matrix& m) {
  const double scale = std::max(m.norm(), 1e-300);
  return (m - project_to_algebra(kind, m)).norm() / scale;
}

double matrix_inner(const Matrix& x, const Matrix& y) {
  return (x.array() * y.array().conjugate()).sum().real();
}

AlgebraElement::AlgebraElement(const AlgebraKind& kind)
    : kind_(kind), m_(Matrix::Zero(kind.n, kind.n)) {
  if (kind.n < 1) throw StructuralError("algebra dimension n must be positive");
}

AlgebraElement::AlgebraElement(const AlgebraKind& kind, const Matrix& m)
    : kind_(kind), m_(project_to_algebra(kind, m)) {}

AlgebraElement::AlgebraElement(const AlgebraKind& kind, Matrix m, Unchecked)
    : kind_(kind), m_(std::move(m)) {}

double AlgebraElement::norm() const { return std::sqrt(matrix_inner(m_, m_)); }

static void require_same(const AlgebraKind& a, const AlgebraKind& b) {
  if (!(a == b)) throw StructuralError("algebra kind mismatch: " + a.name() + " vs " + b.name());
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const {
  require_same(kind_, o.kind_);
  return AlgebraElement(kind_, m_ + o.m_, Unchecked{});
}

AlgebraElement AlgebraElement::operator-(const AlgebraElement& o) const {
  require_same(kind_, o.kind_);
  return AlgebraElement(kind_, m_ - o.m_, Unchecked{});
}

AlgebraElement AlgebraElement::operator-() const { return AlgebraElement(kind_, -m_, Unchecked{}); }

AlgebraElement AlgebraElement::operator*(double c) const {
  return AlgebraElement(kind_, c * m_, Unchecked{});
}

AlgebraElement commutator(const AlgebraElement& x, const AlgebraElement& y) {
  require_same(x.kind_, y.kind_);
  return AlgebraElement(x.kind_, x.m_ * y.m_ - y.m_ * x.m_, AlgebraElement::Unchecked{});
}

double inner(const AlgebraElement& x, const AlgebraElement& y) {
  require_same(x.kind(), y.kind());
  return matrix_inner(x.matrix(), y.matrix());
}

AlgebraElement random_element(const AlgebraKind& kind, std::uint64_t seed, double scale) {
  if (scale < 0.0) throw std::invalid_argument("random_element: scale must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix m(kind.n, kind.n);
  for (int i = 0; i < kind.n; ++i) {
    for (int j = 0; j < kind.n; ++j) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      m(i, j) = scale * cplx(re, im);
    }
  }
  return AlgebraElement(kind, m);
}

std::vector<AlgebraElement> orthonormal_basis(const AlgebraKind& kind) {
  const int n = kind.n;
  std::vector<AlgebraElement> out;
  const double r2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      Matrix m = Matrix::Zero(n, n);
      m(j, k) = r2;
      m(k, j) = -r2;
      out.emplace_back(kind, m);
      if (kind.family == Family::SU) {
        Matrix s = Matrix::Zero(n, n);
        s(j, k) = cplx(0, r2);
        s(k, j) = cplx(0, r2);
        out.emplace_back(kind, s);
      }
    }
  }
  if (kind.family == Family::SU) {
    // i * diag(1,...,1,-l,0,...) normalized, l = 1..n-1
    for (int l = 1; l < n; ++l) {
      Matrix d = Matrix::Zero(n, n);
      const double c = 1.0 / std::sqrt(static_cast<double>(l * (l + 1)));
      for (int j = 0; j < l; ++j) d(j, j) = cplx(0, c);
      d(l, l) = cplx(0, -l * c);
      out.emplace_back(kind, d);
    }
  }
  return out;
}

Matrix expm(const Matrix& m) {
  const Eigen::Index n = m.rows();
  const double norm1 = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > 0.25) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.25)));
  const Matrix a = m / std::ldexp(1.0, squarings);

  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.norm() < 1e-18 * result.norm()) break;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

}  // namespace ymh

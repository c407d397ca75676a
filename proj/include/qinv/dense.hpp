#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "qinv/errors.hpp"

namespace qinv {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

template <class Scalar>
using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Shared tolerance policy. A scalar x is numerically zero relative to a
/// scale s iff |x| <= abs_eps + rel_eps * s. Exactly one instance governs a
/// computation; it is passed down explicitly, never read from global state.
struct Tolerance {
  double abs_eps = 1e-10;
  double rel_eps = 1e-10;

  double bound(double scale) const { return abs_eps + rel_eps * scale; }
  bool zero(double x, double scale) const { return std::abs(x) <= bound(scale); }
};

// ---------------------------------------------------------------------------
// Expression-friendly helpers. vec is column-stacking throughout the project:
// vec(A X B) = kron(B.transpose(), A) * vec(X). Every superoperator encoding
// in the repository relies on this one convention.
// ---------------------------------------------------------------------------

template <class DerivedA, class DerivedB>
Dense<typename DerivedA::Scalar> kron(const Eigen::MatrixBase<DerivedA>& a,
                                      const Eigen::MatrixBase<DerivedB>& b) {
  Dense<typename DerivedA::Scalar> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <class Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> vec(
    const Eigen::MatrixBase<Derived>& m) {
  return m.reshaped();
}

inline Matrix unvec(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw PreconditionError("unvec: size mismatch");
  return v.reshaped(rows, cols);
}

inline Matrix unvec(const Vector& v) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(v.size()))));
  return unvec(v, n, n);
}

/// Hilbert-Schmidt inner product tr(a* b).
template <class DerivedA, class DerivedB>
Complex hs_inner(const Eigen::MatrixBase<DerivedA>& a,
                 const Eigen::MatrixBase<DerivedB>& b) {
  return a.conjugate().cwiseProduct(b).sum();
}

template <class DerivedA, class DerivedB>
Matrix commutator(const Eigen::MatrixBase<DerivedA>& a,
                  const Eigen::MatrixBase<DerivedB>& b) {
  return a * b - b * a;
}

template <class DerivedA, class DerivedB>
Matrix anticommutator(const Eigen::MatrixBase<DerivedA>& a,
                      const Eigen::MatrixBase<DerivedB>& b) {
  return a * b + b * a;
}

inline double hermitian_defect(const Matrix& a) {
  return (a - a.adjoint()).norm();
}

inline bool is_hermitian(const Matrix& a, const Tolerance& tol) {
  return a.rows() == a.cols() && tol.zero(hermitian_defect(a), a.norm());
}

/// (m + m*)/2, used to suppress roundoff asymmetry before spectral calls.
inline Matrix hermitize(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

// ---------------------------------------------------------------------------
// Solver-backed kernels (dense.cpp).
// ---------------------------------------------------------------------------

struct HermitianEig {
  RealVector values;  // ascending
  Matrix vectors;     // unitary, columns match values
};

/// Eigendecomposition of a Hermitian matrix; throws PreconditionError naming
/// the Frobenius distance to the Hermitian cone if the input is not
/// Hermitian within tolerance.
HermitianEig eig_hermitian(const Matrix& a, const Tolerance& tol);

struct LstsqResult {
  Matrix x;
  double residual;  // ||a x - b||_F
};

/// Minimum-norm least-squares solution of a x = b (any shape, any rank).
LstsqResult lstsq_min_norm(const Matrix& a, const Matrix& b);

/// Orthonormal basis of the (numerical) kernel of a; column count equals
/// cols - rank, with rank decided against rel_eps times the largest
/// singular value.
Matrix nullspace(const Matrix& a, const Tolerance& tol);

/// Orthonormal basis (as columns) of the span of the given columns.
Matrix column_span(const Matrix& cols, const Tolerance& tol);

/// True iff the minimum eigenvalue is >= -(abs_eps + rel_eps * ||a||), with
/// ||a|| the spectral norm. Hermitian input required.
bool is_psd(const Matrix& a, const Tolerance& tol);

/// Matrix exponential. Normal inputs go through a Schur (spectral) route,
/// everything else through scaling-and-squaring with a Pade approximant.
Matrix expm(const Matrix& a);

}  // namespace qinv

#include "qinv/dense.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include <sstream>

namespace qinv {

HermitianEig eig_hermitian(const Matrix& a, const Tolerance& tol) {
  if (a.rows() != a.cols()) throw PreconditionError("eig_hermitian: matrix not square");
  const double defect = hermitian_defect(a);
  if (!tol.zero(defect, a.norm())) {
    std::ostringstream msg;
    msg << "eig_hermitian: input is not Hermitian, ||a - a*||_F = " << defect;
    throw PreconditionError(msg.str());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitize(a));
  if (solver.info() != Eigen::Success)
    throw NumericalFault("eig_hermitian: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

LstsqResult lstsq_min_norm(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw PreconditionError("lstsq_min_norm: row count mismatch");
  if (a.size() == 0 || a.norm() == 0.0) {
    // Zero (or empty) operator: the minimizer of ||0 x - b|| with least norm.
    return {Matrix::Zero(a.cols(), b.cols()), b.norm()};
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(a);
  Matrix x = cod.solve(b);
  return {x, (a * x - b).norm()};
}

Matrix nullspace(const Matrix& a, const Tolerance& tol) {
  if (a.rows() == 0 || a.cols() == 0) return Matrix::Identity(a.cols(), a.cols());
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double thr = tol.bound(sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > thr) ++rank;
  return svd.matrixV().rightCols(a.cols() - rank);
}

Matrix column_span(const Matrix& cols, const Tolerance& tol) {
  if (cols.cols() == 0) return Matrix(cols.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double thr = tol.bound(sv.size() > 0 ? sv(0) : 0.0);
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) > thr) ++rank;
  return svd.matrixU().leftCols(rank);
}

bool is_psd(const Matrix& a, const Tolerance& tol) {
  const auto eig = eig_hermitian(a, tol);
  if (eig.values.size() == 0) return true;
  const double scale = eig.values.cwiseAbs().maxCoeff();
  return eig.values.minCoeff() >= -tol.bound(scale);
}

namespace {

bool is_normal(const Matrix& a) {
  const double n2 = a.squaredNorm();
  if (n2 == 0.0) return true;
  return (a * a.adjoint() - a.adjoint() * a).norm() <= 1e-13 * n2;
}

}  // namespace

Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw PreconditionError("expm: matrix not square");
  if (a.rows() == 0) return a;
  if (is_normal(a)) {
    // Spectral route: for normal a the Schur form is diagonal.
    Eigen::ComplexSchur<Matrix> schur(a);
    if (schur.info() == Eigen::Success) {
      const Matrix& u = schur.matrixU();
      Vector d = schur.matrixT().diagonal().array().exp();
      return u * d.asDiagonal() * u.adjoint();
    }
  }
  return a.exp();
}

}  // namespace qinv

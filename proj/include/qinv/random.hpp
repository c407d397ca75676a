#pragma once

#include <random>

#include "qinv/dense.hpp"

namespace qinv {

/// Standard complex Gaussian (Ginibre) matrix.
inline Matrix randn_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = Complex(dist(rng), dist(rng));
  return m;
}

inline Matrix random_hermitian(Eigen::Index n, std::mt19937_64& rng) {
  return hermitize(randn_complex(n, n, rng));
}

inline Matrix random_psd(Eigen::Index n, std::mt19937_64& rng) {
  Matrix g = randn_complex(n, n, rng);
  return g * g.adjoint();
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the R diagonal
/// phases absorbed into Q.
inline Matrix random_unitary(Eigen::Index n, std::mt19937_64& rng) {
  Matrix g = randn_complex(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    Complex d = r(i, i);
    q.col(i) *= (d == Complex(0) ? Complex(1) : d / std::abs(d));
  }
  return q;
}

inline Matrix random_permutation(Eigen::Index n, std::mt19937_64& rng) {
  std::vector<Eigen::Index> p(n);
  for (Eigen::Index i = 0; i < n; ++i) p[i] = i;
  std::shuffle(p.begin(), p.end(), rng);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) m(p[j], j) = 1.0;
  return m;
}

inline Matrix random_diagonal(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = Complex(dist(rng), dist(rng));
  return m;
}

/// Density matrix (PSD, unit trace).
inline Matrix random_state(Eigen::Index n, std::mt19937_64& rng) {
  Matrix rho = random_psd(n, rng);
  return rho / rho.trace().real();
}

}  // namespace qinv

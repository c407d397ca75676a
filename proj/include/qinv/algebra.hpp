#pragma once

#include <cstdint>
#include <vector>

#include "qinv/dense.hpp"

namespace qinv {

/// A unital *-subalgebra of the n x n matrices, stored as a
/// Hilbert-Schmidt-orthonormal basis of its linear span. Membership and
/// equality questions are projection-distance tests against that basis.
class StarAlgebra {
 public:
  /// Smallest unital, *-closed, product-closed span containing the
  /// generators. Terminates because the dimension is bounded by n^2 and
  /// strictly increases each round.
  static StarAlgebra span_closure(const std::vector<Matrix>& generators, Eigen::Index n,
                                  const Tolerance& tol);

  static StarAlgebra full(Eigen::Index n);
  static StarAlgebra scalars(Eigen::Index n);

  /// Block-diagonal algebra with the given block sizes (sum = n), e.g.
  /// {2, 1} gives M2 + M1 inside M3.
  static StarAlgebra block_diagonal(const std::vector<Eigen::Index>& blocks,
                                    const Tolerance& tol);

  Eigen::Index ambient_dim() const { return n_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  const std::vector<Matrix>& basis() const { return basis_; }
  const std::vector<Matrix>& generators() const { return generators_; }

  /// Orthonormal basis stacked as columns of an n^2 x dim matrix.
  const Matrix& basis_columns() const { return basis_cols_; }

  Matrix project(const Matrix& x) const;
  double span_distance(const Matrix& x) const;
  bool contains(const Matrix& x, const Tolerance& tol) const;
  bool contains_all(const std::vector<Matrix>& xs, const Tolerance& tol) const;
  bool same_span(const StarAlgebra& other, const Tolerance& tol) const;

  /// Identity membership, *-closure and product-closure of the span.
  bool closure_defects_within(const Tolerance& tol) const;

  /// Internal: wrap an orthonormal family without running the closure
  /// iteration (callers guarantee the span is an algebra).
  static StarAlgebra from_orthonormal_basis(std::vector<Matrix> basis, Eigen::Index n,
                                            std::vector<Matrix> generators = {});

  StarAlgebra() = default;

 private:
  Eigen::Index n_ = 0;
  std::vector<Matrix> basis_;
  std::vector<Matrix> generators_;
  Matrix basis_cols_;  // n^2 x dim, orthonormal columns
};

/// Relative commutant {x in ambient : [x, s] = 0}, computed from the
/// nullspace of the stacked commutator superoperators restricted to the
/// ambient span. Throws PreconditionError if s is not contained in ambient.
StarAlgebra commutant(const StarAlgebra& s, const StarAlgebra& ambient, const Tolerance& tol);

/// A commutative StarAlgebra together with a joint eigenbasis and its
/// minimal projections p_1..p_r (r = dimension): mutually orthogonal
/// Hermitian idempotents summing to the identity, these span the algebra.
class CommutativeSubalgebra {
 public:
  /// Joint-diagonalizes a commutative algebra via a random Hermitian
  /// combination of its basis, retried with a fresh draw when eigenvalue
  /// gaps fall below tolerance.
  static CommutativeSubalgebra from_algebra(const StarAlgebra& s, const Tolerance& tol,
                                            std::uint64_t seed = 0);

  static CommutativeSubalgebra diagonal(Eigen::Index n);
  static CommutativeSubalgebra diagonal_in_basis(const Matrix& u, const Tolerance& tol);

  /// Diagonal algebra in an eigenbasis of the Hermitian matrix c. For a
  /// nondegenerate spectrum this is the algebra generated by c; a degenerate
  /// spectrum yields a maximal-abelian refinement flagged non_unique.
  static CommutativeSubalgebra masa_from_hermitian(const Matrix& c, const Tolerance& tol);

  const StarAlgebra& algebra() const { return algebra_; }
  Eigen::Index ambient_dim() const { return algebra_.ambient_dim(); }
  Eigen::Index dim() const { return algebra_.dim(); }
  const Matrix& diagonalizer() const { return diagonalizer_; }
  const std::vector<Matrix>& minimal_projections() const { return projections_; }
  bool non_unique() const { return non_unique_; }

  /// Coefficients of x over the minimal projections (valid for x in the span).
  Vector coefficients(const Matrix& x) const;
  Matrix combine(const Vector& coeffs) const;

 private:
  CommutativeSubalgebra() = default;
  StarAlgebra algebra_;
  Matrix diagonalizer_;
  std::vector<Matrix> projections_;
  bool non_unique_ = false;
};

std::vector<Matrix> minimal_projections(const CommutativeSubalgebra& c);

/// True iff the relative commutant of c in ambient equals c as a span,
/// i.e. ambient admits no larger commutative subalgebra containing c.
bool is_maximal_commutative(const CommutativeSubalgebra& c, const StarAlgebra& ambient,
                            const Tolerance& tol);

}  // namespace qinv

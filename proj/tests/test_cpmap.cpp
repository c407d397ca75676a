#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qinv/cpmap.hpp"
#include "qinv/random.hpp"

using namespace qinv;

namespace {
const Tolerance tol{};

Matrix unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

Matrix upper_l() {
  Matrix l(2, 2);
  l << 1, 1, 0, 1;
  return l;
}

Matrix transpose_superop(Eigen::Index n) {
  Matrix s = Matrix::Zero(n * n, n * n);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index q = 0; q < n; ++q)
      s.col(q * n + p) = vec(Matrix(unit(n, p, q).transpose()));
  return s;
}

CpMap random_cp(Eigen::Index n, int m, std::mt19937_64& rng) {
  std::vector<Matrix> kraus;
  for (int i = 0; i < m; ++i) kraus.push_back(randn_complex(n, n, rng) / std::sqrt(double(n * m)));
  return CpMap::from_kraus(kraus, n);
}

// Brute-force complete positivity: (id_k (x) Phi) keeps random pure and
// random full-rank PSD inputs PSD, for k up to n.
bool amplified_positivity(const Matrix& superop, Eigen::Index n, int draws, std::mt19937_64& rng) {
  for (Eigen::Index k = 1; k <= n; ++k) {
    for (int d = 0; d < draws; ++d) {
      Matrix x;
      if (d % 2 == 0) {
        Matrix v = randn_complex(k * n, 1, rng);
        x = v * v.adjoint();
      } else {
        x = random_psd(k * n, rng);
      }
      Matrix y(k * n, k * n);
      for (Eigen::Index a = 0; a < k; ++a)
        for (Eigen::Index b = 0; b < k; ++b)
          y.block(a * n, b * n, n, n) =
              apply_superop(superop, x.block(a * n, b * n, n, n));
      if (!is_psd(hermitize(y), tol)) return false;
    }
  }
  return true;
}
}  // namespace

TEST_CASE("choi of fixed maps") {
  Matrix c_id = choi_from_superop(Matrix::Identity(4, 4), 2);
  Vector omega = vec(identity(2));
  CHECK((c_id - Matrix(omega * omega.adjoint())).norm() < 1e-14);
  CHECK(std::abs(c_id.trace() - Complex(2)) < 1e-14);

  // One-Kraus map: rank-one PSD Choi with trace tr(L L*) = 3.
  Matrix c_l = choi_from_kraus({upper_l()}, 2);
  CHECK(std::abs(c_l.trace() - Complex(3)) < 1e-13);
  auto eig = eig_hermitian(c_l, tol);
  CHECK(eig.values.minCoeff() > -1e-13);
  int rank = 0;
  for (Eigen::Index i = 0; i < 4; ++i)
    if (eig.values(i) > 1e-10) ++rank;
  CHECK(rank == 1);

  CHECK(choi_from_kraus({}, 2).norm() == 0.0);
}

TEST_CASE("choi reshuffle is an involution and matches the kraus route") {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 8; ++rep) {
    Matrix s = randn_complex(9, 9, rng);
    CHECK((superop_from_choi(choi_from_superop(s, 3), 3) - s).norm() < 1e-13);
  }
  for (int rep = 0; rep < 5; ++rep) {
    CpMap t = random_cp(3, 2, rng);
    CHECK((choi_from_superop(t.superop(), 3) - t.choi()).norm() < 1e-12);
  }
}

TEST_CASE("kraus_from_choi fixed cases") {
  auto id_kraus = kraus_from_choi(choi_from_kraus({identity(2)}, 2), 2, tol);
  REQUIRE(id_kraus.size() == 1);
  CHECK((id_kraus[0] - identity(2)).norm() < 1e-12);

  auto l_kraus = kraus_from_choi(choi_from_kraus({upper_l()}, 2), 2, tol);
  REQUIRE(l_kraus.size() == 1);
  CHECK((l_kraus[0] - upper_l()).norm() < 1e-12);

  // Dephasing Choi E11 (x) E11 + E22 (x) E22.
  Matrix dephase = kron(unit(2, 0, 0), unit(2, 0, 0)) + kron(unit(2, 1, 1), unit(2, 1, 1));
  auto d_kraus = kraus_from_choi(dephase, 2, tol);
  REQUIRE(d_kraus.size() == 2);
  CpMap d = CpMap::from_kraus(d_kraus, 2);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      Matrix img = d.apply(unit(2, i, j));
      Matrix expected = i == j ? unit(2, i, i) : Matrix(Matrix::Zero(2, 2));
      CHECK((img - expected).norm() < 1e-12);
    }

  Matrix not_psd = -choi_from_kraus({upper_l()}, 2);
  CHECK_THROWS_AS(kraus_from_choi(not_psd, 2, tol), NotCompletelyPositive);
  try {
    kraus_from_choi(not_psd, 2, tol);
  } catch (const NotCompletelyPositive& e) {
    CHECK(e.min_eigenvalue == doctest::Approx(-3.0));
  }
}

TEST_CASE("is_cp and is_unital fixed cases") {
  std::mt19937_64 rng(9);
  Matrix u = random_unitary(2, rng);
  CpMap conj = CpMap::from_kraus({u}, 2);
  CHECK(is_cp(conj, tol));
  CHECK(is_unital(conj, tol));

  Matrix t_superop = transpose_superop(2);
  CHECK(!is_cp_superop(t_superop, 2, tol));
  auto eig = eig_hermitian(choi_from_superop(t_superop, 2), tol);
  CHECK(eig.values.minCoeff() == doctest::Approx(-1.0));

  CpMap l0 = CpMap::from_kraus({upper_l()}, 2);
  CHECK(is_cp(l0, tol));
  CHECK(!is_unital(l0, tol));
  Matrix gram(2, 2);
  gram << 1, 1, 1, 2;  // L* L
  CHECK((l0.apply(identity(2)) - gram).norm() < 1e-13);
}

TEST_CASE("gns data") {
  GnsData id = gns_of(CpMap::identity_map(2), tol);
  CHECK(id.multiplicity == 1);
  CHECK(id.minimal);
  CHECK((id.xi_blocks[0] - identity(2)).norm() < 1e-12);

  CHECK(gns_of(CpMap::from_kraus({upper_l()}, 2), tol).multiplicity == 1);

  CpMap dephase = CpMap::from_kraus({unit(2, 0, 0), unit(2, 1, 1)}, 2);
  CHECK(gns_of(dephase, tol).multiplicity == 2);

  // reproduction identity on a basis
  std::mt19937_64 rng(13);
  CpMap t = random_cp(3, 2, rng);
  GnsData g = gns_of(t, tol);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      Matrix b = unit(3, i, j);
      Matrix rebuilt = Matrix::Zero(3, 3);
      for (const Matrix& l : g.xi_blocks) rebuilt += l.adjoint() * b * l;
      CHECK((rebuilt - t.apply(b)).norm() < 1e-11);
    }
}

TEST_CASE("compose and dual") {
  std::mt19937_64 rng(21);
  CpMap t = random_cp(2, 2, rng);
  CpMap id = CpMap::identity_map(2);
  CHECK((compose(id, t, tol).superop() - t.superop()).norm() < 1e-11);

  // dual of b -> L* b L is rho -> L rho L*, via the trace pairing
  CpMap l0 = CpMap::from_kraus({upper_l()}, 2);
  CpMap l0_dual = dual(l0, tol);
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) {
      Matrix rho = unit(2, i, j);
      Matrix expected = upper_l() * rho * upper_l().adjoint();
      CHECK((l0_dual.apply(rho) - expected).norm() < 1e-12);
      for (Eigen::Index k = 0; k < 2; ++k)
        for (Eigen::Index l = 0; l < 2; ++l) {
          Matrix b = unit(2, k, l);
          Complex lhs = (l0_dual.apply(rho) * b).trace();
          Complex rhs = (rho * l0.apply(b)).trace();
          CHECK(std::abs(lhs - rhs) < 1e-12);
        }
    }

  CpMap t2 = random_cp(3, 2, rng);
  CHECK((dual(dual(t2, tol), tol).superop() - t2.superop()).norm() < 1e-11);
}

TEST_CASE("choi/kraus round-trip on the map level with minimal recovered family") {
  std::mt19937_64 rng(33);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::Index n = 2 + rep % 2;
    const int m0 = 1 + rep % int(n * n);
    CpMap t = random_cp(n, m0, rng);
    auto kraus = kraus_from_choi(t.choi(), n, tol);
    CpMap rebuilt = CpMap::from_kraus(kraus, n);
    CHECK((rebuilt.superop() - t.superop()).norm() < 1e-10);
    // generic families are already minimal: recovered count matches, never exceeds
    CHECK(static_cast<int>(kraus.size()) <= m0);
    auto eig = eig_hermitian(t.choi(), tol);
    int rank = 0;
    for (Eigen::Index i = 0; i < eig.values.size(); ++i)
      if (eig.values(i) > tol.bound(eig.values.maxCoeff())) ++rank;
    CHECK(static_cast<int>(kraus.size()) == rank);
  }
}

TEST_CASE("choi positivity agrees with brute-force amplified positivity") {
  std::mt19937_64 rng(51);
  for (Eigen::Index n : {Eigen::Index(2), Eigen::Index(3)}) {
    for (int rep = 0; rep < 3; ++rep) {
      CpMap t = random_cp(n, 1 + rep, rng);
      CHECK(is_cp_superop(t.superop(), n, tol));
      CHECK(amplified_positivity(t.superop(), n, 40, rng));
    }
    // transpose map: Choi test and brute force agree on non-CP
    Matrix ts = transpose_superop(n);
    CHECK(!is_cp_superop(ts, n, tol));
    CHECK(!amplified_positivity(ts, n, 200, rng));

    // CP map dented along a Kraus direction
    CpMap t = random_cp(n, 2, rng);
    Matrix dent = randn_complex(n, n, rng);
    Matrix bad = t.superop() - (2.0 * (1.0 + t.superop().norm()) / dent.squaredNorm()) *
                                   superop_from_kraus({dent}, n);
    CHECK(!is_cp_superop(bad, n, tol));
    CHECK(!amplified_positivity(bad, n, 200, rng));
  }
}

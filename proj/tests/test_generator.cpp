#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "qinv/fixtures.hpp"
#include "qinv/generator.hpp"
#include "qinv/random.hpp"

using namespace qinv;

namespace {
const Tolerance tol{};

Matrix unit(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

Matrix diag2(Complex a, Complex b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

CcpGenerator hamiltonian_generator(const Matrix& h) {
  return assemble_lindblad(LindbladForm{h, {}}, tol);
}

// Test-side oracle for the Gram rank: the GNS module of a generator with
// Lindblad block column zeta0 is spanned by the blocks of d(b) x over basis
// elements b, x; its dimension is an SVD rank.
Eigen::Index span_dbx_dimension(const LindbladForm& form, Eigen::Index n) {
  const Eigen::Index m = static_cast<Eigen::Index>(form.kraus.size());
  if (m == 0) return 0;
  Matrix cols(m * n * n, n * n * n * n);
  Eigen::Index col = 0;
  for (Eigen::Index bi = 0; bi < n * n; ++bi)
    for (Eigen::Index xi = 0; xi < n * n; ++xi) {
      Matrix b = unvec(Vector(Vector::Unit(n * n, bi)), n, n);
      Matrix x = unvec(Vector(Vector::Unit(n * n, xi)), n, n);
      for (Eigen::Index i = 0; i < m; ++i) {
        Matrix block = (b * form.kraus[i] - form.kraus[i] * b) * x;
        cols.block(i * n * n, col, n * n, 1) = vec(block);
      }
      ++col;
    }
  return column_span(cols, tol).cols();
}
}  // namespace

TEST_CASE("generator construction requires Hermiticity preservation") {
  // b -> E12 b is not Hermiticity-preserving
  Matrix bad = kron(identity(2), unit(2, 0, 1));
  CHECK_THROWS_AS(CcpGenerator(bad, 2, tol), PreconditionError);
  CHECK(!is_hermiticity_preserving(bad, 2, tol));
  CHECK(is_hermiticity_preserving(fixtures::death_generator(tol).superop(), 2, tol));
}

TEST_CASE("is_ccp fixed cases") {
  CHECK(is_ccp(CcpGenerator::from_cp_map(CpMap::identity_map(2), tol), tol));

  std::mt19937_64 rng(3);
  CHECK(is_ccp(hamiltonian_generator(random_hermitian(3, rng)), tol));

  CHECK(is_ccp(fixtures::death_generator(tol), tol));

  // scaled inversion L(b) = -b generates b -> e^{-t} b, which is CP: CCP
  CcpGenerator minus_id(-Matrix::Identity(4, 4), 2, tol);
  CHECK(is_ccp(minus_id, tol));

  // genuinely non-CCP: minus a CP map along a traceless Kraus direction
  CcpGenerator neg(-superop_from_kraus({unit(2, 0, 1)}, 2), 2, tol);
  CHECK(!is_ccp(neg, tol));
}

TEST_CASE("brute-force oracle agrees on fixed cases") {
  CcpGenerator id_gen = CcpGenerator::from_cp_map(CpMap::identity_map(2), tol);
  CHECK(ccp_bruteforce_oracle(id_gen, 1000, 1, tol));

  // L(b) = -b satisfies the defining inequality with value identically zero.
  CcpGenerator minus_id(-Matrix::Identity(4, 4), 2, tol);
  CHECK(ccp_bruteforce_oracle(minus_id, 1000, 2, tol));

  CHECK(ccp_bruteforce_oracle(fixtures::death_generator(tol), 1000, 3, tol));

  CcpGenerator neg(-superop_from_kraus({unit(2, 0, 1)}, 2), 2, tol);
  CHECK(!ccp_bruteforce_oracle(neg, 1000, 4, tol));
}

TEST_CASE("is_markov_generator fixed cases") {
  CHECK(is_markov_generator(fixtures::death_generator(tol), tol));
  CHECK(!is_markov_generator(CcpGenerator::from_cp_map(fixtures::death_cp_part(), tol), tol));
  CHECK(is_markov_generator(CcpGenerator::zero(2, tol), tol));
}

TEST_CASE("canonical decomposition of the death-process generator") {
  LindbladDecomposition ld = lindblad_decompose(fixtures::death_generator(tol), tol);
  CHECK(ld.beta_shift.norm() < 1e-12);
  CHECK(ld.form.h.norm() < 1e-10);
  REQUIRE(ld.form.kraus.size() == 1);
  CHECK((ld.form.kraus[0] - fixtures::death_canonical_kraus()).norm() < 1e-10);
}

TEST_CASE("decomposition of a pure hamiltonian and of the zero generator") {
  Matrix h0(2, 2);
  h0 << 0.5, Complex(0, -0.25), Complex(0, 0.25), -0.5;  // traceless Hermitian
  LindbladDecomposition ld = lindblad_decompose(hamiltonian_generator(h0), tol);
  CHECK(ld.form.kraus.empty());
  CHECK((ld.form.h - h0).norm() < 1e-10);

  LindbladDecomposition zero = lindblad_decompose(CcpGenerator::zero(3, tol), tol);
  CHECK(zero.form.kraus.empty());
  CHECK(zero.form.h.norm() < 1e-12);
}

TEST_CASE("non-Markov input is shifted and the shift is reported") {
  CcpGenerator l0 = CcpGenerator::from_cp_map(fixtures::death_cp_part(), tol);
  LindbladDecomposition ld = lindblad_decompose(l0, tol);
  Matrix gram(2, 2);
  gram << 1, 1, 1, 2;  // L(1) = L* L
  CHECK((ld.beta_shift - 0.5 * gram).norm() < 1e-10);
  // assemble(form) + b shift + shift* b reproduces the input
  Matrix rebuilt = assemble_lindblad(ld.form, tol).superop() +
                   kron(ld.beta_shift.transpose(), identity(2)) +
                   kron(identity(2), Matrix(ld.beta_shift.adjoint()));
  CHECK((rebuilt - l0.superop()).norm() < 1e-10);
}

TEST_CASE("decompose rejects non-CCP input with the witness eigenvalue") {
  CcpGenerator neg(-superop_from_kraus({unit(2, 0, 1)}, 2), 2, tol);
  CHECK_THROWS_AS(lindblad_decompose(neg, tol), NotConditionallyCompletelyPositive);
  try {
    lindblad_decompose(neg, tol);
  } catch (const NotConditionallyCompletelyPositive& e) {
    CHECK(e.min_eigenvalue < -0.5);
  }
}

TEST_CASE("assembly reproduces the worked-example images") {
  // CE presentation: L0(diag(z1,z2)) + beta-part maps diag(z1,z2) to diag(z1, z1+z2)
  CeForm ce{fixtures::death_cp_part(), fixtures::death_ce_beta()};
  CcpGenerator ce_gen = assemble_ce(ce, tol);
  CHECK((ce_gen.apply(diag2(1, 0)) - diag2(1, 1)).norm() < 1e-13);
  CHECK((ce_gen.apply(diag2(0, 1)) - diag2(0, 1)).norm() < 1e-13);
  CHECK((ce_gen.apply(diag2(3, -2)) - diag2(3, 1)).norm() < 1e-12);

  // Markov form maps diag(z1,z2) to diag(0, z1-z2)
  CcpGenerator markov = fixtures::death_generator(tol);
  CHECK((markov.apply(diag2(1, 0)) - diag2(0, 1)).norm() < 1e-13);
  CHECK((markov.apply(diag2(0, 1)) - diag2(0, -1)).norm() < 1e-13);
  CHECK(markov.apply(identity(2)).norm() < 1e-13);

  // empty form is the zero generator
  CHECK(assemble_lindblad(LindbladForm{Matrix::Zero(2, 2), {}}, tol).superop().norm() == 0.0);
}

TEST_CASE("assembled Markov generators annihilate the identity") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 6; ++rep) {
    LindbladForm form;
    form.h = random_hermitian(3, rng);
    for (int i = 0; i <= rep % 2; ++i) form.kraus.push_back(randn_complex(3, 3, rng));
    CcpGenerator g = assemble_lindblad(form, tol);
    CHECK(g.apply(identity(3)).norm() < 1e-12 * (1.0 + g.superop().norm()));
    CHECK(is_ccp(g, tol));
  }
}

TEST_CASE("ce_from_lindblad round-trips and fixes the canonical beta") {
  // zero Kraus part: L(b) = i[b, h0] = b(ih0) + (ih0)* b, so beta = i h0
  Matrix h0(2, 2);
  h0 << 1, Complex(0, 2), Complex(0, -2), -1;
  CeForm ce = ce_from_lindblad(LindbladForm{h0, {}}, tol);
  CHECK((ce.beta - Matrix(Complex(0, 1) * h0)).norm() < 1e-14);
  CHECK((assemble_ce(ce, tol).superop() - hamiltonian_generator(h0).superop()).norm() < 1e-12);

  // single canonical Kraus, h = 0: beta = -diag(0,1)/2
  CeForm ce2 = ce_from_lindblad(LindbladForm{Matrix::Zero(2, 2), {fixtures::death_canonical_kraus()}}, tol);
  CHECK((ce2.beta - diag2(0, -0.5)).norm() < 1e-14);

  // worked-example data round-trips through the CE form exactly
  LindbladForm death{fixtures::death_hamiltonian(), {fixtures::death_ce_kraus()}};
  CHECK((assemble_ce(ce_from_lindblad(death, tol), tol).superop() -
         assemble_lindblad(death, tol).superop())
            .norm() < 1e-12);

  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    LindbladForm form;
    form.h = random_hermitian(3, rng);
    form.kraus.push_back(randn_complex(3, 3, rng));
    CHECK((assemble_ce(ce_from_lindblad(form, tol), tol).superop() -
           assemble_lindblad(form, tol).superop())
              .norm() < 1e-11);
  }
}

TEST_CASE("decompose then assemble recovers the generator") {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 6; ++rep) {
    const Eigen::Index n = 2 + rep % 2;
    LindbladForm form;
    form.h = random_hermitian(n, rng);
    for (int i = 0; i <= rep % 2; ++i) form.kraus.push_back(randn_complex(n, n, rng));
    CcpGenerator g = assemble_lindblad(form, tol);
    LindbladDecomposition ld = lindblad_decompose(g, tol);
    CHECK((assemble_lindblad(ld.form, tol).superop() - g.superop()).norm() <
          1e-10 * (1.0 + g.superop().norm()));
    for (const Matrix& l : ld.form.kraus) CHECK(std::abs(l.trace()) < 1e-10);
    CHECK(std::abs(ld.form.h.trace()) < 1e-12);
  }
}

TEST_CASE("gns_gram fixed cases and the d(B)B dimension oracle") {
  CcpGnsGram zero = gns_gram(CcpGenerator::zero(2, tol), tol);
  CHECK(zero.space_dim == 12);  // n^4 - n^2
  CHECK(zero.rank == 0);
  CHECK(zero.gram.norm() < 1e-14);

  std::mt19937_64 rng(17);
  CcpGnsGram ham = gns_gram(hamiltonian_generator(random_hermitian(2, rng)), tol);
  CHECK(ham.rank == 0);
  CHECK(ham.gram.norm() < 1e-10);

  CcpGenerator death = fixtures::death_generator(tol);
  CcpGnsGram g = gns_gram(death, tol);
  LindbladDecomposition ld = lindblad_decompose(death, tol);
  CHECK(g.rank == span_dbx_dimension(ld.form, 2));
  CHECK(g.rank == 4);  // one Kraus operator, full block module

  CHECK_THROWS_AS(gns_gram(CcpGenerator(-superop_from_kraus({unit(2, 0, 1)}, 2), 2, tol), tol),
                  NotConditionallyCompletelyPositive);

  // one generic Kraus operator at n = 3 generates the full block module
  LindbladForm form3;
  form3.h = Matrix::Zero(3, 3);
  form3.kraus.push_back(randn_complex(3, 3, rng));
  CcpGenerator g3 = assemble_lindblad(form3, tol);
  CcpGnsGram gram3 = gns_gram(g3, tol);
  CHECK(gram3.space_dim == 72);
  CHECK(gram3.rank == span_dbx_dimension(form3, 3));
  CHECK(gram3.rank == 9);
}

TEST_CASE("gns_gram is insensitive to the beta part") {
  std::mt19937_64 rng(19);
  for (int rep = 0; rep < 4; ++rep) {
    LindbladForm form;
    form.h = random_hermitian(2, rng);
    form.kraus.push_back(randn_complex(2, 2, rng));
    CcpGenerator g = assemble_lindblad(form, tol);
    CcpGnsGram base = gns_gram(g, tol);

    Matrix beta = randn_complex(2, 2, rng);
    Matrix shifted = g.superop() + kron(beta.transpose(), identity(2)) +
                     kron(identity(2), Matrix(beta.adjoint()));
    CcpGnsGram moved = gns_gram(CcpGenerator(shifted, 2, tol), tol);
    CHECK((base.gram - moved.gram).norm() < 1e-10 * (1.0 + base.gram.norm()));
    CHECK(base.rank == moved.rank);
  }
}

TEST_CASE("gram positivity agrees with is_ccp") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 6; ++rep) {
    LindbladForm form;
    form.h = random_hermitian(2, rng);
    form.kraus.push_back(randn_complex(2, 2, rng));
    Matrix s = assemble_lindblad(form, tol).superop();
    if (rep % 2 == 1) {
      Matrix dent = randn_complex(2, 2, rng);
      dent -= (dent.trace() / 2.0) * identity(2);
      s -= (2.0 * (1.0 + s.norm()) / dent.squaredNorm()) * superop_from_kraus({dent}, 2);
    }
    CcpGenerator g(s, 2, tol);
    bool gram_ok = true;
    try {
      gns_gram(g, tol);
    } catch (const NotConditionallyCompletelyPositive&) {
      gram_ok = false;
    }
    CHECK(gram_ok == is_ccp(g, tol));
  }
}

TEST_CASE("derivation identity") {
  CcpGenerator death = fixtures::death_generator(tol);
  LindbladForm canonical = lindblad_decompose(death, tol).form;
  CHECK(derivation_identity_check(death, canonical) < 1e-10);

  // the derivation itself: d(diag(z1,z2)) = [[0, z1-z2],[0,0]]
  Matrix z = diag2(3, 1);
  Matrix d = z * fixtures::death_canonical_kraus() - fixtures::death_canonical_kraus() * z;
  Matrix expected = Matrix::Zero(2, 2);
  expected(0, 1) = 2.0;
  CHECK((d - expected).norm() < 1e-14);

  CHECK(derivation_identity_check(CcpGenerator::zero(2, tol),
                                  LindbladForm{Matrix::Zero(2, 2), {}}) == 0.0);

  // sensitivity: a corrupted family is detected well above tolerance
  LindbladForm corrupted = canonical;
  corrupted.kraus[0](1, 0) += 0.1;
  CHECK(derivation_identity_check(death, corrupted) > 0.01);
}

TEST_CASE("ccp agreement suite comes back clean") {
  CcpAgreementReport rep = ccp_agreement_suite(99, 20, 300, 2, tol);
  CHECK(rep.cases == 20);
  CHECK(rep.disagreements == 0);
}

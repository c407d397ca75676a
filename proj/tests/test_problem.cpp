#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "qinv/problem.hpp"

using namespace qinv;

namespace {

std::string fixture(const std::string& name) { return std::string(QINV_FIXTURES_DIR) + "/" + name; }

int run_cli(const std::string& args) {
  const std::string cmd = std::string(QINV_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("matrix JSON round trip and parse diagnostics") {
  Matrix m(2, 2);
  m << Complex(1, -2), Complex(0, 3), 4, Complex(-0.5, 0.25);
  Matrix back = matrix_from_json(matrix_to_json(m), "m");
  CHECK((back - m).norm() == 0.0);

  CHECK_THROWS_WITH_AS(matrix_from_json(Json::parse("[[1,2],[3]]"), "m"),
                       doctest::Contains("ragged"), InputError);
  CHECK_THROWS_WITH_AS(matrix_from_json(Json::parse("[[[1,2,3]]]"), "m[0][0]"),
                       doctest::Contains("[re, im]"), InputError);
}

TEST_CASE("problem files parse with shape validation") {
  ProblemSpec spec = problem_from_file(fixture("death_process_generator.json"));
  CHECK(spec.dim == 2);
  CHECK(spec.kind == ObjectKind::generator);
  REQUIRE(spec.lindblad.has_value());
  CHECK(spec.lindblad->kraus.size() == 1);

  CHECK_THROWS_WITH_AS(problem_from_file(fixture("bad_shape.json")),
                       doctest::Contains("expected a 2x2 matrix, got 3x3"), InputError);
  CHECK_THROWS_AS(problem_from_file("no_such_file.json"), InputError);
}

TEST_CASE("check: death-process generator is invariant with the death Q-matrix") {
  ProblemSpec spec = problem_from_file(fixture("death_process_generator.json"));
  CommandResult res = run_check(spec, RunOptions{});
  CHECK(res.exit_code == 0);
  REQUIRE(res.report.invariant.has_value());
  CHECK(res.report.invariant->value);
  REQUIRE(res.report.maximal_commutative.has_value());
  CHECK(res.report.maximal_commutative->value);
  REQUIRE(res.report.ccp.has_value());
  CHECK(res.report.ccp->value);
  REQUIRE(res.report.markov.has_value());
  CHECK(res.report.markov->value);
  REQUIRE(res.report.classical.has_value());
  RealMatrix q(2, 2);
  q << 0, 0, 1, -1;
  CHECK((res.report.classical->matrix - q).norm() < 1e-10);
  REQUIRE(res.report.zeta.has_value());
  CHECK(res.report.zeta->found);
}

TEST_CASE("check: the CP part alone is not invariant (exit 1)") {
  ProblemSpec spec = problem_from_file(fixture("death_process_cp_part.json"));
  CommandResult res = run_check(spec, RunOptions{});
  CHECK(res.exit_code == 1);
  CHECK(!res.report.invariant->value);
  REQUIRE(res.report.alpha.has_value());
  CHECK(!res.report.alpha->found);
  CHECK(!res.report.classical.has_value());
}

TEST_CASE("check: non-maximal subalgebra is refused with exit 2") {
  ProblemSpec spec = problem_from_file(fixture("death_process_generator.json"));
  spec.subalgebra = ProblemSpec::Subalgebra::generators;
  spec.subalgebra_generators = {};  // closure = scalars, not maximal in M2
  CommandResult res = run_check(spec, RunOptions{});
  CHECK(res.exit_code == 2);
  REQUIRE(res.report.maximal_commutative.has_value());
  CHECK(!res.report.maximal_commutative->value);
  bool mentions_maximality = false;
  for (const std::string& w : res.report.warnings)
    if (w.find("maximal") != std::string::npos) mentions_maximality = true;
  CHECK(mentions_maximality);
}

TEST_CASE("decompose: canonical form of the death-process generator") {
  ProblemSpec spec = problem_from_file(fixture("death_process_generator.json"));
  CommandResult res = run_decompose(spec, RunOptions{});
  CHECK(res.exit_code == 0);
  REQUIRE(res.report.decomposition.has_value());
  const auto& d = *res.report.decomposition;
  CHECK(d.h.norm() < 1e-10);
  REQUIRE(d.kraus.size() == 1);
  Matrix hop = Matrix::Zero(2, 2);
  hop(0, 1) = 1.0;
  CHECK((d.kraus[0] - hop).norm() < 1e-10);
  CHECK(d.multiplicity == 1);
  CHECK(d.gram_rank == 4);
}

TEST_CASE("decompose: pure hamiltonian spec has an empty Kraus list") {
  ProblemSpec spec = problem_from_file(fixture("hamiltonian_only.json"));
  CommandResult res = run_decompose(spec, RunOptions{});
  CHECK(res.exit_code == 0);
  CHECK(res.report.decomposition->kraus.empty());
  CHECK(res.report.markov->value);
}

TEST_CASE("decompose: non-CCP superoperator exits 1 with the witness eigenvalue") {
  ProblemSpec spec;
  spec.dim = 2;
  spec.kind = ObjectKind::generator;
  Matrix hop = Matrix::Zero(2, 2);
  hop(0, 1) = 1.0;
  spec.superop = -superop_from_kraus({hop}, 2);
  CommandResult res = run_decompose(spec, RunOptions{});
  CHECK(res.exit_code == 1);
  REQUIRE(res.report.ccp.has_value());
  CHECK(!res.report.ccp->value);
  CHECK(res.report.ccp->evidence < -0.5);
}

TEST_CASE("verify: fixtures-only and empty runs exit 0") {
  VerifyOptions opts;
  opts.fixtures_only = true;
  CommandResult res = run_verify(opts);
  CHECK(res.exit_code == 0);
  CHECK(res.report.verify->fixtures_ok);

  VerifyOptions empty;
  empty.trials = 0;
  CHECK(run_verify(empty).exit_code == 0);
}

TEST_CASE("verify: a short randomized run agrees") {
  VerifyOptions opts;
  opts.trials = 10;
  opts.oracle_trials = 100;
  opts.seed = 7;
  CommandResult res = run_verify(opts);
  CHECK(res.exit_code == 0);
  CHECK(res.report.verify->cp_agreements == res.report.verify->cp_trials);
  CHECK(res.report.verify->ccp_disagreements == 0);
}

TEST_CASE("report JSON round-trips byte-identically") {
  for (const std::string& name :
       {std::string("death_process_generator.json"), std::string("death_process_cp_part.json"),
        std::string("hamiltonian_only.json")}) {
    ProblemSpec spec = problem_from_file(fixture(name));
    RunOptions opts;
    opts.grid = {0.0, 0.5, 1.0};
    CommandResult res = run_check(spec, opts);
    const std::string emitted = report_to_json(res.report).dump(2);
    Report parsed = report_from_json(Json::parse(emitted));
    CHECK(report_to_json(parsed).dump(2) == emitted);
    CHECK(!report_to_text(res.report).empty());
  }
  VerifyOptions vopts;
  vopts.trials = 4;
  vopts.oracle_trials = 50;
  Report vrep = run_verify(vopts).report;
  const std::string emitted = report_to_json(vrep).dump(2);
  CHECK(report_to_json(report_from_json(Json::parse(emitted))).dump(2) == emitted);
}

TEST_CASE("identical input and seed give byte-identical reports") {
  ProblemSpec spec = problem_from_file(fixture("death_process_generator.json"));
  RunOptions opts;
  opts.seed = 42;
  opts.grid = {0.0, 1.0};
  const std::string a = report_to_json(run_check(spec, opts).report).dump();
  const std::string b = report_to_json(run_check(spec, opts).report).dump();
  CHECK(a == b);
}

TEST_CASE("flow diagnostics appear when a grid is requested") {
  ProblemSpec spec = problem_from_file(fixture("death_process_generator.json"));
  RunOptions opts;
  opts.grid = {0.0, 0.5, 1.0, 2.0};
  CommandResult res = run_check(spec, opts);
  REQUIRE(res.report.flow.has_value());
  CHECK(res.report.flow->grid.size() == 4);
  for (double leak : res.report.flow->leakage) CHECK(leak < 1e-9);
  const auto& off = res.report.flow->offdiag;
  REQUIRE(off.size() == 4);
  for (std::size_t i = 1; i < off.size(); ++i) CHECK(off[i] < off[i - 1]);
}

TEST_CASE("check honors a block-diagonal ambient algebra") {
  // Diagonal M3 is maximal commutative inside M2 + M1, so the check runs.
  ProblemSpec spec;
  spec.dim = 3;
  spec.kind = ObjectKind::generator;
  LindbladForm form;
  form.h = Matrix::Zero(3, 3);
  form.h(0, 0) = 1.0;
  form.h(1, 1) = -1.0;
  form.kraus = {};
  spec.lindblad = form;
  spec.subalgebra = ProblemSpec::Subalgebra::diagonal;
  spec.ambient_blocks = std::vector<Eigen::Index>{2, 1};
  CommandResult res = run_check(spec, RunOptions{});
  CHECK(res.exit_code == 0);
  CHECK(res.report.maximal_commutative->value);
  CHECK(res.report.invariant->value);
}

TEST_CASE("cli binary: exit codes and formats") {
  CHECK(run_cli("check " + fixture("death_process_generator.json")) == 0);
  CHECK(run_cli("check " + fixture("death_process_generator.json") + " --format json") == 0);
  CHECK(run_cli("check " + fixture("death_process_cp_part.json")) == 1);
  CHECK(run_cli("check " + fixture("bad_shape.json")) == 2);
  CHECK(run_cli("check no_such_file.json") == 2);
  CHECK(run_cli("decompose " + fixture("death_process_generator.json") + " --format json") == 0);
  CHECK(run_cli("verify --trials 0") == 0);
  CHECK(run_cli("verify --fixtures-only --seed 7") == 0);
}

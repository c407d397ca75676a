#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qinv/evolve.hpp"
#include "qinv/fixtures.hpp"

namespace qinv {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Problem description files. Complex numbers are two-element arrays
// [re, im] (bare reals accepted on input); matrices are row-major nested
// arrays of complex entries.
// ---------------------------------------------------------------------------

enum class ObjectKind { cp_map, generator };

struct ProblemSpec {
  Eigen::Index dim = 0;
  ObjectKind kind = ObjectKind::generator;

  // Exactly one of these describes the map/generator.
  std::optional<std::vector<Matrix>> kraus;
  std::optional<Matrix> superop;
  std::optional<LindbladForm> lindblad;

  enum class Subalgebra { diagonal, diagonal_in_basis, hermitian_generator, generators };
  Subalgebra subalgebra = Subalgebra::diagonal;
  Matrix subalgebra_basis;                    // diagonal_in_basis
  Matrix subalgebra_hermitian;                // hermitian_generator
  std::vector<Matrix> subalgebra_generators;  // generators

  // Ambient algebra; full matrix algebra when absent.
  std::optional<std::vector<Eigen::Index>> ambient_blocks;
  std::optional<std::vector<Matrix>> ambient_generators;
};

/// Throws InputError with field diagnostics on malformed input.
ProblemSpec problem_from_json(const Json& j);
ProblemSpec problem_from_file(const std::string& path);

Json complex_to_json(const Complex& z);
Json matrix_to_json(const Matrix& m);
Json real_matrix_to_json(const RealMatrix& m);
Matrix matrix_from_json(const Json& j, const std::string& field);

// ---------------------------------------------------------------------------
// Reports. Every verdict carries the numeric evidence it was decided on.
// ---------------------------------------------------------------------------

struct Verdict {
  bool value = false;
  double evidence = 0.0;  // defect, residual or witness eigenvalue
};

struct Report {
  std::string command;  // check | decompose | verify
  std::string kind;     // cp_map | generator | (empty for verify)
  Tolerance tol;
  std::uint64_t seed = 0;

  std::optional<Verdict> maximal_commutative;
  std::optional<Verdict> invariant;
  std::optional<Verdict> ccp;     // evidence: most negative projected-Choi eigenvalue
  std::optional<Verdict> markov;  // evidence: ||L(1)||
  std::optional<Verdict> unital;

  struct Alpha {
    bool found = false;
    double residual = 0.0;
    Eigen::Index multiplicity = 0;
    std::vector<Matrix> block_coeffs;  // per generator, (m*m) x r
  };
  std::optional<Alpha> alpha;

  struct Rebolledo {
    bool found = false;
    double residual = 0.0;
  };
  std::optional<Rebolledo> rebolledo;

  struct Zeta {
    bool found = false;
    std::vector<Matrix> blocks;
    Matrix gamma;
    double residual_derivation = 0.0;
    double residual_alpha = 0.0;
    double residual_gamma = 0.0;
    bool global = false;
    bool search_completeness_failure = false;
    std::string note;
  };
  std::optional<Zeta> zeta;

  struct Decomposition {
    Matrix h;
    std::vector<Matrix> kraus;
    Matrix beta;
    Matrix beta_shift;
    Eigen::Index multiplicity = 0;
    Eigen::Index gram_rank = 0;
    Eigen::Index gram_dim = 0;
  };
  std::optional<Decomposition> decomposition;

  struct Classical {
    RealMatrix matrix;  // Q-matrix for generators, transition weights for maps
    bool is_markov = false;
    bool is_generator = false;
  };
  std::optional<Classical> classical;

  struct Flow {
    std::vector<double> grid;
    std::vector<double> leakage;
    std::vector<double> offdiag;
  };
  std::optional<Flow> flow;

  struct Verify {
    int cp_trials = 0;
    int cp_agreements = 0;
    std::vector<int> cp_disagreements;
    int gen_trials = 0;
    int gen_invariant = 0;
    int zeta_found = 0;
    std::vector<int> zeta_failures;
    int ccp_cases = 0;
    int ccp_disagreements = 0;
    bool fixtures_ok = true;
  };
  std::optional<Verify> verify;

  std::vector<std::string> warnings;
};

Json report_to_json(const Report& r);
Report report_from_json(const Json& j);
std::string report_to_text(const Report& r);

// ---------------------------------------------------------------------------
// Command drivers (shared by the CLI and by tests).
// ---------------------------------------------------------------------------

struct RunOptions {
  Tolerance tol;
  std::uint64_t seed = 0;
  std::vector<double> grid;  // empty: no flow diagnostics
  int remix_trials = 0;
};

struct VerifyOptions {
  Tolerance tol;
  std::uint64_t seed = 7;
  int trials = 50;
  Eigen::Index dim = 2;
  bool fixtures_only = false;
  int oracle_trials = 200;
};

struct CommandResult {
  Report report;
  int exit_code = 0;  // 0 ok/invariant, 1 negative verdict, 2 input error
};

CommandResult run_check(const ProblemSpec& spec, const RunOptions& opts);
CommandResult run_decompose(const ProblemSpec& spec, const RunOptions& opts);
CommandResult run_verify(const VerifyOptions& opts);

}  // namespace qinv

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qinv/problem.hpp"

namespace {

struct CommonFlags {
  double tol = -1.0;  // overrides abs and rel together when >= 0
  std::uint64_t seed = 0;
  std::string format = "text";
  std::string grid;
  int remix_trials = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--tol", flags.tol, "Override abs and rel tolerance together");
  cmd->add_option("--seed", flags.seed, "Seed for randomized steps");
  cmd->add_option("--format", flags.format, "Output format: text | json")
      ->check(CLI::IsMember({"text", "json"}));
}

qinv::RunOptions make_options(const CommonFlags& flags) {
  qinv::RunOptions opts;
  if (flags.tol >= 0.0) opts.tol = qinv::Tolerance{flags.tol, flags.tol};
  opts.seed = flags.seed;
  opts.remix_trials = flags.remix_trials;
  if (!flags.grid.empty()) {
    std::stringstream ss(flags.grid);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        opts.grid.push_back(std::stod(item));
      } catch (const std::exception&) {
        throw qinv::InputError("--grid: expected a comma-separated list of times");
      }
    }
  }
  return opts;
}

int emit(const qinv::CommandResult& result, const std::string& format) {
  if (format == "json")
    std::cout << qinv::report_to_json(result.report).dump(2) << "\n";
  else
    std::cout << qinv::report_to_text(result.report);
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant commutative subalgebras of CP maps and Lindblad generators"};
  app.require_subcommand(1);

  CommonFlags check_flags, decompose_flags, verify_flags;
  std::string check_file, decompose_file;

  CLI::App* check = app.add_subcommand(
      "check", "Decide invariance of the subalgebra, search certificates, restrict");
  check->add_option("spec", check_file, "Problem JSON file")->required();
  add_common(check, check_flags);
  check->add_option("--grid", check_flags.grid,
                    "Comma-separated times for flow diagnostics (generators only)");
  check->add_option("--remix-trials", check_flags.remix_trials,
                    "Experiment hook: retry the diagonal condition after this many random "
                    "multiplicity-space rotations");

  CLI::App* decompose =
      app.add_subcommand("decompose", "Canonical Lindblad / Christensen-Evans decomposition");
  decompose->add_option("spec", decompose_file, "Problem JSON file")->required();
  add_common(decompose, decompose_flags);

  CLI::App* verify = app.add_subcommand("verify", "Randomized certificate cross-check suites");
  int trials = 50;
  int dim = 2;
  int oracle_trials = 200;
  bool fixtures_only = false;
  verify->add_option("--trials", trials, "Randomized trials (0 for an empty report)");
  verify->add_option("--dim", dim, "Matrix dimension for the randomized suites")
      ->check(CLI::Range(2, 4));
  verify->add_option("--oracle-trials", oracle_trials, "Samples per brute-force CCP oracle run");
  verify->add_flag("--fixtures-only", fixtures_only, "Run only the built-in worked examples");
  add_common(verify, verify_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      qinv::ProblemSpec spec = qinv::problem_from_file(check_file);
      return emit(qinv::run_check(spec, make_options(check_flags)), check_flags.format);
    }
    if (decompose->parsed()) {
      qinv::ProblemSpec spec = qinv::problem_from_file(decompose_file);
      return emit(qinv::run_decompose(spec, make_options(decompose_flags)), decompose_flags.format);
    }
    qinv::VerifyOptions opts;
    if (verify_flags.tol >= 0.0) opts.tol = qinv::Tolerance{verify_flags.tol, verify_flags.tol};
    opts.seed = verify_flags.seed;
    opts.trials = trials;
    opts.dim = dim;
    opts.oracle_trials = oracle_trials;
    opts.fixtures_only = fixtures_only;
    return emit(qinv::run_verify(opts), verify_flags.format);
  } catch (const qinv::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const qinv::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

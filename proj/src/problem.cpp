#include "qinv/problem.hpp"

#include <fstream>
#include <sstream>

namespace qinv {

// ---------------------------------------------------------------------------
// JSON primitives
// ---------------------------------------------------------------------------

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json real_matrix_to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

Complex complex_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return Complex(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return Complex(j[0].get<double>(), j[1].get<double>());
  throw InputError(field + ": expected a number or a [re, im] pair");
}

RealMatrix real_matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw InputError(field + ": expected a nested array matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].is_array() ? j[0].size() : 0);
  if (cols == 0) throw InputError(field + ": expected a nested array matrix");
  RealMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw InputError(field + ": ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw InputError(field + ": expected real entries");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

}  // namespace

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw InputError(field + ": expected a nested array matrix");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array() || j[0].empty()) throw InputError(field + ": expected a nested array matrix");
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols)
      throw InputError(field + ": ragged matrix rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      std::ostringstream path;
      path << field << "[" << i << "][" << k << "]";
      m(i, k) = complex_from_json(j[i][k], path.str());
    }
  }
  return m;
}

namespace {

Matrix square_matrix_from_json(const Json& j, const std::string& field, Eigen::Index n) {
  Matrix m = matrix_from_json(j, field);
  if (m.rows() != n || m.cols() != n) {
    std::ostringstream msg;
    msg << field << ": expected a " << n << "x" << n << " matrix, got " << m.rows() << "x"
        << m.cols();
    throw InputError(msg.str());
  }
  return m;
}

std::vector<Matrix> matrix_list_from_json(const Json& j, const std::string& field,
                                          Eigen::Index n) {
  if (!j.is_array()) throw InputError(field + ": expected an array of matrices");
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    std::ostringstream path;
    path << field << "[" << i << "]";
    out.push_back(square_matrix_from_json(j[i], path.str(), n));
  }
  return out;
}

}  // namespace

ProblemSpec problem_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("problem: expected a JSON object");
  ProblemSpec spec;

  if (!j.contains("dim") || !j["dim"].is_number_integer() || j["dim"].get<int>() <= 0)
    throw InputError("dim: expected a positive integer");
  spec.dim = j["dim"].get<Eigen::Index>();

  if (!j.contains("kind") || !j["kind"].is_string())
    throw InputError("kind: expected \"cp_map\" or \"generator\"");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "cp_map")
    spec.kind = ObjectKind::cp_map;
  else if (kind == "generator")
    spec.kind = ObjectKind::generator;
  else
    throw InputError("kind: expected \"cp_map\" or \"generator\", got \"" + kind + "\"");

  if (!j.contains("object") || !j["object"].is_object())
    throw InputError("object: expected an object with one of kraus | superop | lindblad");
  const Json& obj = j["object"];
  int provided = int(obj.contains("kraus")) + int(obj.contains("superop")) + int(obj.contains("lindblad"));
  if (provided != 1)
    throw InputError("object: exactly one of kraus | superop | lindblad must be given");
  if (obj.contains("kraus")) {
    spec.kraus = matrix_list_from_json(obj["kraus"], "object.kraus", spec.dim);
    if (spec.kraus->empty()) throw InputError("object.kraus: at least one operator required");
  } else if (obj.contains("superop")) {
    spec.superop = square_matrix_from_json(obj["superop"], "object.superop", spec.dim * spec.dim);
  } else {
    const Json& lb = obj["lindblad"];
    if (!lb.is_object() || !lb.contains("h") || !lb.contains("kraus"))
      throw InputError("object.lindblad: expected {h, kraus}");
    LindbladForm form;
    form.h = square_matrix_from_json(lb["h"], "object.lindblad.h", spec.dim);
    form.kraus = matrix_list_from_json(lb["kraus"], "object.lindblad.kraus", spec.dim);
    spec.lindblad = std::move(form);
  }

  if (!j.contains("subalgebra")) throw InputError("subalgebra: missing");
  const Json& sub = j["subalgebra"];
  if (sub.is_string()) {
    if (sub.get<std::string>() != "diagonal")
      throw InputError("subalgebra: unknown name \"" + sub.get<std::string>() + "\"");
    spec.subalgebra = ProblemSpec::Subalgebra::diagonal;
  } else if (sub.is_object()) {
    int given = int(sub.contains("diagonal_in_basis")) + int(sub.contains("hermitian_generator")) +
                int(sub.contains("generators"));
    if (given != 1)
      throw InputError(
          "subalgebra: expected \"diagonal\" or one of diagonal_in_basis | hermitian_generator | "
          "generators");
    if (sub.contains("diagonal_in_basis")) {
      spec.subalgebra = ProblemSpec::Subalgebra::diagonal_in_basis;
      spec.subalgebra_basis =
          square_matrix_from_json(sub["diagonal_in_basis"], "subalgebra.diagonal_in_basis", spec.dim);
    } else if (sub.contains("hermitian_generator")) {
      spec.subalgebra = ProblemSpec::Subalgebra::hermitian_generator;
      spec.subalgebra_hermitian = square_matrix_from_json(sub["hermitian_generator"],
                                                          "subalgebra.hermitian_generator", spec.dim);
    } else {
      spec.subalgebra = ProblemSpec::Subalgebra::generators;
      spec.subalgebra_generators =
          matrix_list_from_json(sub["generators"], "subalgebra.generators", spec.dim);
    }
  } else {
    throw InputError("subalgebra: expected a string or an object");
  }

  if (j.contains("ambient")) {
    const Json& amb = j["ambient"];
    if (!amb.is_object() || (int(amb.contains("blocks")) + int(amb.contains("generators"))) != 1)
      throw InputError("ambient: expected {blocks: [...]} or {generators: [...]}");
    if (amb.contains("blocks")) {
      if (!amb["blocks"].is_array()) throw InputError("ambient.blocks: expected an integer array");
      std::vector<Eigen::Index> blocks;
      Eigen::Index total = 0;
      for (const Json& b : amb["blocks"]) {
        if (!b.is_number_integer() || b.get<int>() <= 0)
          throw InputError("ambient.blocks: expected positive integers");
        blocks.push_back(b.get<Eigen::Index>());
        total += blocks.back();
      }
      if (total != spec.dim) throw InputError("ambient.blocks: block sizes must sum to dim");
      spec.ambient_blocks = std::move(blocks);
    } else {
      spec.ambient_generators =
          matrix_list_from_json(amb["generators"], "ambient.generators", spec.dim);
    }
  }
  return spec;
}

ProblemSpec problem_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open problem file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("JSON parse error: ") + e.what());
  }
  return problem_from_json(j);
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

namespace {

Json verdict_to_json(const Verdict& v) {
  return Json{{"value", v.value}, {"evidence", v.evidence}};
}

Verdict verdict_from_json(const Json& j) {
  Verdict v;
  v.value = j.at("value").get<bool>();
  v.evidence = j.at("evidence").get<double>();
  return v;
}

Json matrices_to_json(const std::vector<Matrix>& ms) {
  Json out = Json::array();
  for (const Matrix& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<Matrix> matrices_from_json(const Json& j, const std::string& field) {
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(matrix_from_json(j[i], field));
  return out;
}

}  // namespace

Json report_to_json(const Report& r) {
  Json j;
  j["command"] = r.command;
  if (!r.kind.empty()) j["kind"] = r.kind;
  j["tolerance"] = Json{{"abs", r.tol.abs_eps}, {"rel", r.tol.rel_eps}};
  j["seed"] = r.seed;
  Json verdicts;
  if (r.maximal_commutative) verdicts["maximal_commutative"] = verdict_to_json(*r.maximal_commutative);
  if (r.invariant) verdicts["invariant"] = verdict_to_json(*r.invariant);
  if (r.ccp) verdicts["ccp"] = verdict_to_json(*r.ccp);
  if (r.markov) verdicts["markov"] = verdict_to_json(*r.markov);
  if (r.unital) verdicts["unital"] = verdict_to_json(*r.unital);
  j["verdicts"] = std::move(verdicts);

  if (r.alpha) {
    Json a;
    a["found"] = r.alpha->found;
    a["residual"] = r.alpha->residual;
    a["multiplicity"] = r.alpha->multiplicity;
    a["block_coeffs"] = matrices_to_json(r.alpha->block_coeffs);
    j["alpha"] = std::move(a);
  }
  if (r.rebolledo) {
    j["rebolledo"] = Json{{"found", r.rebolledo->found}, {"residual", r.rebolledo->residual}};
  }
  if (r.zeta) {
    Json z;
    z["found"] = r.zeta->found;
    z["blocks"] = matrices_to_json(r.zeta->blocks);
    z["gamma"] = matrix_to_json(r.zeta->gamma);
    z["residual_derivation"] = r.zeta->residual_derivation;
    z["residual_alpha"] = r.zeta->residual_alpha;
    z["residual_gamma"] = r.zeta->residual_gamma;
    z["global"] = r.zeta->global;
    z["search_completeness_failure"] = r.zeta->search_completeness_failure;
    z["note"] = r.zeta->note;
    j["zeta"] = std::move(z);
  }
  if (r.decomposition) {
    Json d;
    d["h"] = matrix_to_json(r.decomposition->h);
    d["kraus"] = matrices_to_json(r.decomposition->kraus);
    d["beta"] = matrix_to_json(r.decomposition->beta);
    d["beta_shift"] = matrix_to_json(r.decomposition->beta_shift);
    d["multiplicity"] = r.decomposition->multiplicity;
    d["gram_rank"] = r.decomposition->gram_rank;
    d["gram_dim"] = r.decomposition->gram_dim;
    j["decomposition"] = std::move(d);
  }
  if (r.classical) {
    Json c;
    c["matrix"] = real_matrix_to_json(r.classical->matrix);
    c["is_markov"] = r.classical->is_markov;
    c["is_generator"] = r.classical->is_generator;
    j["classical"] = std::move(c);
  }
  if (r.flow) {
    Json f;
    f["grid"] = r.flow->grid;
    f["leakage"] = r.flow->leakage;
    f["offdiag"] = r.flow->offdiag;
    j["flow"] = std::move(f);
  }
  if (r.verify) {
    Json v;
    v["cp_trials"] = r.verify->cp_trials;
    v["cp_agreements"] = r.verify->cp_agreements;
    v["cp_disagreements"] = r.verify->cp_disagreements;
    v["gen_trials"] = r.verify->gen_trials;
    v["gen_invariant"] = r.verify->gen_invariant;
    v["zeta_found"] = r.verify->zeta_found;
    v["zeta_failures"] = r.verify->zeta_failures;
    v["ccp_cases"] = r.verify->ccp_cases;
    v["ccp_disagreements"] = r.verify->ccp_disagreements;
    v["fixtures_ok"] = r.verify->fixtures_ok;
    j["verify"] = std::move(v);
  }
  j["warnings"] = r.warnings;
  return j;
}

Report report_from_json(const Json& j) {
  Report r;
  r.command = j.at("command").get<std::string>();
  if (j.contains("kind")) r.kind = j["kind"].get<std::string>();
  r.tol.abs_eps = j.at("tolerance").at("abs").get<double>();
  r.tol.rel_eps = j.at("tolerance").at("rel").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  const Json& verdicts = j.at("verdicts");
  if (verdicts.contains("maximal_commutative"))
    r.maximal_commutative = verdict_from_json(verdicts["maximal_commutative"]);
  if (verdicts.contains("invariant")) r.invariant = verdict_from_json(verdicts["invariant"]);
  if (verdicts.contains("ccp")) r.ccp = verdict_from_json(verdicts["ccp"]);
  if (verdicts.contains("markov")) r.markov = verdict_from_json(verdicts["markov"]);
  if (verdicts.contains("unital")) r.unital = verdict_from_json(verdicts["unital"]);

  if (j.contains("alpha")) {
    Report::Alpha a;
    a.found = j["alpha"].at("found").get<bool>();
    a.residual = j["alpha"].at("residual").get<double>();
    a.multiplicity = j["alpha"].at("multiplicity").get<Eigen::Index>();
    a.block_coeffs = matrices_from_json(j["alpha"].at("block_coeffs"), "alpha.block_coeffs");
    r.alpha = std::move(a);
  }
  if (j.contains("rebolledo")) {
    Report::Rebolledo b;
    b.found = j["rebolledo"].at("found").get<bool>();
    b.residual = j["rebolledo"].at("residual").get<double>();
    r.rebolledo = b;
  }
  if (j.contains("zeta")) {
    Report::Zeta z;
    const Json& zj = j["zeta"];
    z.found = zj.at("found").get<bool>();
    z.blocks = matrices_from_json(zj.at("blocks"), "zeta.blocks");
    z.gamma = matrix_from_json(zj.at("gamma"), "zeta.gamma");
    z.residual_derivation = zj.at("residual_derivation").get<double>();
    z.residual_alpha = zj.at("residual_alpha").get<double>();
    z.residual_gamma = zj.at("residual_gamma").get<double>();
    z.global = zj.at("global").get<bool>();
    z.search_completeness_failure = zj.at("search_completeness_failure").get<bool>();
    z.note = zj.at("note").get<std::string>();
    r.zeta = std::move(z);
  }
  if (j.contains("decomposition")) {
    Report::Decomposition d;
    const Json& dj = j["decomposition"];
    d.h = matrix_from_json(dj.at("h"), "decomposition.h");
    d.kraus = matrices_from_json(dj.at("kraus"), "decomposition.kraus");
    d.beta = matrix_from_json(dj.at("beta"), "decomposition.beta");
    d.beta_shift = matrix_from_json(dj.at("beta_shift"), "decomposition.beta_shift");
    d.multiplicity = dj.at("multiplicity").get<Eigen::Index>();
    d.gram_rank = dj.at("gram_rank").get<Eigen::Index>();
    d.gram_dim = dj.at("gram_dim").get<Eigen::Index>();
    r.decomposition = std::move(d);
  }
  if (j.contains("classical")) {
    Report::Classical c;
    c.matrix = real_matrix_from_json(j["classical"].at("matrix"), "classical.matrix");
    c.is_markov = j["classical"].at("is_markov").get<bool>();
    c.is_generator = j["classical"].at("is_generator").get<bool>();
    r.classical = std::move(c);
  }
  if (j.contains("flow")) {
    Report::Flow f;
    f.grid = j["flow"].at("grid").get<std::vector<double>>();
    f.leakage = j["flow"].at("leakage").get<std::vector<double>>();
    f.offdiag = j["flow"].at("offdiag").get<std::vector<double>>();
    r.flow = std::move(f);
  }
  if (j.contains("verify")) {
    Report::Verify v;
    const Json& vj = j["verify"];
    v.cp_trials = vj.at("cp_trials").get<int>();
    v.cp_agreements = vj.at("cp_agreements").get<int>();
    v.cp_disagreements = vj.at("cp_disagreements").get<std::vector<int>>();
    v.gen_trials = vj.at("gen_trials").get<int>();
    v.gen_invariant = vj.at("gen_invariant").get<int>();
    v.zeta_found = vj.at("zeta_found").get<int>();
    v.zeta_failures = vj.at("zeta_failures").get<std::vector<int>>();
    v.ccp_cases = vj.at("ccp_cases").get<int>();
    v.ccp_disagreements = vj.at("ccp_disagreements").get<int>();
    v.fixtures_ok = vj.at("fixtures_ok").get<bool>();
    r.verify = std::move(v);
  }
  r.warnings = j.at("warnings").get<std::vector<std::string>>();
  return r;
}

// ---------------------------------------------------------------------------
// Text rendering
// ---------------------------------------------------------------------------

namespace {

void print_matrix(std::ostream& os, const Matrix& m, const std::string& indent) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    os << indent << "[";
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const Complex z = m(i, j);
      os << " " << z.real();
      if (z.imag() != 0.0) os << (z.imag() > 0 ? "+" : "") << z.imag() << "i";
    }
    os << " ]\n";
  }
}

void print_verdict(std::ostream& os, const char* name, const std::optional<Verdict>& v,
                   const char* evidence_name) {
  if (!v) return;
  os << name << ": " << (v->value ? "yes" : "no") << " (" << evidence_name << " " << v->evidence
     << ")\n";
}

}  // namespace

std::string report_to_text(const Report& r) {
  std::ostringstream os;
  os << "command: " << r.command;
  if (!r.kind.empty()) os << " (" << r.kind << ")";
  os << "\n";
  os << "tolerance: abs " << r.tol.abs_eps << ", rel " << r.tol.rel_eps << "\n";
  print_verdict(os, "maximal commutative", r.maximal_commutative, "defect");
  print_verdict(os, "ccp", r.ccp, "min projected-Choi eigenvalue");
  print_verdict(os, "markov", r.markov, "||L(1)||");
  print_verdict(os, "unital", r.unital, "||T(1) - 1||");
  print_verdict(os, "invariant", r.invariant, "defect");
  if (r.alpha) {
    os << "alpha certificate: " << (r.alpha->found ? "found" : "not found") << " (residual "
       << r.alpha->residual << ", multiplicity " << r.alpha->multiplicity << ")\n";
  }
  if (r.rebolledo) {
    os << "diagonal-coefficient condition: " << (r.rebolledo->found ? "holds" : "fails")
       << " (residual " << r.rebolledo->residual << ")\n";
  }
  if (r.zeta) {
    os << "zeta certificate: " << (r.zeta->found ? "found" : "not found") << "\n";
    if (r.zeta->found) {
      for (std::size_t i = 0; i < r.zeta->blocks.size(); ++i) {
        os << "  block " << i << ":\n";
        print_matrix(os, r.zeta->blocks[i], "    ");
      }
      os << "  gamma:\n";
      print_matrix(os, r.zeta->gamma, "    ");
      os << "  residuals: derivation " << r.zeta->residual_derivation << ", alpha "
         << r.zeta->residual_alpha << ", gamma " << r.zeta->residual_gamma << "\n";
      os << "  implements the derivation globally: " << (r.zeta->global ? "yes" : "no") << "\n";
    } else if (!r.zeta->note.empty()) {
      os << "  note: " << r.zeta->note
         << (r.zeta->search_completeness_failure ? " (search-completeness failure)" : "") << "\n";
    }
  }
  if (r.decomposition) {
    os << "lindblad form (trace-zero gauge)\n";
    os << "  h:\n";
    print_matrix(os, r.decomposition->h, "    ");
    for (std::size_t i = 0; i < r.decomposition->kraus.size(); ++i) {
      os << "  L" << i + 1 << ":\n";
      print_matrix(os, r.decomposition->kraus[i], "    ");
    }
    os << "  beta:\n";
    print_matrix(os, r.decomposition->beta, "    ");
    if (r.decomposition->beta_shift.size() > 0 && r.decomposition->beta_shift.norm() > 0) {
      os << "  non-Markov beta shift:\n";
      print_matrix(os, r.decomposition->beta_shift, "    ");
    }
    os << "  multiplicity: " << r.decomposition->multiplicity << ", GNS Gram rank "
       << r.decomposition->gram_rank << " of dim " << r.decomposition->gram_dim << "\n";
  }
  if (r.classical) {
    os << (r.classical->is_generator ? "classical restriction (Q-matrix)"
                                     : "classical restriction (transition weights)");
    os << (r.classical->is_markov ? ", Markov:\n" : ":\n");
    const RealMatrix& q = r.classical->matrix;
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      os << "  [";
      for (Eigen::Index j = 0; j < q.cols(); ++j) os << " " << q(i, j);
      os << " ]\n";
    }
  }
  if (r.flow) {
    os << "flow diagnostics (t, leakage";
    if (!r.flow->offdiag.empty()) os << ", offdiag norm";
    os << "):\n";
    for (std::size_t i = 0; i < r.flow->grid.size(); ++i) {
      os << "  " << r.flow->grid[i] << "  " << r.flow->leakage[i];
      if (i < r.flow->offdiag.size()) os << "  " << r.flow->offdiag[i];
      os << "\n";
    }
  }
  if (r.verify) {
    const Report::Verify& v = *r.verify;
    os << "certificate crosscheck: " << v.cp_agreements << "/" << v.cp_trials << " agreements";
    if (!v.cp_disagreements.empty()) os << " (DISAGREEMENTS)";
    os << "\n";
    os << "invariant generators: " << v.gen_invariant << "/" << v.gen_trials << ", zeta found "
       << v.zeta_found << ", search failures " << v.zeta_failures.size() << "\n";
    os << "ccp oracle agreement: " << (v.ccp_cases - v.ccp_disagreements) << "/" << v.ccp_cases
       << "\n";
    os << "fixtures: " << (v.fixtures_ok ? "pass" : "FAIL") << "\n";
  }
  for (const std::string& w : r.warnings) os << "warning: " << w << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Command drivers
// ---------------------------------------------------------------------------

namespace {

StarAlgebra build_ambient(const ProblemSpec& spec, const Tolerance& tol) {
  if (spec.ambient_blocks) return StarAlgebra::block_diagonal(*spec.ambient_blocks, tol);
  if (spec.ambient_generators)
    return StarAlgebra::span_closure(*spec.ambient_generators, spec.dim, tol);
  return StarAlgebra::full(spec.dim);
}

CommutativeSubalgebra build_subalgebra(const ProblemSpec& spec, const Tolerance& tol,
                                       std::uint64_t seed, std::vector<std::string>& warnings) {
  switch (spec.subalgebra) {
    case ProblemSpec::Subalgebra::diagonal:
      return CommutativeSubalgebra::diagonal(spec.dim);
    case ProblemSpec::Subalgebra::diagonal_in_basis:
      try {
        return CommutativeSubalgebra::diagonal_in_basis(spec.subalgebra_basis, tol);
      } catch (const PreconditionError& e) {
        throw InputError(std::string("subalgebra: ") + e.what());
      }
    case ProblemSpec::Subalgebra::hermitian_generator: {
      CommutativeSubalgebra c = [&] {
        try {
          return CommutativeSubalgebra::masa_from_hermitian(spec.subalgebra_hermitian, tol);
        } catch (const PreconditionError& e) {
          throw InputError(std::string("subalgebra.hermitian_generator: ") + e.what());
        }
      }();
      if (c.non_unique())
        warnings.push_back(
            "subalgebra: the Hermitian generator has a degenerate spectrum; the diagonal "
            "refinement used here is one of many maximal-abelian choices (non_unique)");
      return c;
    }
    case ProblemSpec::Subalgebra::generators:
    default: {
      StarAlgebra s = StarAlgebra::span_closure(spec.subalgebra_generators, spec.dim, tol);
      try {
        return CommutativeSubalgebra::from_algebra(s, tol, seed);
      } catch (const PreconditionError& e) {
        throw InputError(std::string("subalgebra.generators: ") + e.what());
      }
    }
  }
}

double min_projected_choi_eig(const CcpGenerator& g, const Tolerance& tol) {
  const Eigen::Index n = g.dim();
  Vector omega = vec(identity(n));
  Matrix p = Matrix::Identity(n * n, n * n) - (omega * omega.adjoint()) / double(n);
  const auto eig = eig_hermitian(hermitize(p * g.choi() * p), tol);
  return eig.values.size() ? eig.values.minCoeff() : 0.0;
}

struct BuiltObject {
  std::optional<CpMap> map;
  std::optional<CcpGenerator> gen;
  std::vector<Matrix> kraus_family;  // family used for certificates
};

BuiltObject build_object(const ProblemSpec& spec, const Tolerance& tol) {
  BuiltObject out;
  if (spec.kind == ObjectKind::cp_map) {
    if (spec.lindblad) throw InputError("object.lindblad: requires kind \"generator\"");
    if (spec.kraus) {
      out.map = CpMap::from_kraus(*spec.kraus, spec.dim);
      out.kraus_family = *spec.kraus;
    } else {
      try {
        out.map = CpMap::from_superop(*spec.superop, spec.dim, tol);
      } catch (const NotCompletelyPositive& e) {
        throw InputError(std::string("object.superop: not completely positive (") + e.what() + ")");
      } catch (const PreconditionError& e) {
        throw InputError(std::string("object.superop: ") + e.what());
      }
      out.kraus_family = out.map->kraus();
    }
  } else {
    try {
      if (spec.superop) {
        out.gen = CcpGenerator(*spec.superop, spec.dim, tol);
      } else if (spec.kraus) {
        out.gen = CcpGenerator::from_cp_map(CpMap::from_kraus(*spec.kraus, spec.dim), tol);
        out.kraus_family = *spec.kraus;
      } else {
        out.gen = assemble_lindblad(*spec.lindblad, tol);
        out.kraus_family = spec.lindblad->kraus;
      }
    } catch (const PreconditionError& e) {
      throw InputError(std::string("object: ") + e.what());
    }
  }
  return out;
}

double maximality_defect(const CommutativeSubalgebra& c, const StarAlgebra& ambient,
                         const Tolerance& tol) {
  StarAlgebra rel = commutant(c.algebra(), ambient, tol);
  double worst = std::abs(double(rel.dim() - c.dim()));
  for (const Matrix& b : rel.basis())
    worst = std::max(worst, c.algebra().span_distance(b));
  return worst;
}

}  // namespace

CommandResult run_check(const ProblemSpec& spec, const RunOptions& opts) {
  Report rep;
  rep.command = "check";
  rep.kind = spec.kind == ObjectKind::cp_map ? "cp_map" : "generator";
  rep.tol = opts.tol;
  rep.seed = opts.seed;
  try {
    StarAlgebra ambient = build_ambient(spec, opts.tol);
    CommutativeSubalgebra c = build_subalgebra(spec, opts.tol, opts.seed, rep.warnings);

    double max_defect;
    try {
      max_defect = maximality_defect(c, ambient, opts.tol);
    } catch (const PreconditionError& e) {
      throw InputError(std::string("subalgebra: ") + e.what());
    }
    const bool maximal = max_defect <= opts.tol.bound(1.0);
    rep.maximal_commutative = Verdict{maximal, max_defect};
    if (!maximal) {
      rep.warnings.push_back(
          "refusing to decide invariance: the subalgebra is not maximal commutative in the "
          "ambient algebra, and the certificate criteria require maximality");
      return {rep, 2};
    }

    BuiltObject obj = build_object(spec, opts.tol);

    if (spec.kind == ObjectKind::cp_map) {
      const CpMap& t = *obj.map;
      rep.unital = Verdict{t.is_unital(opts.tol), (t.apply(identity(t.dim())) - identity(t.dim())).norm()};
      const double defect = invariance_defect_cp(t, c);
      const bool invariant = direct_invariant_cp(t, c, opts.tol);
      rep.invariant = Verdict{invariant, defect};

      AlphaSearch alpha = alpha_certificate(obj.kraus_family, c, opts.tol);
      Report::Alpha a;
      a.found = alpha.found();
      a.residual = alpha.best_residual;
      a.multiplicity = static_cast<Eigen::Index>(obj.kraus_family.size());
      if (alpha.found()) a.block_coeffs = alpha.certificate->coeffs;
      rep.alpha = std::move(a);
      if (alpha.found() != invariant)
        rep.warnings.push_back(
            "alpha certificate existence disagrees with the direct invariance test; this "
            "indicates a tolerance pathology and should be reported");

      RebolledoResult reb = rebolledo_check(obj.kraus_family, c, opts.tol);
      rep.rebolledo = Report::Rebolledo{reb.found, reb.max_residual};

      if (invariant) {
        Report::Classical cl;
        cl.matrix = restrict_stochastic(t, c, opts.tol);
        cl.is_markov = false;
        cl.is_generator = false;
        rep.classical = std::move(cl);
      }
      if (opts.remix_trials > 0) {
        RemixExperiment remix = rebolledo_remix_experiment(obj.kraus_family, c, opts.remix_trials,
                                                           opts.seed, opts.tol);
        std::ostringstream note;
        note << "remix experiment: diagonal coefficients after remix in " << remix.successes << "/"
             << remix.trials << " random multiplicity-space rotations";
        rep.warnings.push_back(note.str());
      }
      if (!opts.grid.empty())
        rep.warnings.push_back("flow diagnostics are only available for generators; --grid ignored");
      return {rep, invariant ? 0 : 1};
    }

    const CcpGenerator& g = *obj.gen;
    const double min_eig = min_projected_choi_eig(g, opts.tol);
    const bool ccp = is_ccp(g, opts.tol);
    rep.ccp = Verdict{ccp, min_eig};
    rep.markov = Verdict{is_markov_generator(g, opts.tol), g.apply(identity(g.dim())).norm()};
    const double defect = invariance_defect_gen(g, c);
    const bool invariant = direct_invariant_gen(g, c, opts.tol);
    rep.invariant = Verdict{invariant, defect};

    if (ccp) {
      ZetaSearch zeta = zeta_certificate(g, c, opts.tol, opts.seed);
      Report::Zeta z;
      z.found = zeta.found();
      if (zeta.found()) {
        const ZetaCertificate& cert = *zeta.certificate;
        z.blocks = cert.zeta_blocks;
        z.gamma = cert.gamma;
        z.residual_derivation = cert.residual_derivation;
        z.residual_alpha = cert.residual_alpha;
        z.residual_gamma = cert.residual_gamma;
        z.global = cert.zeta_global;
        Report::Alpha a;
        a.found = true;
        a.residual = cert.alpha.residual;
        a.multiplicity = cert.alpha.multiplicity;
        if (cert.alpha.multiplicity > 0) a.block_coeffs = cert.alpha.coeffs;
        rep.alpha = std::move(a);
      } else {
        z.note = zeta.note;
        z.search_completeness_failure = zeta.search_completeness_failure;
        if (zeta.search_completeness_failure)
          rep.warnings.push_back(
              "zeta search failed on an instance the direct test says is invariant "
              "(search-completeness failure, not evidence of non-invariance)");
      }
      z.gamma = z.gamma.size() ? z.gamma : Matrix::Zero(g.dim(), g.dim());
      rep.zeta = std::move(z);
    } else {
      rep.warnings.push_back("generator is not CCP; certificate search skipped");
    }

    if (invariant) {
      ClassicalGenerator q = restrict_classical(g, c, opts.tol);
      Report::Classical cl;
      cl.matrix = q.q;
      cl.is_markov = q.is_markov;
      cl.is_generator = true;
      rep.classical = std::move(cl);
    }
    if (!opts.grid.empty() && ccp) {
      Report::Flow f;
      f.grid = opts.grid;
      f.leakage = invariance_over_time(g, c, opts.grid, opts.tol);
      Matrix rho0 = Matrix::Constant(g.dim(), g.dim(), Complex(1.0 / double(g.dim()), 0.0));
      f.offdiag = offdiag_decay(g, c, rho0, opts.grid, opts.tol);
      rep.flow = std::move(f);
    }
    if (opts.remix_trials > 0 && !obj.kraus_family.empty()) {
      RemixExperiment remix =
          rebolledo_remix_experiment(obj.kraus_family, c, opts.remix_trials, opts.seed, opts.tol);
      std::ostringstream note;
      note << "remix experiment: diagonal coefficients after remix in " << remix.successes << "/"
           << remix.trials << " random multiplicity-space rotations";
      rep.warnings.push_back(note.str());
    }
    return {rep, invariant ? 0 : 1};
  } catch (const InputError& e) {
    rep.warnings.push_back(e.what());
    return {rep, 2};
  }
}

CommandResult run_decompose(const ProblemSpec& spec, const RunOptions& opts) {
  Report rep;
  rep.command = "decompose";
  rep.kind = "generator";
  rep.tol = opts.tol;
  rep.seed = opts.seed;
  try {
    if (spec.kind != ObjectKind::generator)
      throw InputError("decompose expects a generator spec (kind \"generator\")");
    BuiltObject obj = build_object(spec, opts.tol);
    const CcpGenerator& g = *obj.gen;

    const double min_eig = min_projected_choi_eig(g, opts.tol);
    rep.markov = Verdict{is_markov_generator(g, opts.tol), g.apply(identity(g.dim())).norm()};
    LindbladDecomposition ld;
    try {
      ld = lindblad_decompose(g, opts.tol);
    } catch (const NotConditionallyCompletelyPositive& e) {
      rep.ccp = Verdict{false, e.min_eigenvalue};
      rep.warnings.push_back(e.what());
      return {rep, 1};
    }
    rep.ccp = Verdict{true, min_eig};

    Report::Decomposition d;
    d.h = ld.form.h;
    d.kraus = ld.form.kraus;
    d.beta = ce_from_lindblad(ld.form, opts.tol).beta;
    d.beta_shift = ld.beta_shift;
    d.multiplicity = static_cast<Eigen::Index>(ld.form.kraus.size());
    CcpGnsGram gram = gns_gram(g, opts.tol);
    d.gram_rank = gram.rank;
    d.gram_dim = gram.space_dim;
    rep.decomposition = std::move(d);
    return {rep, 0};
  } catch (const InputError& e) {
    rep.warnings.push_back(e.what());
    return {rep, 2};
  }
}

CommandResult run_verify(const VerifyOptions& opts) {
  Report rep;
  rep.command = "verify";
  rep.tol = opts.tol;
  rep.seed = opts.seed;

  const int trials = opts.fixtures_only ? 0 : opts.trials;
  CrosscheckReport cross = crosscheck_certificates(opts.seed, trials, opts.dim, opts.tol);
  bool fixtures_ok = cross.fixtures_ok;
  if (opts.dim != 2) {
    // Fixtures live on M2; run them regardless of the requested dimension.
    CrosscheckReport fix = crosscheck_certificates(opts.seed, 0, 2, opts.tol);
    fixtures_ok = fix.fixtures_ok;
    for (const std::string& note : fix.notes) rep.warnings.push_back(note);
  }
  for (const std::string& note : cross.notes) rep.warnings.push_back(note);

  CcpAgreementReport ccp_rep;
  if (trials > 0) ccp_rep = ccp_agreement_suite(opts.seed, trials / 2, opts.oracle_trials, opts.dim, opts.tol);

  Report::Verify v;
  v.cp_trials = cross.cp_trials;
  v.cp_agreements = cross.cp_agreements;
  v.cp_disagreements = cross.cp_disagreements;
  v.gen_trials = cross.gen_trials;
  v.gen_invariant = cross.gen_invariant;
  v.zeta_found = cross.zeta_found;
  v.zeta_failures = cross.zeta_failures;
  v.ccp_cases = ccp_rep.cases;
  v.ccp_disagreements = ccp_rep.disagreements;
  v.fixtures_ok = fixtures_ok;
  rep.verify = std::move(v);

  for (int idx : cross.zeta_failures) {
    std::ostringstream note;
    note << "zeta search-completeness failure on invariant generator trial " << idx;
    rep.warnings.push_back(note.str());
  }

  const bool ok = cross.cp_disagreements.empty() && ccp_rep.disagreements == 0 && fixtures_ok &&
                  cross.gen_invariant == cross.gen_trials;
  return {rep, ok ? 0 : 1};
}

}  // namespace qinv

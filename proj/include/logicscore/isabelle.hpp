#pragma once

#include "logicscore/logic.hpp"
#include "logicscore/prover.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace logicscore {

// Proof-method ladder tried in order inside a single `by (m1 | m2 | ...)`.
// "{facts}" expands to the axiom names A1..An.
struct IsabelleTactics {
  std::vector<std::string> methods = {"simp add: {facts}", "blast", "metis {facts}"};
};

// Renders a LogicTheory as an Isabelle/HOL theory document. Identical
// theories produce byte-identical documents.
std::string emit_isabelle(const LogicTheory& theory, const IsabelleTactics& tactics = {});

struct IsabelleConfig {
  std::filesystem::path executable;    // path to the `isabelle` binary
  std::filesystem::path scratch_root;  // session directories live here
  IsabelleTactics tactics;
  int max_procs = 2; // concurrent external prover processes
};

// External-process backend: writes the theory document into a private session
// directory, runs `isabelle build` under the budget's timeout, and classifies
// the output. Lines starting with "*** " become diagnostics verbatim.
class IsabelleProver : public ProverBackend {
public:
  explicit IsabelleProver(IsabelleConfig config);

  ProverVerdict check_text(const std::string& lif_text, const ProofBudget& budget) override;
  ProverVerdict check_document(const std::string& theory_doc, const ProofBudget& budget);
  ProverBackendKind kind() const override { return ProverBackendKind::Isabelle; }

private:
  IsabelleConfig config_;
};

// Exposed separately so output classification is testable without a real
// Isabelle install.
ProverVerdict classify_isabelle_output(int exit_code, bool timed_out, const std::string& output);

ProverVerdict isabelle_check(const std::string& theory_doc, const ProofBudget& budget,
                             const IsabelleConfig& config);

} // namespace logicscore

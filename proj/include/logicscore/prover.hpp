#pragma once

#include "logicscore/logic.hpp"

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

namespace logicscore {

enum class ProverBackendKind { Internal, Isabelle };

// The two-flag judgment consumed by logic-validity scoring: syntax_ok tells
// whether the formal theory was well formed at all, logic_ok whether the goal
// was proven from the axioms.
struct ProverVerdict {
  bool syntax_ok = false;
  bool logic_ok = false; // meaningful only when syntax_ok
  std::vector<std::string> diagnostics;
  ProverBackendKind backend = ProverBackendKind::Internal;
  std::chrono::duration<double> elapsed{0.0};
};

struct ProofBudget {
  int max_depth = 12; // resolution steps per derivation branch
  std::chrono::duration<double> timeout{10.0};
};

enum class ProveOutcome { Valid, Invalid, DepthExhausted };

struct ProveResult {
  ProveOutcome outcome = ProveOutcome::Invalid;
  std::vector<std::string> diagnostics;
};

// Refutation prover for the LIF fragment: clausifies the axioms plus negated
// goal and saturates under binary resolution with unification. Deriving the
// empty clause proves the goal; saturating without it refutes entailment;
// hitting the depth bound or timeout reports DepthExhausted.
//
// Throws UnsupportedFormula when clausification would need a Skolem function
// (an existential inside a universal scope); the fragment has no function
// symbols.
ProveResult internal_prove(const LogicTheory& theory, const ProofBudget& budget);

class ProverBackend {
public:
  virtual ~ProverBackend() = default;
  // Judges raw LIF text: parse failures and unsupported formulas surface as
  // syntax_ok=false with a diagnostic; never throws for bad input.
  virtual ProverVerdict check_text(const std::string& lif_text, const ProofBudget& budget) = 0;
  virtual ProverBackendKind kind() const = 0;
};

class InternalProver : public ProverBackend {
public:
  ProverVerdict check_text(const std::string& lif_text, const ProofBudget& budget) override;
  ProverVerdict check_theory(const LogicTheory& theory, const ProofBudget& budget);
  ProverBackendKind kind() const override { return ProverBackendKind::Internal; }
};

// Dispatch entry point used by the scoring pipeline.
ProverVerdict check(const std::string& lif_text, const ProofBudget& budget,
                    ProverBackend& backend);

} // namespace logicscore

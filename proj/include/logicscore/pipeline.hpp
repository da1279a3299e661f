#pragma once

#include "logicscore/formalize.hpp"
#include "logicscore/gateway.hpp"
#include "logicscore/premise.hpp"
#include "logicscore/prover.hpp"
#include "logicscore/scoring.hpp"

#include <optional>

namespace logicscore {

struct PipelineConfig {
  Weights weights;
  PremiseAggregate pv_aggregate = PremiseAggregate::MeanOfMax;
  ProofBudget budget;
  std::optional<double> default_conf; // fallback when a step has no token probs
  bool use_gold = true;               // false = no-ground-truth mode
  FormalizerConfig formalizer;
};

struct PipelineHandles {
  Gateway& gateway;
  const PromptStore& prompts;
  EmbeddingProvider& embedder;
  ProverBackend& prover;
};

// Scores one response end to end: per-step premise validity, soft
// unification, formalization, the prover verdict mapped through the
// logic-validity branches, then the per-trace aggregate and final score.
// A BackendUnavailable prover degrades that step to the confidence fallback
// with a diagnostic instead of failing the run.
TraceScore score_trace(const ResponseTrace& trace, const Problem& problem,
                       PipelineHandles& handles, const PipelineConfig& config);

} // namespace logicscore

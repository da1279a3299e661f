#pragma once

#include "logicscore/pipeline.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace logicscore {

// Shown to the refinement prompt when the failing step never produced a
// well-formed theory (the syntax-error branch).
inline constexpr const char* kNoTheoryPlaceholder = "(no well-formed theory was produced)";

struct RefinementIteration {
  std::vector<std::string> diagnostics; // prover feedback fed into this attempt
  std::string revised_assumptions;
  ProverVerdict verdict;
};

// Audit record of one step's refinement loop.
struct RefinementRecord {
  std::string problem_id;
  std::string response_id;
  int step_index = 0;
  std::vector<RefinementIteration> iterations;
  ProverVerdict final_verdict;
  bool budget_exhausted = false;
  std::string error_note; // set when a gateway failure aborted the loop
};

// Revises a failing step's soft unification from prover diagnostics: prompt
// the LLM with the step, its current assumptions, the failed theory and the
// error messages; re-formalize and re-verify; stop on success or after
// max_iterations. Premise text and conclusion are never modified. A gateway
// failure aborts the loop, returning the last state with an error note.
std::pair<Step, RefinementRecord> refine_step(const Step& step, const LogicTheory& theory,
                                              const ProverVerdict& verdict,
                                              PipelineHandles& handles,
                                              const PipelineConfig& config,
                                              int max_iterations = 3);

// Seeded uniform sample (without replacement) of up to k responses that
// contain at least one logically invalid step. Returns indices into
// rollout.traces, sorted ascending; deterministic for a fixed seed.
std::vector<std::size_t> select_for_refinement(const RolloutSet& rollout,
                                               const std::vector<TraceScore>& scores, int k,
                                               std::uint64_t seed);

// Re-runs the full scoring path on a refined trace; the result carries
// refined=true so the merged pool can tell copies apart.
TraceScore rescore(const ResponseTrace& refined, const Problem& problem,
                   PipelineHandles& handles, const PipelineConfig& config);

// refinements.jsonl: one record per refined step, diagnostics verbatim.
void write_refinements(const std::filesystem::path& path,
                       const std::vector<RefinementRecord>& records);

} // namespace logicscore

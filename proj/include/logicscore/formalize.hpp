#pragma once

#include "logicscore/gateway.hpp"
#include "logicscore/logic.hpp"
#include "logicscore/trace.hpp"

#include <string>

namespace logicscore {

struct FormalizerConfig {
  std::string model_tag = "gpt-4o";
  SamplingParams sampling{0.0, 1024}; // temperature 0: formalization is not sampled
};

// Asks the LLM for implicit assumptions that bridge the step's premises to
// its conclusion (lexical equivalences, category memberships, commonsense
// facts). The returned step carries the proposed assumptions in
// soft_unification; premise_text and conclusion are never modified. An empty
// proposal leaves the step unchanged.
Step soft_unify(const Step& step, const Problem& problem, Gateway& gateway,
                const PromptStore& prompts, const FormalizerConfig& config = {});

// Asks the LLM to express the step as LIF text: one axiom line per premise or
// assumption sentence plus a goal line for the conclusion. Returns the raw
// text; validation happens in parse_lif.
std::string formalize(const Step& step, Gateway& gateway, const PromptStore& prompts,
                      const FormalizerConfig& config = {});

// Sentences a step's axioms may come from: its premise text plus its
// soft-unification text, sentence-split in order.
std::vector<std::string> step_source_sentences(const Step& step);

// Records which source sentence produced each axiom (1:1 by position when
// the counts line up; unknown otherwise). Used by refinement diagnostics.
void assign_axiom_provenance(LogicTheory& theory, const Step& step);

} // namespace logicscore

#include "logicscore/formalize.hpp"

#include "logicscore/premise.hpp"
#include "logicscore/util.hpp"

namespace logicscore {

namespace {

std::string joined_premises(const Problem& problem) {
  std::string out;
  for (size_t i = 0; i < problem.premises.size(); ++i) {
    if (i) out += " ";
    out += problem.premises[i];
  }
  return out;
}

} // namespace

Step soft_unify(const Step& step, const Problem& problem, Gateway& gateway,
                const PromptStore& prompts, const FormalizerConfig& config) {
  CompletionRequest request;
  request.prompt_id = "soft_unify@v1";
  request.rendered_prompt = prompts.render("soft_unify@v1",
                                           {{"PREMISES", joined_premises(problem)},
                                            {"STEP_PREMISE", step.premise_text},
                                            {"ASSUMPTIONS", step.soft_unification},
                                            {"CONCLUSION", step.conclusion}});
  request.model_tag = config.model_tag;
  request.sampling = config.sampling;

  Completion completion = gateway.complete(request);
  std::string proposal = trim(completion.text);

  Step out = step;
  if (!proposal.empty()) out.soft_unification = proposal;
  return out;
}

std::string formalize(const Step& step, Gateway& gateway, const PromptStore& prompts,
                      const FormalizerConfig& config) {
  std::string sentences;
  for (const std::string& s : step_source_sentences(step)) {
    if (!sentences.empty()) sentences += "\n";
    sentences += s;
  }

  CompletionRequest request;
  request.prompt_id = "formalize@v1";
  request.rendered_prompt = prompts.render(
      "formalize@v1", {{"SENTENCES", sentences}, {"CONCLUSION", step.conclusion}});
  request.model_tag = config.model_tag;
  request.sampling = config.sampling;

  return gateway.complete(request).text;
}

std::vector<std::string> step_source_sentences(const Step& step) {
  std::vector<std::string> out = split_sentences(step.premise_text).sentences;
  for (std::string& s : split_sentences(step.soft_unification).sentences)
    out.push_back(std::move(s));
  return out;
}

void assign_axiom_provenance(LogicTheory& theory, const Step& step) {
  std::vector<std::string> sources = step_source_sentences(step);
  theory.axiom_provenance.assign(theory.axioms.size(), std::string{});
  if (sources.size() == theory.axioms.size()) {
    for (size_t i = 0; i < sources.size(); ++i) theory.axiom_provenance[i] = sources[i];
  }
  theory.source_step = step.index;
}

} // namespace logicscore

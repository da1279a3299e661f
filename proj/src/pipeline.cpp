#include "logicscore/pipeline.hpp"

#include "logicscore/errors.hpp"

namespace logicscore {

TraceScore score_trace(const ResponseTrace& trace, const Problem& problem,
                       PipelineHandles& handles, const PipelineConfig& config) {
  TraceScore result;
  result.problem_id = trace.problem_id;
  result.response_id = trace.response_id;

  for (const Step& step : trace.steps) {
    StepScore score;
    score.step_index = step.index;
    score.premise_validity =
        premise_validity(step, problem.premises, handles.embedder, config.pv_aggregate);

    Step unified = soft_unify(step, problem, handles.gateway, handles.prompts, config.formalizer);
    std::string lif = formalize(unified, handles.gateway, handles.prompts, config.formalizer);

    ProverVerdict verdict;
    try {
      verdict = handles.prover.check_text(lif, config.budget);
    } catch (const BackendUnavailable& e) {
      verdict.backend = handles.prover.kind();
      verdict.syntax_ok = false;
      verdict.logic_ok = false;
      verdict.diagnostics.push_back(std::string("backend unavailable: ") + e.what());
    }

    if (verdict.syntax_ok) {
      score.logic_source = LogicSource::Prover;
      score.logic_validity = logic_validity(verdict, std::nullopt);
    } else {
      score.logic_source = LogicSource::Fallback;
      score.logic_validity = logic_validity(verdict, conf(trace, step.index, config.default_conf));
    }
    score.verdict = std::move(verdict);
    result.step_scores.push_back(std::move(score));
  }

  result.reasoning_validity = reasoning_validity(result.step_scores);
  if (config.use_gold && problem.gold_answer)
    result.outcome_validity = outcome_validity(trace.answer, *problem.gold_answer);
  result.logic_score = logic_score(result.reasoning_validity, result.outcome_validity,
                                   config.weights);
  return result;
}

} // namespace logicscore

#include "logicscore/refine.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/rng.hpp"
#include "logicscore/util.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace logicscore {

using nlohmann::ordered_json;

namespace {

std::string join_diagnostics(const std::vector<std::string>& diagnostics) {
  std::string out;
  for (const std::string& d : diagnostics) {
    if (!out.empty()) out += "\n";
    out += d;
  }
  return out;
}

} // namespace

std::pair<Step, RefinementRecord> refine_step(const Step& step, const LogicTheory& theory,
                                              const ProverVerdict& verdict,
                                              PipelineHandles& handles,
                                              const PipelineConfig& config, int max_iterations) {
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");

  RefinementRecord record;
  record.step_index = step.index;
  record.final_verdict = verdict;

  Step current = step;
  std::vector<std::string> diagnostics = verdict.diagnostics;
  std::string failed_theory =
      theory.goal ? render_lif(theory) : std::string(kNoTheoryPlaceholder);

  for (int iter = 0; iter < max_iterations; ++iter) {
    RefinementIteration it;
    it.diagnostics = diagnostics;

    try {
      CompletionRequest request;
      request.prompt_id = "refine@v1";
      request.rendered_prompt =
          handles.prompts.render("refine@v1", {{"STEP_PREMISE", current.premise_text},
                                               {"ASSUMPTIONS", current.soft_unification},
                                               {"CONCLUSION", current.conclusion},
                                               {"THEORY", failed_theory},
                                               {"DIAGNOSTICS", join_diagnostics(diagnostics)}});
      request.model_tag = config.formalizer.model_tag;
      request.sampling = config.formalizer.sampling;

      std::string proposal = trim(handles.gateway.complete(request).text);
      if (!proposal.empty()) current.soft_unification = proposal;
      it.revised_assumptions = current.soft_unification;

      std::string lif = formalize(current, handles.gateway, handles.prompts, config.formalizer);
      it.verdict = handles.prover.check_text(lif, config.budget);
      if (!(it.verdict.syntax_ok && it.verdict.logic_ok)) {
        try {
          failed_theory = render_lif(parse_lif(lif));
        } catch (const LifSyntaxError&) {
          failed_theory = kNoTheoryPlaceholder;
        }
      }
    } catch (const GatewayError& e) {
      record.error_note = e.what();
      record.budget_exhausted = false;
      return {current, record};
    }

    diagnostics = it.verdict.diagnostics;
    bool success = it.verdict.syntax_ok && it.verdict.logic_ok;
    record.final_verdict = it.verdict;
    record.iterations.push_back(std::move(it));
    if (success) {
      record.budget_exhausted = false;
      return {current, record};
    }
  }

  record.budget_exhausted = true;
  return {current, record};
}

std::vector<std::size_t> select_for_refinement(const RolloutSet& rollout,
                                               const std::vector<TraceScore>& scores, int k,
                                               std::uint64_t seed) {
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < rollout.traces.size(); ++i) {
    const ResponseTrace& trace = rollout.traces[i];
    const TraceScore* score = nullptr;
    for (const TraceScore& s : scores) {
      if (s.problem_id == trace.problem_id && s.response_id == trace.response_id &&
          !s.refined) {
        score = &s;
        break;
      }
    }
    if (!score) continue;
    for (const StepScore& s : score->step_scores) {
      if (!s.verdict.logic_ok) { // includes fallback steps: nothing was proven
        candidates.push_back(i);
        break;
      }
    }
  }
  if (k <= 0) return {};
  if (candidates.size() > static_cast<std::size_t>(k)) {
    Rng rng = derive_stream(seed, "refine-select:" + rollout.problem_id);
    std::vector<std::size_t> picks =
        rng.sample_indices(candidates.size(), static_cast<std::size_t>(k));
    std::vector<std::size_t> out;
    out.reserve(picks.size());
    for (std::size_t p : picks) out.push_back(candidates[p]);
    std::sort(out.begin(), out.end());
    return out;
  }
  return candidates;
}

TraceScore rescore(const ResponseTrace& refined, const Problem& problem,
                   PipelineHandles& handles, const PipelineConfig& config) {
  TraceScore score = score_trace(refined, problem, handles, config);
  score.refined = true;
  return score;
}

// ---------------------------------------------------------------------------
// refinements.jsonl
// ---------------------------------------------------------------------------

namespace {

ordered_json verdict_to_json(const ProverVerdict& v) {
  ordered_json j;
  j["syntax_ok"] = v.syntax_ok;
  j["logic_ok"] = v.logic_ok;
  j["diagnostics"] = v.diagnostics;
  j["backend"] = v.backend == ProverBackendKind::Internal ? "internal" : "isabelle";
  return j;
}

} // namespace

void write_refinements(const std::filesystem::path& path,
                       const std::vector<RefinementRecord>& records) {
  std::ostringstream out;
  for (const RefinementRecord& r : records) {
    ordered_json j;
    j["problem_id"] = r.problem_id;
    j["response_id"] = r.response_id;
    j["step_index"] = r.step_index;
    ordered_json iters = ordered_json::array();
    for (const RefinementIteration& it : r.iterations) {
      ordered_json ji;
      ji["diagnostics"] = it.diagnostics;
      ji["revised_assumptions"] = it.revised_assumptions;
      ji["verdict"] = verdict_to_json(it.verdict);
      iters.push_back(std::move(ji));
    }
    j["iterations"] = std::move(iters);
    j["final_verdict"] = verdict_to_json(r.final_verdict);
    j["budget_exhausted"] = r.budget_exhausted;
    if (!r.error_note.empty()) j["error"] = r.error_note;
    out << j.dump() << "\n";
  }
  atomic_write_file(path, out.str());
}

} // namespace logicscore

#include "logicscore/refine.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/pipeline.hpp"
#include "logicscore/util.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <unistd.h>

using namespace logicscore;
namespace fs = std::filesystem;

#ifndef TEST_PROMPTS_DIR
#define TEST_PROMPTS_DIR "prompts"
#endif

namespace {

const std::map<std::string, std::string> kSentenceLif = {
    {"Rex is a dad.", "dad(rex)"},
    {"Every father cares for children.", "forall X. (father(X) -> cares(X))"},
    {"A dad is the same as a father.", "forall X. (dad(X) -> father(X))"},
    {"Rex naps often.", "naps(rex)"},
    {"Rex cares for children.", "cares(rex)"},
};

std::string slice(const std::string& text, const std::string& from, const std::string& to) {
  size_t a = text.find(from);
  REQUIRE(a != std::string::npos);
  a += from.size();
  size_t b = to.empty() ? text.size() : text.find(to, a);
  REQUIRE(b != std::string::npos);
  return text.substr(a, b - a);
}

// Plays the formalizer and refiner roles over the closed sentence map above.
class MiniModel : public Transport {
public:
  std::string refine_proposal = "A dad is the same as a father.";
  bool refine_helps = true;
  bool fail_gateway = false;
  std::atomic<int> refine_calls{0};

  Completion complete(const CompletionRequest& request) override {
    if (fail_gateway)
      throw GatewayError(GatewayError::Kind::Transport, "injected transport failure", 2);
    Completion c;
    if (request.prompt_id == "soft_unify@v1") {
      c.text = trim(slice(request.rendered_prompt, "Current assumptions:", "\n"));
    } else if (request.prompt_id == "formalize@v1") {
      std::string sentences =
          slice(request.rendered_prompt, "Source sentences:\n", "\n\nConclusion:");
      std::string conclusion =
          trim(slice(request.rendered_prompt, "\nConclusion: ", "\n"));
      for (const std::string& line : split_lines(sentences)) {
        std::string s = trim(line);
        if (s.empty()) continue;
        c.text += "axiom: " + kSentenceLif.at(s) + "\n";
      }
      c.text += "goal: " + kSentenceLif.at(conclusion) + "\n";
    } else if (request.prompt_id == "refine@v1") {
      ++refine_calls;
      c.text = refine_helps ? refine_proposal
                            : trim(slice(request.rendered_prompt, "Current assumptions:", "\n"));
    } else {
      throw GatewayError(GatewayError::Kind::Transport,
                         "unexpected prompt " + request.prompt_id);
    }
    return c;
  }
  std::vector<std::vector<double>> embed(const std::vector<std::string>&) override {
    return {};
  }
  double score(const std::string&, const std::string&) override { return 0.0; }
};

struct Rig {
  fs::path cache;
  MiniModel model;
  Gateway gateway;
  PromptStore prompts;
  LexicalEmbedder embedder;
  InternalProver prover;
  PipelineConfig config;

  Rig()
      : cache(fs::temp_directory_path() /
              ("logicscore-refine-" + std::to_string(::getpid()) + "-" +
               std::to_string(next()))),
        gateway(GatewayMode::Live, cache, &model),
        prompts(TEST_PROMPTS_DIR) {}
  ~Rig() { fs::remove(cache); }

  static int next() {
    static std::atomic<int> c{0};
    return c++;
  }

  PipelineHandles handles() { return {gateway, prompts, embedder, prover}; }
};

Step bridge_step(const std::string& assumptions) {
  Step s;
  s.index = 1;
  s.premise_text = "Rex is a dad. Every father cares for children.";
  s.soft_unification = assumptions;
  s.conclusion = "Rex cares for children.";
  return s;
}

} // namespace

TEST_CASE("refine_step adds the missing bridge and verifies") {
  Rig rig;
  Step step = bridge_step("Rex naps often.");
  std::string lif =
      "axiom: dad(rex)\naxiom: forall X. (father(X) -> cares(X))\naxiom: naps(rex)\n"
      "goal: cares(rex)\n";
  LogicTheory theory = parse_lif(lif);
  ProverVerdict verdict = rig.prover.check_text(lif, rig.config.budget);
  REQUIRE_FALSE(verdict.logic_ok);

  PipelineHandles handles = rig.handles();
  auto [revised, record] = refine_step(step, theory, verdict, handles, rig.config, 3);

  CHECK(revised.soft_unification == "A dad is the same as a father.");
  CHECK(revised.premise_text == step.premise_text);
  CHECK(revised.conclusion == step.conclusion);
  REQUIRE(record.iterations.size() == 1);
  CHECK(record.final_verdict.logic_ok);
  CHECK_FALSE(record.budget_exhausted);
  CHECK(record.iterations[0].diagnostics == verdict.diagnostics);
}

TEST_CASE("refine_step exhausts its budget when nothing helps") {
  Rig rig;
  rig.model.refine_helps = false;
  Step step = bridge_step("Rex naps often.");
  std::string lif =
      "axiom: dad(rex)\naxiom: forall X. (father(X) -> cares(X))\naxiom: naps(rex)\n"
      "goal: cares(rex)\n";
  LogicTheory theory = parse_lif(lif);
  ProverVerdict verdict = rig.prover.check_text(lif, rig.config.budget);

  PipelineHandles handles = rig.handles();
  auto [revised, record] = refine_step(step, theory, verdict, handles, rig.config, 3);

  CHECK(revised.soft_unification == step.soft_unification);
  CHECK(record.iterations.size() == 3);
  CHECK(record.budget_exhausted);
  CHECK_FALSE(record.final_verdict.logic_ok);
}

TEST_CASE("a gateway failure aborts the loop with an error note") {
  Rig rig;
  rig.model.fail_gateway = true;
  Step step = bridge_step("Rex naps often.");
  LogicTheory theory = parse_lif(
      "axiom: dad(rex)\naxiom: naps(rex)\ngoal: cares(rex)\n");
  ProverVerdict verdict;
  verdict.syntax_ok = true;
  verdict.diagnostics = {"no proof found"};

  PipelineHandles handles = rig.handles();
  auto [revised, record] = refine_step(step, theory, verdict, handles, rig.config, 3);
  CHECK(revised.soft_unification == step.soft_unification);
  CHECK(record.iterations.empty());
  CHECK_FALSE(record.budget_exhausted);
  CHECK_FALSE(record.error_note.empty());
}

TEST_CASE("refine_step validates max_iterations") {
  Rig rig;
  Step step = bridge_step("");
  LogicTheory theory;
  ProverVerdict verdict;
  PipelineHandles handles = rig.handles();
  CHECK_THROWS_AS(refine_step(step, theory, verdict, handles, rig.config, 0), ConfigError);
}

namespace {

TraceScore score_with_steps(const std::string& problem_id, const std::string& response_id,
                            std::vector<bool> logic_ok_per_step) {
  TraceScore t;
  t.problem_id = problem_id;
  t.response_id = response_id;
  int index = 0;
  for (bool ok : logic_ok_per_step) {
    StepScore s;
    s.step_index = ++index;
    s.premise_validity = 1.0;
    s.logic_validity = ok ? 1.0 : 0.0;
    s.logic_source = LogicSource::Prover;
    s.verdict.syntax_ok = true;
    s.verdict.logic_ok = ok;
    if (!ok) s.verdict.diagnostics = {"no proof found"};
    t.step_scores.push_back(s);
  }
  t.reasoning_validity = reasoning_validity(t.step_scores);
  t.logic_score = t.reasoning_validity;
  return t;
}

RolloutSet rollout_of(int n) {
  RolloutSet set;
  set.problem_id = "p1";
  for (int i = 0; i < n; ++i) {
    ResponseTrace trace;
    trace.problem_id = "p1";
    trace.response_id = "r" + std::to_string(i);
    Step s;
    s.index = 1;
    s.premise_text = "a.";
    s.conclusion = "b.";
    trace.steps.push_back(s);
    trace.answer = "True";
    set.traces.push_back(trace);
  }
  return set;
}

} // namespace

TEST_CASE("select_for_refinement samples only failing traces, deterministically") {
  RolloutSet rollout = rollout_of(8);
  std::vector<TraceScore> scores;
  // r0, r2, r4, r5, r7 contain an invalid step
  for (int i = 0; i < 8; ++i) {
    bool bad = i == 0 || i == 2 || i == 4 || i == 5 || i == 7;
    scores.push_back(score_with_steps("p1", "r" + std::to_string(i), {true, !bad}));
  }

  std::vector<std::size_t> picked = select_for_refinement(rollout, scores, 2, 7);
  REQUIRE(picked.size() == 2);
  for (std::size_t i : picked) {
    const std::string& id = rollout.traces[i].response_id;
    CHECK((id == "r0" || id == "r2" || id == "r4" || id == "r5" || id == "r7"));
  }
  SUBCASE("fixed seed reproduces the same subset") {
    CHECK(select_for_refinement(rollout, scores, 2, 7) == picked);
    // frozen golden from the first verified run
    std::vector<std::size_t> expected = {5, 7};
    CHECK(picked == expected);
  }
  SUBCASE("a different seed may choose differently but stays in range") {
    auto other = select_for_refinement(rollout, scores, 2, 8);
    CHECK(other.size() == 2);
  }
  SUBCASE("no failing traces yields an empty selection") {
    std::vector<TraceScore> clean;
    for (int i = 0; i < 8; ++i)
      clean.push_back(score_with_steps("p1", "r" + std::to_string(i), {true}));
    CHECK(select_for_refinement(rollout, clean, 2, 7).empty());
  }
  SUBCASE("k larger than the candidate pool returns the whole pool") {
    auto all = select_for_refinement(rollout, scores, 8, 7);
    CHECK(all.size() == 5);
  }
  SUBCASE("fallback steps count as failing") {
    std::vector<TraceScore> with_fallback;
    for (int i = 0; i < 8; ++i) {
      TraceScore t = score_with_steps("p1", "r" + std::to_string(i), {true});
      if (i == 3) {
        t.step_scores[0].logic_source = LogicSource::Fallback;
        t.step_scores[0].verdict.syntax_ok = false;
        t.step_scores[0].verdict.logic_ok = false;
        t.step_scores[0].logic_validity = 0.7;
        t.reasoning_validity = reasoning_validity(t.step_scores);
        t.logic_score = t.reasoning_validity;
      }
      with_fallback.push_back(std::move(t));
    }
    auto picks = select_for_refinement(rollout, with_fallback, 2, 7);
    REQUIRE(picks.size() == 1);
    CHECK(rollout.traces[picks[0]].response_id == "r3");
  }
}

TEST_CASE("score_trace wires premise validity, formalization and the prover together") {
  Rig rig;
  Problem problem;
  problem.id = "p1";
  problem.premises = {"Rex is a dad.", "Every father cares for children."};
  problem.question = "Does Rex care for children?";
  problem.gold_answer = "True";

  ResponseTrace trace;
  trace.problem_id = "p1";
  trace.response_id = "r1";
  trace.steps.push_back(bridge_step("A dad is the same as a father."));
  trace.answer = "True";

  PipelineHandles handles = rig.handles();
  TraceScore score = score_trace(trace, problem, handles, rig.config);
  REQUIRE(score.step_scores.size() == 1);
  CHECK(score.step_scores[0].premise_validity == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(score.step_scores[0].logic_validity == 1.0);
  CHECK(score.reasoning_validity == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(score.outcome_validity == 1);
  CHECK(score.logic_score == doctest::Approx(1.0).epsilon(1e-9));

  SUBCASE("rescore flags the result as refined") {
    TraceScore rescored = rescore(trace, problem, handles, rig.config);
    CHECK(rescored.refined);
    CHECK(rescored.logic_score == doctest::Approx(score.logic_score));
  }
  SUBCASE("no-ground-truth mode drops the outcome term") {
    rig.config.use_gold = false;
    TraceScore ngt = score_trace(trace, problem, handles, rig.config);
    CHECK_FALSE(ngt.outcome_validity.has_value());
    CHECK(ngt.logic_score == doctest::Approx(ngt.reasoning_validity));
  }
}

namespace {

class DownProver : public ProverBackend {
public:
  ProverVerdict check_text(const std::string&, const ProofBudget&) override {
    throw BackendUnavailable("prover host is offline");
  }
  ProverBackendKind kind() const override { return ProverBackendKind::Isabelle; }
};

} // namespace

TEST_CASE("an unavailable backend degrades a step to the confidence fallback") {
  Rig rig;
  DownProver down;
  PipelineHandles handles{rig.gateway, rig.prompts, rig.embedder, down};

  Problem problem;
  problem.id = "p1";
  problem.premises = {"Rex is a dad.", "Every father cares for children."};
  problem.question = "?";
  problem.gold_answer = "True";

  ResponseTrace trace;
  trace.problem_id = "p1";
  trace.response_id = "r1";
  trace.steps.push_back(bridge_step("A dad is the same as a father."));
  trace.answer = "True";

  SUBCASE("without token data and no default, the failure is loud") {
    CHECK_THROWS_AS(score_trace(trace, problem, handles, rig.config), MissingTokenProbs);
  }
  SUBCASE("a configured default keeps the run going") {
    rig.config.default_conf = 0.5;
    TraceScore score = score_trace(trace, problem, handles, rig.config);
    REQUIRE(score.step_scores.size() == 1);
    CHECK(score.step_scores[0].logic_source == LogicSource::Fallback);
    CHECK(score.step_scores[0].logic_validity == 0.5);
    CHECK_FALSE(score.step_scores[0].verdict.syntax_ok);
    REQUIRE_FALSE(score.step_scores[0].verdict.diagnostics.empty());
    CHECK(score.step_scores[0].verdict.diagnostics[0].find("backend unavailable") !=
          std::string::npos);
  }
}

TEST_CASE("soft_unify replaces assumptions and never touches the rest") {
  Rig rig;
  Problem problem;
  problem.id = "p1";
  problem.premises = {"Rex is a dad.", "Every father cares for children."};
  problem.question = "?";

  Step step = bridge_step("Rex naps often.");
  Step unified = soft_unify(step, problem, rig.gateway, rig.prompts);
  // the MiniModel echoes the current assumptions
  CHECK(unified.soft_unification == "Rex naps often.");
  CHECK(unified.premise_text == step.premise_text);
  CHECK(unified.conclusion == step.conclusion);
}

TEST_CASE("formalized axioms map one-to-one onto the step's source sentences") {
  Rig rig;
  Step step = bridge_step("A dad is the same as a father.");
  std::string lif = formalize(step, rig.gateway, rig.prompts);
  LogicTheory theory = parse_lif(lif);
  assign_axiom_provenance(theory, step);

  std::vector<std::string> sources = step_source_sentences(step);
  REQUIRE(theory.axioms.size() == sources.size());
  for (size_t i = 0; i < sources.size(); ++i) CHECK(theory.axiom_provenance[i] == sources[i]);
  CHECK(theory.source_step == step.index);
}

TEST_CASE("refinements.jsonl keeps diagnostics verbatim") {
  fs::path path = fs::temp_directory_path() /
                  ("logicscore-refinements-" + std::to_string(::getpid()) + ".jsonl");
  RefinementRecord record;
  record.problem_id = "p1";
  record.response_id = "r1";
  record.step_index = 2;
  RefinementIteration it;
  it.diagnostics = {"no proof found for goal cares(rex)", "predicate 'father' missing"};
  it.revised_assumptions = "A dad is the same as a father.";
  it.verdict.syntax_ok = true;
  it.verdict.logic_ok = true;
  record.iterations.push_back(it);
  record.final_verdict = it.verdict;
  write_refinements(path, {record});

  std::string content = read_file(path);
  CHECK(content.find("predicate 'father' missing") != std::string::npos);
  CHECK(content.find("\"budget_exhausted\":false") != std::string::npos);
  fs::remove(path);
}

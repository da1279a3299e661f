// Builds the bundled mini-corpus: problems.jsonl, rollouts.jsonl and the
// record/replay cache that lets the whole pipeline run offline. A scripted
// transport stands in for the language models; every response it produces is
// registered up front from a closed sentence vocabulary, then the real
// pipeline commands run in record mode to capture the cache.
//
// Regeneration is deterministic: rerunning this tool reproduces every output
// byte for byte.

#include "logicscore/commands.hpp"
#include "logicscore/errors.hpp"
#include "logicscore/io.hpp"
#include "logicscore/refine.hpp"
#include "logicscore/rng.hpp"
#include "logicscore/util.hpp"

#include <filesystem>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace logicscore;

namespace {

constexpr std::uint64_t kGenSeed = 20240901;

// ---------------------------------------------------------------------------
// vocabulary
// ---------------------------------------------------------------------------

struct Chain {
  std::string action_3p;   // "reads old maps"
  std::string action_base; // "read old maps"
  std::string action_pred;
  std::string adj1, adj1_pred;
  std::string adj2, adj2_pred;
};

struct SynPair {
  std::string a, b;        // "dad", "father"
  std::string vp_3p;       // "tends the garden"
  std::string vp_pred;
};

const std::vector<std::string> kNames = {
    "Harry", "Fiona", "Rex",  "Milo", "Tina", "Ben",  "Luna", "Ace",
    "Nora",  "Omar",  "Pia",  "Quinn", "Rosa", "Sam",  "Tess", "Umar",
    "Vera",  "Wes",   "Xena", "Yara", "Ziggy", "Clara"};

const std::vector<Chain> kChains = {
    {"reads old maps", "read old maps", "reads_old_maps", "wise", "wise", "calm", "calm"},
    {"collects rare coins", "collect rare coins", "collects_rare_coins", "patient", "patient",
     "careful", "careful"},
    {"grows tomatoes", "grow tomatoes", "grows_tomatoes", "gentle", "gentle", "happy", "happy"},
    {"studies the stars", "study the stars", "studies_the_stars", "curious", "curious",
     "bright", "bright"},
    {"paints landscapes", "paint landscapes", "paints_landscapes", "creative", "creative",
     "cheerful", "cheerful"},
    {"swims at dawn", "swim at dawn", "swims_at_dawn", "brave", "brave", "healthy", "healthy"},
};

const std::vector<SynPair> kSyns = {
    {"dad", "father", "tends the garden", "tends_garden"},
    {"kid", "child", "feeds the cat", "feeds_cat"},
    {"doc", "doctor", "files reports", "files_reports"},
    {"mom", "mother", "bakes bread", "bakes_bread"},
    {"cop", "officer", "directs traffic", "directs_traffic"},
    {"prof", "professor", "grades essays", "grades_essays"},
};

// marker value: this sentence formalizes into a broken axiom line
const std::string kMalformed = "\x01malformed";

std::string lower(const std::string& s) { return to_lower(s); }

// ---------------------------------------------------------------------------
// one problem's world
// ---------------------------------------------------------------------------

struct World {
  std::string id;
  std::string name, cname, other;
  Chain chain;
  SynPair syn;
  bool has_gold = true;

  std::vector<std::string> premises;
  std::string question;

  // sentences
  std::string s_action;      // "Harry reads old maps."
  std::string s_rule;        // "People who read old maps will be wise."
  std::string s_rule2;       // "Everyone who is wise will be calm."
  std::string s_member;      // "Harry is a dad."
  std::string s_synrule;     // "Every father tends the garden."
  std::string s_distractor;  // "Fiona naps in the afternoon."
  std::string s_bridge;      // "A dad is the same as a father."
  std::string s_person1, s_person2; // "Harry is a person." "A person is people."
  std::string s_filler;      // "Harry enjoys routine."
  std::string s_weird;       // assumption that breaks formalization
  std::string s_fab, s_fabrule, s_fab2; // ungrounded premises
  std::string c_adj1, c_adj2, c_syn, c_fab, c_junk, c_action;

  std::map<std::string, std::string> lif; // sentence -> formula text
};

World build_world(size_t i) {
  World w;
  w.id = (i + 1 < 10 ? "p0" : "p") + std::to_string(i + 1);
  w.name = kNames[i % kNames.size()];
  w.cname = lower(w.name);
  w.other = kNames[(i + 1) % kNames.size()];
  w.chain = kChains[i % kChains.size()];
  w.syn = kSyns[i % kSyns.size()];
  w.has_gold = !(i == 7 || i == 15);

  const Chain& c = w.chain;
  const SynPair& sp = w.syn;

  w.s_action = w.name + " " + c.action_3p + ".";
  w.s_rule = "People who " + c.action_base + " will be " + c.adj1 + ".";
  w.s_rule2 = "Everyone who is " + c.adj1 + " will be " + c.adj2 + ".";
  w.s_member = w.name + " is a " + sp.a + ".";
  w.s_synrule = "Every " + sp.b + " " + sp.vp_3p + ".";
  w.s_distractor = w.other + " naps in the afternoon.";
  w.s_bridge = "A " + sp.a + " is the same as a " + sp.b + ".";
  w.s_person1 = w.name + " is a person.";
  w.s_person2 = "A person is people.";
  w.s_filler = w.name + " enjoys routine.";
  w.s_weird = "It stands to reason that the outcome follows.";
  w.s_fab = w.name + " owns a telescope.";
  w.s_fabrule = "Telescope owners stay restless.";
  w.s_fab2 = "The telescope hums.";

  w.c_adj1 = w.name + " will be " + c.adj1 + ".";
  w.c_adj2 = w.name + " will be " + c.adj2 + ".";
  w.c_syn = w.name + " " + sp.vp_3p + ".";
  w.c_fab = w.name + " will be restless.";
  w.c_junk = "The night is long.";
  w.c_action = w.name + " " + c.action_3p + "."; // same text as s_action

  w.premises = {w.s_action, w.s_rule, w.s_rule2, w.s_member, w.s_synrule, w.s_distractor};
  w.question = "Will " + w.name + " be " + c.adj2 + "? Answer with true/false/unknown.";

  const std::string n = w.cname;
  auto all_x = [](const std::string& p, const std::string& q) {
    return "forall X. (" + p + "(X) -> " + q + "(X))";
  };
  w.lif[w.s_action] = c.action_pred + "(" + n + ")";
  w.lif[w.s_rule] = all_x(c.action_pred, c.adj1_pred);
  w.lif[w.s_rule2] = all_x(c.adj1_pred, c.adj2_pred);
  w.lif[w.s_member] = sp.a + "(" + n + ")";
  w.lif[w.s_synrule] = all_x(sp.b, sp.vp_pred);
  w.lif[w.s_distractor] = "naps_afternoon(" + lower(w.other) + ")";
  w.lif[w.s_bridge] = all_x(sp.a, sp.b);
  w.lif[w.s_person1] = "person(" + n + ")";
  w.lif[w.s_person2] = all_x("person", "people");
  w.lif[w.s_filler] = "enjoys_routine(" + n + ")";
  w.lif[w.s_weird] = kMalformed;
  w.lif[w.s_fab] = "owns_telescope(" + n + ")";
  w.lif[w.s_fabrule] = all_x("owns_telescope", "restless");
  w.lif[w.s_fab2] = "hums(telescope)";
  w.lif[w.c_adj1] = c.adj1_pred + "(" + n + ")";
  w.lif[w.c_adj2] = c.adj2_pred + "(" + n + ")";
  w.lif[w.c_syn] = sp.vp_pred + "(" + n + ")";
  w.lif[w.c_fab] = "restless(" + n + ")";
  w.lif[w.c_junk] = "long(night)";
  return w;
}

// ---------------------------------------------------------------------------
// rollout profiles
// ---------------------------------------------------------------------------

struct StepSpec {
  std::string premise;
  std::string assumptions;
  std::string conclusion;
  // scripted responses
  std::string soft_unify_response;  // what the scoring-stage model proposes
  std::string refine_response;      // what refinement proposes (empty = echo)
};

struct ProfileSpec {
  std::vector<StepSpec> steps;
  bool answer_correct = true;
};

// The eight response profiles rotated across the rollout slots.
ProfileSpec make_profile(const World& w, int profile) {
  const std::string person = w.s_person1 + " " + w.s_person2;
  ProfileSpec p;
  switch (profile) {
    case 0: // two clean hops
      p.steps.push_back({w.s_action + " " + w.s_rule, person, w.c_adj1, person, ""});
      p.steps.push_back({w.c_adj1 + " " + w.s_rule2, "", w.c_adj2, "", ""});
      p.answer_correct = true;
      break;
    case 1: // soft unification supplies the missing bridge during scoring
      p.steps.push_back({w.s_member + " " + w.s_synrule, "", w.c_syn, w.s_bridge, ""});
      p.answer_correct = true;
      break;
    case 2: // bridge missing; only refinement adds it
      p.steps.push_back(
          {w.s_member + " " + w.s_synrule, w.s_filler, w.c_syn, w.s_filler, w.s_bridge});
      p.answer_correct = true;
      break;
    case 3: // assumption that garbles formalization; refinement rewrites it
      p.steps.push_back({w.s_action + " " + w.s_rule, w.s_weird, w.c_adj1, w.s_weird, person});
      p.answer_correct = false;
      break;
    case 4: // fabricated premises and a junk second step
      p.steps.push_back({w.s_fab + " " + w.s_fabrule, "", w.c_fab, "", ""});
      p.steps.push_back({w.s_fab2, "", w.c_junk, "", ""});
      p.answer_correct = false;
      break;
    case 5: // affirming the consequent; no assumption can save it
      p.steps.push_back({w.s_rule + " " + w.c_adj1, "", w.c_action, "", ""});
      p.answer_correct = true;
      break;
    case 6: // sound reasoning, wrong final answer
      p.steps.push_back({w.s_action + " " + w.s_rule + " " + w.s_rule2, person, w.c_adj2,
                         person, ""});
      p.answer_correct = false;
      break;
    case 7: // one clean hop, one bridge-missing hop
      p.steps.push_back({w.s_action + " " + w.s_rule, person, w.c_adj1, person, ""});
      p.steps.push_back(
          {w.s_member + " " + w.s_synrule, w.s_filler, w.c_syn, w.s_filler, w.s_bridge});
      p.answer_correct = false;
      break;
    default:
      throw std::logic_error("unknown profile");
  }
  return p;
}

// Raw response text; qwen slots use the "Assumption:" label alias for texture.
std::string render_response(const ProfileSpec& p, bool alias_label, bool answer_true_means) {
  std::ostringstream out;
  int index = 1;
  for (const StepSpec& s : p.steps) {
    out << "Step " << index++ << ":\n";
    out << "Premise: " << s.premise << "\n";
    out << (alias_label ? "Assumption: " : "Soft Unification: ") << s.assumptions << "\n";
    out << "Conclusion: " << s.conclusion << "\n\n";
  }
  bool says_true = p.answer_correct == answer_true_means;
  out << "Final answer: [" << (says_true ? "True" : "False") << "]\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// scripted transport
// ---------------------------------------------------------------------------

class ScriptedTransport : public Transport {
public:
  std::map<std::string, Completion> responses; // key: prompt_id|model|idx|prompt

  static std::string key(const CompletionRequest& r) {
    return r.prompt_id + "\x1f" + r.model_tag + "\x1f" + std::to_string(r.sample_index) +
           "\x1f" + r.rendered_prompt;
  }

  Completion complete(const CompletionRequest& request) override {
    auto it = responses.find(key(request));
    if (it == responses.end())
      throw GatewayError(GatewayError::Kind::Transport,
                         "scripted transport has no response for prompt_id=" +
                             request.prompt_id + " model=" + request.model_tag + " sample=" +
                             std::to_string(request.sample_index));
    return it->second;
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>&) override {
    throw GatewayError(GatewayError::Kind::Transport, "scripted transport has no embedder");
  }

  double score(const std::string&, const std::string&) override {
    throw GatewayError(GatewayError::Kind::Transport, "scripted transport has no scorer");
  }
};

// whitespace-preserving tokenization; concatenating the tokens reproduces the
// text exactly, so conclusion alignment always succeeds
std::vector<std::pair<std::string, double>> tokenize(const std::string& text, Rng& rng) {
  std::vector<std::pair<std::string, double>> tokens;
  size_t i = 0;
  while (i < text.size()) {
    size_t start = i;
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) break;
    double p = 0.55 + 0.40 * rng.uniform01();
    tokens.emplace_back(text.substr(start, i - start), round6(p));
  }
  return tokens;
}

// ---------------------------------------------------------------------------
// registration
// ---------------------------------------------------------------------------

struct Fixturer {
  PromptStore prompts;
  ScriptedTransport transport;
  InternalProver prover;
  ProofBudget budget;
  FormalizerConfig formalizer; // defaults match RunOptions defaults

  explicit Fixturer(const fs::path& prompts_dir) : prompts(prompts_dir) {}

  std::string premises_joined(const World& w) {
    std::string out;
    for (size_t i = 0; i < w.premises.size(); ++i) {
      if (i) out += " ";
      out += w.premises[i];
    }
    return out;
  }

  std::string lif_for_step(const World& w, const Step& step) {
    std::string text;
    for (const std::string& sentence : step_source_sentences(step)) {
      auto it = w.lif.find(sentence);
      if (it == w.lif.end())
        throw std::logic_error("no formula registered for sentence: " + sentence);
      if (it->second == kMalformed) {
        text += "axiom: follows(\n"; // deliberately unparseable
      } else {
        text += "axiom: " + it->second + "\n";
      }
    }
    auto it = w.lif.find(step.conclusion);
    if (it == w.lif.end())
      throw std::logic_error("no formula registered for conclusion: " + step.conclusion);
    text += "goal: " + it->second + "\n";
    return text;
  }

  void register_completion(const std::string& prompt_id, const std::string& prompt,
                           const std::string& model, int sample_index,
                           Completion completion) {
    CompletionRequest r;
    r.prompt_id = prompt_id;
    r.rendered_prompt = prompt;
    r.model_tag = model;
    r.sample_index = sample_index;
    transport.responses[ScriptedTransport::key(r)] = std::move(completion);
  }

  std::string soft_unify_prompt(const World& w, const Step& step) {
    return prompts.render("soft_unify@v1", {{"PREMISES", premises_joined(w)},
                                            {"STEP_PREMISE", step.premise_text},
                                            {"ASSUMPTIONS", step.soft_unification},
                                            {"CONCLUSION", step.conclusion}});
  }

  std::string formalize_prompt(const Step& step) {
    std::string sentences;
    for (const std::string& s : step_source_sentences(step)) {
      if (!sentences.empty()) sentences += "\n";
      sentences += s;
    }
    return prompts.render("formalize@v1",
                          {{"SENTENCES", sentences}, {"CONCLUSION", step.conclusion}});
  }

  // Registers the scoring-stage chain for a step and, when the step fails,
  // the refinement chain as well.
  void register_step(const World& w, const StepSpec& spec, int index) {
    Step original;
    original.index = index;
    original.premise_text = spec.premise;
    original.soft_unification = spec.assumptions;
    original.conclusion = spec.conclusion;

    register_completion("soft_unify@v1", soft_unify_prompt(w, original), formalizer.model_tag,
                        0, Completion{spec.soft_unify_response, std::nullopt});

    Step unified = original;
    if (!trim(spec.soft_unify_response).empty())
      unified.soft_unification = trim(spec.soft_unify_response);

    std::string lif = lif_for_step(w, unified);
    register_completion("formalize@v1", formalize_prompt(unified), formalizer.model_tag, 0,
                        Completion{lif, std::nullopt});

    ProverVerdict verdict = prover.check_text(lif, budget);
    if (verdict.logic_ok) return;

    // refinement chain: prompt with the failed theory and diagnostics
    std::string theory_text;
    try {
      theory_text = render_lif(parse_lif(lif));
    } catch (const LifSyntaxError&) {
      theory_text = kNoTheoryPlaceholder;
    }
    std::string diagnostics;
    for (size_t d = 0; d < verdict.diagnostics.size(); ++d) {
      if (d) diagnostics += "\n";
      diagnostics += verdict.diagnostics[d];
    }
    std::string refine_prompt =
        prompts.render("refine@v1", {{"STEP_PREMISE", unified.premise_text},
                                     {"ASSUMPTIONS", unified.soft_unification},
                                     {"CONCLUSION", unified.conclusion},
                                     {"THEORY", theory_text},
                                     {"DIAGNOSTICS", diagnostics}});
    register_completion("refine@v1", refine_prompt, formalizer.model_tag, 0,
                        Completion{spec.refine_response, std::nullopt});

    if (trim(spec.refine_response).empty()) return; // echo: loop repeats identically

    Step refined = unified;
    refined.soft_unification = trim(spec.refine_response);
    std::string refined_lif = lif_for_step(w, refined);
    register_completion("formalize@v1", formalize_prompt(refined), formalizer.model_tag, 0,
                        Completion{refined_lif, std::nullopt});
    // rescore runs soft unification over the refined step; it stands pat
    register_completion("soft_unify@v1", soft_unify_prompt(w, refined), formalizer.model_tag,
                        0, Completion{refined.soft_unification, std::nullopt});

    ProverVerdict after = prover.check_text(refined_lif, budget);
    if (!after.logic_ok)
      throw std::logic_error("refinement response for step did not verify: " +
                             refined.conclusion);
  }

  void register_world(const World& w, Rng& token_rng) {
    std::string rollout_prompt =
        prompts.render("rollout@v1", {{"PREMISES", premises_joined(w)},
                                      {"QUESTION", w.question}});

    const std::vector<std::pair<std::string, int>> split = {{"qwen3-8b", 5}, {"gpt-4o", 3}};
    size_t world_index = static_cast<size_t>(std::stoi(w.id.substr(1)) - 1);
    int slot = 0;
    for (const auto& [model, count] : split) {
      for (int k = 0; k < count; ++k, ++slot) {
        int profile = static_cast<int>((static_cast<size_t>(slot) + world_index) % 8);
        ProfileSpec spec = make_profile(w, profile);
        bool alias = model == "qwen3-8b";
        std::string text = render_response(spec, alias, /*answer_true_means=*/true);
        Completion completion;
        completion.text = text;
        completion.token_probs = tokenize(text, token_rng);
        register_completion("rollout@v1", rollout_prompt, model, k, std::move(completion));

        int index = 1;
        for (const StepSpec& s : spec.steps) register_step(w, s, index++);
      }
    }
  }
};

} // namespace

int main(int argc, char** argv) {
  fs::path out_dir = "fixtures";
  if (argc > 1) out_dir = argv[1];
  fs::path repo_prompts = argc > 2 ? fs::path(argv[2]) : fs::path("prompts");

  try {
    fs::create_directories(out_dir);
    fs::path problems_path = out_dir / "problems.jsonl";
    fs::path rollouts_path = out_dir / "rollouts.jsonl";
    fs::path cache_path = out_dir / "cache.jsonl";
    fs::remove(rollouts_path);
    fs::remove(cache_path);

    // worlds and problems.jsonl
    std::vector<World> worlds;
    std::vector<Problem> problems;
    for (size_t i = 0; i < 22; ++i) {
      World w = build_world(i);
      Problem p;
      p.id = w.id;
      p.premises = w.premises;
      p.question = w.question;
      if (w.has_gold) p.gold_answer = "True";
      problems.push_back(p);
      worlds.push_back(std::move(w));
    }
    write_problems(problems_path, problems);

    // scripted responses
    Fixturer fixturer(repo_prompts);
    Rng token_rng = derive_stream(kGenSeed, "tokens");
    for (const World& w : worlds) fixturer.register_world(w, token_rng);

    // record-mode pipeline run captures the cache
    fs::path scratch = out_dir / "_scratch";
    fs::create_directories(scratch);

    RunOptions options;
    options.problems = problems_path;
    options.cache = cache_path;
    options.prompts_dir = repo_prompts;
    options.mode = GatewayMode::Record;
    options.transport_override = &fixturer.transport;
    options.jobs = 1; // keep the cache file append order deterministic

    options.out = rollouts_path;
    RunManifest rollout_manifest = run_rollout(options);
    if (rollout_manifest.counts.at("traces_parsed") != 176)
      throw std::logic_error("expected 176 parsed rollouts");

    options.rollouts = rollouts_path;
    options.out = scratch / "scored.jsonl";
    RunManifest score_manifest = run_score(options);
    if (score_manifest.counts.at("traces_rejected") != 0)
      throw std::logic_error("fixture rollouts must all parse");

    options.scored = scratch / "scored.jsonl";
    options.refined = scratch / "refined.jsonl";
    options.refined_scored = scratch / "refined_scored.jsonl";
    options.refinements = scratch / "refinements.jsonl";
    RunManifest refine_manifest = run_refine(options);
    if (refine_manifest.counts.at("traces_refined") != 44)
      throw std::logic_error("expected 2 refined traces per problem");
    if (refine_manifest.counts.at("steps_fixed") < 5)
      throw std::logic_error("refinement fixed implausibly few steps");

    fs::remove_all(scratch);
    fs::remove(manifest_path_for(rollouts_path)); // fixtures ship without manifests

    std::cout << "fixtures written to " << out_dir.string() << "\n"
              << "  problems: " << problems.size() << "\n"
              << "  rollouts: " << rollout_manifest.counts.at("traces_parsed") << "\n"
              << "  refined:  " << refine_manifest.counts.at("traces_refined") << " traces, "
              << refine_manifest.counts.at("steps_fixed") << " steps fixed\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "mkfixtures: " << e.what() << "\n";
    return 1;
  }
}

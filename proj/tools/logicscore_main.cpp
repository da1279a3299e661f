// logicscore: scores reasoning traces for step-level logical validity with a
// theorem prover, refines failing steps from prover diagnostics, and builds
// SFT/DPO datasets from the scored rollouts.

#include "logicscore/commands.hpp"
#include "logicscore/errors.hpp"

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

namespace {

using namespace logicscore;

// exit codes: 2 config, 3 I/O, 4 backend; CI tells environment failures
// apart from logic failures this way
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitBackend = 4;

GatewayMode parse_mode(const std::string& value) {
  if (value == "live") return GatewayMode::Live;
  if (value == "record") return GatewayMode::Record;
  if (value == "replay") return GatewayMode::Replay;
  throw ConfigError("mode must be live|record|replay, got '" + value + "'");
}

Weights parse_weights(const std::string& value) {
  size_t comma = value.find(',');
  if (comma == std::string::npos)
    throw ConfigError("--weights expects w1,w2 (e.g. 0.5,0.5)");
  Weights w;
  try {
    w.w1 = std::stod(value.substr(0, comma));
    w.w2 = std::stod(value.substr(comma + 1));
  } catch (const std::exception&) {
    throw ConfigError("cannot parse weights '" + value + "'");
  }
  w.validate();
  return w;
}

PairStrategy parse_strategy(const std::string& value) {
  if (value == "maxmin") return PairStrategy::MaxMin;
  if (value == "dual") return PairStrategy::DualThreshold;
  if (value == "random") return PairStrategy::RandomMid;
  throw ConfigError("strategy must be maxmin|dual|random, got '" + value + "'");
}

struct CliState {
  RunOptions options;
  std::string mode = "replay";
  std::string weights = "0.5,0.5";
  std::string strategy = "maxmin";
  std::string compare;
  double default_conf = -1.0; // <0 means unset
};

void add_common_flags(CLI::App* cmd, CliState& state) {
  cmd->add_option("--mode", state.mode, "gateway mode: live|record|replay");
  cmd->add_option("--cache", state.options.cache, "record/replay cache file (JSONL)");
  cmd->add_option("--prompts-dir", state.options.prompts_dir, "prompt asset directory");
  cmd->add_option("--jobs", state.options.jobs, "worker threads (0 = auto)");
  cmd->add_option("--seed", state.options.seed, "seed feeding every random sub-stream");
  cmd->add_option("--api-base", state.options.http.base_url, "provider base url (live mode)");
  cmd->add_option("--api-key-env", state.options.http.api_key_env,
                  "env var holding the provider credential");
}

void add_scoring_flags(CLI::App* cmd, CliState& state) {
  cmd->add_option("--prover", state.options.prover, "prover backend: internal|isabelle");
  cmd->add_option("--embedder", state.options.embedder, "embedding provider: lexical|remote");
  cmd->add_option("--weights", state.weights, "w1,w2 for reasoning/outcome validity");
  cmd->add_flag("--no-ground-truth", state.options.no_ground_truth,
                "score without outcome signals (score = reasoning validity)");
  cmd->add_option("--pv-aggregate", state.options.pv_aggregate,
                  "premise-validity aggregation: mean|max");
  cmd->add_option("--default-conf", state.default_conf,
                  "confidence for steps without token probabilities");
  cmd->add_option("--max-depth", state.options.max_depth, "prover depth budget");
  cmd->add_option("--prover-timeout", state.options.prover_timeout,
                  "internal prover timeout, seconds");
  cmd->add_option("--isabelle-path", state.options.isabelle_path, "isabelle executable");
  cmd->add_option("--isabelle-timeout", state.options.isabelle_timeout,
                  "external prover timeout, seconds");
  cmd->add_option("--max-prover-procs", state.options.max_prover_procs,
                  "concurrent external prover processes");
  cmd->add_option("--formalize-model", state.options.formalize_model,
                  "model tag used for soft unification and formalization");
}

void finalize(CliState& state) {
  state.options.mode = parse_mode(state.mode);
  state.options.weights = parse_weights(state.weights);
  if (state.default_conf >= 0.0) {
    if (state.default_conf > 1.0) throw ConfigError("--default-conf must be in [0,1]");
    state.options.default_conf = state.default_conf;
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"step-level logical-validity scoring and dataset construction"};
  app.require_subcommand(1);
  app.set_config("--config", "", "flat key=value config file mirroring the flags");

  CliState state;

  CLI::App* ingest = app.add_subcommand("ingest", "validate problems and rollouts");
  ingest->add_option("--problems", state.options.problems, "problems.jsonl")->required();
  ingest->add_option("--rollouts", state.options.rollouts, "rollouts.jsonl");
  ingest->add_option("-o,--out", state.options.out, "manifest basename");

  CLI::App* rollout = app.add_subcommand("rollout", "sample formatted responses per problem");
  rollout->add_option("--problems", state.options.problems, "problems.jsonl")->required();
  rollout->add_option("-o,--out", state.options.out, "rollouts.jsonl")->required();
  rollout->add_option("--n", state.options.rollout_n, "responses per problem");
  rollout->add_option("--split", state.options.rollout_split,
                      "per-model sample counts, e.g. qwen3-8b=5,gpt-4o=3");
  rollout->add_option("--temperature", state.options.temperature, "sampling temperature");
  rollout->add_option("--max-tokens", state.options.max_tokens, "completion length cap");
  add_common_flags(rollout, state);

  CLI::App* score = app.add_subcommand("score", "score every rollout trace");
  score->add_option("--problems", state.options.problems, "problems.jsonl")->required();
  score->add_option("--rollouts", state.options.rollouts, "rollouts.jsonl")->required();
  score->add_option("-o,--out", state.options.out, "scored.jsonl")->required();
  add_common_flags(score, state);
  add_scoring_flags(score, state);

  CLI::App* refine = app.add_subcommand("refine", "refine failing steps from prover feedback");
  refine->add_option("--problems", state.options.problems, "problems.jsonl")->required();
  refine->add_option("--rollouts", state.options.rollouts, "rollouts.jsonl")->required();
  refine->add_option("--scored", state.options.scored, "scored.jsonl")->required();
  refine->add_option("--refined", state.options.refined, "refined rollouts output")->required();
  refine->add_option("--refined-scored", state.options.refined_scored,
                     "rescored refined traces output")->required();
  refine->add_option("--refinements", state.options.refinements,
                     "refinement audit log output")->required();
  refine->add_option("--refine-k", state.options.refine_k, "responses to refine per problem");
  refine->add_option("--max-iterations", state.options.max_iterations,
                     "refinement attempts per step");
  add_common_flags(refine, state);
  add_scoring_flags(refine, state);

  CLI::App* build_sft = app.add_subcommand("build-sft", "emit best-of-pool SFT targets");
  build_sft->add_option("--problems", state.options.problems, "problems.jsonl")->required();
  build_sft->add_option("--rollouts", state.options.rollouts, "rollouts.jsonl")->required();
  build_sft->add_option("--scored", state.options.scored, "scored.jsonl")->required();
  build_sft->add_option("--refined", state.options.refined, "refined rollouts");
  build_sft->add_option("--refined-scored", state.options.refined_scored,
                        "rescored refined traces");
  build_sft->add_option("-o,--out", state.options.out, "sft.jsonl")->required();
  build_sft->add_option("--prompts-dir", state.options.prompts_dir, "prompt asset directory");

  CLI::App* build_dpo = app.add_subcommand("build-dpo", "emit preference pairs");
  build_dpo->add_option("--problems", state.options.problems, "problems.jsonl")->required();
  build_dpo->add_option("--rollouts", state.options.rollouts, "rollouts.jsonl")->required();
  build_dpo->add_option("--scored", state.options.scored, "scored.jsonl")->required();
  build_dpo->add_option("--refined", state.options.refined, "refined rollouts");
  build_dpo->add_option("--refined-scored", state.options.refined_scored,
                        "rescored refined traces");
  build_dpo->add_option("-o,--out", state.options.out, "dpo.jsonl")->required();
  build_dpo->add_option("--strategy", state.strategy, "maxmin|dual|random");
  build_dpo->add_option("--hi", state.options.hi, "dual-threshold chosen cutoff");
  build_dpo->add_option("--lo", state.options.lo, "dual-threshold rejected cutoff");
  build_dpo->add_option("--seed", state.options.seed, "seed for the random strategy");
  build_dpo->add_option("--prompts-dir", state.options.prompts_dir, "prompt asset directory");

  CLI::App* report = app.add_subcommand("report", "score distribution and verdict rates");
  report->add_option("--scored", state.options.scored, "scored.jsonl")->required();
  report->add_option("--compare", state.compare, "second scored file (before/after)");
  report->add_option("-o,--out", state.options.out, "machine-readable summary (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    finalize(state);
    if (ingest->parsed()) {
      run_ingest(state.options);
    } else if (rollout->parsed()) {
      run_rollout(state.options);
    } else if (score->parsed()) {
      run_score(state.options);
    } else if (refine->parsed()) {
      run_refine(state.options);
    } else if (build_sft->parsed()) {
      run_build_sft(state.options);
    } else if (build_dpo->parsed()) {
      run_build_dpo(state.options, parse_strategy(state.strategy));
    } else if (report->parsed()) {
      std::string text;
      run_report(state.options, state.compare, &text);
      std::cout << text;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BackendUnavailable& e) {
    std::cerr << "backend unavailable: " << e.what() << "\n";
    return kExitBackend;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

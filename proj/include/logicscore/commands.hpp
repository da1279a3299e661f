#pragma once

#include "logicscore/dataset.hpp"
#include "logicscore/gateway.hpp"
#include "logicscore/isabelle.hpp"
#include "logicscore/pipeline.hpp"
#include "logicscore/refine.hpp"
#include "logicscore/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace logicscore {

// Everything a pipeline command needs; each flag has a config-file mirror.
struct RunOptions {
  // inputs / outputs
  std::filesystem::path problems;
  std::filesystem::path rollouts;
  std::filesystem::path scored;
  std::filesystem::path refined;        // refined rollouts (refine output / build input)
  std::filesystem::path refined_scored; // rescored refined traces
  std::filesystem::path refinements;    // refinement audit log
  std::filesystem::path out;

  // gateway
  GatewayMode mode = GatewayMode::Replay;
  std::filesystem::path cache = "cache.jsonl";
  std::filesystem::path prompts_dir = "prompts";
  HttpTransportConfig http;
  Transport* transport_override = nullptr; // tests and the fixture generator inject here

  // scoring
  std::string prover = "internal"; // internal | isabelle
  std::string embedder = "lexical"; // lexical | remote
  std::string pv_aggregate = "mean"; // mean | max (the per-sentence aggregation switch)
  Weights weights;
  bool no_ground_truth = false;
  std::optional<double> default_conf;
  int max_depth = 12;
  double prover_timeout = 10.0;
  std::filesystem::path isabelle_path;
  double isabelle_timeout = 60.0;
  int max_prover_procs = 2;
  std::string formalize_model = "gpt-4o";

  // rollout
  int rollout_n = 8;
  std::string rollout_split = "qwen3-8b=5,gpt-4o=3";
  double temperature = 0.6;
  int max_tokens = 2048;

  // refinement / pairing
  int refine_k = 2;
  int max_iterations = 3;
  std::uint64_t seed = 7;
  double hi = 0.75;
  double lo = 0.25;

  int jobs = 0; // 0 = one worker per hardware thread (capped)

  // Digest of every option that changes a score; recorded in manifests and
  // compared when merging score files.
  std::string scoring_config_digest() const;
};

// Assembled handles for one run. Owns the gateway, embedder and prover.
struct RunContext {
  explicit RunContext(const RunOptions& options);

  PipelineConfig pipeline_config;
  PromptStore prompts;
  std::unique_ptr<Transport> owned_transport;
  std::unique_ptr<Gateway> gateway;
  std::unique_ptr<EmbeddingProvider> embedder;
  std::unique_ptr<ProverBackend> prover;

  PipelineHandles handles();
};

// Command cores. Each writes its outputs atomically plus a
// <output>.manifest.json sidecar, and returns the manifest.
RunManifest run_ingest(const RunOptions& options);
RunManifest run_rollout(const RunOptions& options);
RunManifest run_score(const RunOptions& options);
RunManifest run_refine(const RunOptions& options);
RunManifest run_build_sft(const RunOptions& options);
RunManifest run_build_dpo(const RunOptions& options, PairStrategy strategy);
// Prints the distribution (and the before/after delta when compare is set);
// machine-readable JSON lands at options.out when given.
RunManifest run_report(const RunOptions& options, const std::filesystem::path& compare,
                       std::string* text_out = nullptr);

} // namespace logicscore

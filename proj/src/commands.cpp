#include "logicscore/commands.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/io.hpp"
#include "logicscore/util.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace logicscore {

// ---------------------------------------------------------------------------
// options
// ---------------------------------------------------------------------------

std::string RunOptions::scoring_config_digest() const {
  std::string canon;
  canon += prover + "\x1f" + embedder + "\x1f" + pv_aggregate + "\x1f";
  canon += format_fixed(weights.w1, 6) + "\x1f" + format_fixed(weights.w2, 6) + "\x1f";
  canon += no_ground_truth ? "ngt" : "gt";
  canon += "\x1f";
  canon += default_conf ? format_fixed(*default_conf, 6) : std::string("none");
  canon += "\x1f" + std::to_string(max_depth) + "\x1f" + format_fixed(prover_timeout, 3);
  canon += "\x1f" + formalize_model;
  return to_hex(fnv1a64(canon));
}

namespace {

PremiseAggregate parse_aggregate(const std::string& value) {
  if (value == "mean") return PremiseAggregate::MeanOfMax;
  if (value == "max") return PremiseAggregate::GlobalMax;
  throw ConfigError("pv_aggregate must be 'mean' or 'max', got '" + value + "'");
}

std::vector<std::pair<std::string, int>> parse_split(const std::string& text) {
  std::vector<std::pair<std::string, int>> split;
  for (const std::string& part : split_on(text, ',')) {
    std::string entry = trim(part);
    if (entry.empty()) continue;
    size_t eq = entry.find('=');
    if (eq == std::string::npos)
      throw ConfigError("rollout split entries look like model=count, got '" + entry + "'");
    try {
      split.emplace_back(trim(entry.substr(0, eq)), std::stoi(entry.substr(eq + 1)));
    } catch (const std::exception&) {
      throw ConfigError("bad count in rollout split entry '" + entry + "'");
    }
  }
  if (split.empty()) throw ConfigError("rollout split is empty");
  return split;
}

int effective_jobs(int jobs) {
  if (jobs > 0) return jobs;
  unsigned hw = std::thread::hardware_concurrency();
  return static_cast<int>(std::clamp(hw, 1u, 8u));
}

// Index-ordered parallel map; output order never depends on scheduling.
template <typename In, typename Fn>
auto parallel_map(const std::vector<In>& items, int jobs, Fn fn)
    -> std::vector<decltype(fn(items.front()))> {
  using Out = decltype(fn(items.front()));
  std::vector<Out> results(items.size());
  if (items.empty()) return results;
  jobs = std::min<int>(effective_jobs(jobs), static_cast<int>(items.size()));

  std::atomic<size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mu;

  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= items.size() || failed.load()) return;
      try {
        results[i] = fn(items[i]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(jobs));
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (std::thread& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
  return results;
}

std::map<std::string, Problem> problems_by_id(const std::vector<Problem>& problems) {
  std::map<std::string, Problem> map;
  for (const Problem& p : problems) map[p.id] = p;
  return map;
}

void require_input(const std::filesystem::path& path, const std::string& flag) {
  if (path.empty()) throw ConfigError("missing required input: " + flag);
  if (!std::filesystem::exists(path)) throw IoError("input file not found: " + path.string());
}

RunManifest start_manifest(const RunOptions& options, const std::string& command) {
  RunManifest m;
  m.command = command;
  m.config_digest = options.scoring_config_digest();
  m.started = iso8601_utc_now();
  return m;
}

void finish_manifest(RunManifest& m, const std::filesystem::path& primary_output) {
  m.finished = iso8601_utc_now();
  m.finalize_run_id();
  m.write(manifest_path_for(primary_output));
}

bool verdict_hit_depth_budget(const ProverVerdict& v) {
  for (const std::string& d : v.diagnostics)
    if (d.rfind("proof search budget exhausted", 0) == 0) return true;
  return false;
}

void tally_steps(RunManifest& m, const std::vector<TraceScore>& scores) {
  std::int64_t steps = 0, valid = 0, invalid = 0, syntax_error = 0, depth = 0;
  for (const TraceScore& t : scores) {
    for (const StepScore& s : t.step_scores) {
      ++steps;
      if (s.logic_source == LogicSource::Fallback) {
        ++syntax_error;
      } else if (s.verdict.logic_ok) {
        ++valid;
      } else {
        ++invalid;
        if (verdict_hit_depth_budget(s.verdict)) ++depth;
      }
    }
  }
  m.counts["steps"] = steps;
  m.counts["steps_logic_valid"] = valid;
  m.counts["steps_logic_invalid"] = invalid;
  m.counts["steps_syntax_fallback"] = syntax_error;
  m.counts["steps_depth_exhausted"] = depth;
}

} // namespace

// ---------------------------------------------------------------------------
// context
// ---------------------------------------------------------------------------

RunContext::RunContext(const RunOptions& options) : prompts(options.prompts_dir) {
  options.weights.validate();

  pipeline_config.weights = options.weights;
  pipeline_config.pv_aggregate = parse_aggregate(options.pv_aggregate);
  pipeline_config.budget.max_depth = options.max_depth;
  pipeline_config.budget.timeout = std::chrono::duration<double>(options.prover_timeout);
  pipeline_config.default_conf = options.default_conf;
  pipeline_config.use_gold = !options.no_ground_truth;
  pipeline_config.formalizer.model_tag = options.formalize_model;

  Transport* transport = options.transport_override;
  if (!transport && options.mode != GatewayMode::Replay) {
    owned_transport = make_http_transport(options.http);
    transport = owned_transport.get();
  }
  gateway = std::make_unique<Gateway>(options.mode, options.cache, transport);

  if (options.embedder == "lexical") {
    embedder = std::make_unique<LexicalEmbedder>();
  } else if (options.embedder == "remote") {
    embedder = std::make_unique<RemoteEmbedder>(*gateway);
  } else {
    throw ConfigError("embedder must be 'lexical' or 'remote', got '" + options.embedder + "'");
  }

  if (options.prover == "internal") {
    prover = std::make_unique<InternalProver>();
  } else if (options.prover == "isabelle") {
    if (options.isabelle_path.empty() || !std::filesystem::exists(options.isabelle_path))
      throw BackendUnavailable("isabelle backend selected but no executable at '" +
                               options.isabelle_path.string() + "'");
    IsabelleConfig config;
    config.executable = options.isabelle_path;
    config.max_procs = options.max_prover_procs;
    prover = std::make_unique<IsabelleProver>(std::move(config));
    pipeline_config.budget.timeout = std::chrono::duration<double>(options.isabelle_timeout);
  } else {
    throw ConfigError("prover must be 'internal' or 'isabelle', got '" + options.prover + "'");
  }
}

PipelineHandles RunContext::handles() {
  return PipelineHandles{*gateway, prompts, *embedder, *prover};
}

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

RunManifest run_ingest(const RunOptions& options) {
  require_input(options.problems, "--problems");
  RunManifest manifest = start_manifest(options, "ingest");
  manifest.inputs.emplace_back(options.problems.string(), file_digest(options.problems));

  std::vector<Problem> problems = load_problems(options.problems);
  manifest.counts["problems"] = static_cast<std::int64_t>(problems.size());

  if (!options.rollouts.empty()) {
    require_input(options.rollouts, "--rollouts");
    manifest.inputs.emplace_back(options.rollouts.string(), file_digest(options.rollouts));
    std::int64_t parsed = 0, rejected = 0, steps = 0;
    for (const RolloutRecord& rec : load_rollout_records(options.rollouts)) {
      try {
        ResponseTrace trace = parse_rollout_record(rec);
        ++parsed;
        steps += static_cast<std::int64_t>(trace.steps.size());
      } catch (const Error&) {
        ++rejected;
      }
    }
    manifest.counts["traces_total"] = parsed + rejected;
    manifest.counts["traces_parsed"] = parsed;
    manifest.counts["traces_rejected"] = rejected;
    manifest.counts["steps"] = steps;
  }

  std::filesystem::path out = options.out.empty() ? std::filesystem::path("ingest") : options.out;
  finish_manifest(manifest, out);
  return manifest;
}

// ---------------------------------------------------------------------------
// rollout
// ---------------------------------------------------------------------------

RunManifest run_rollout(const RunOptions& options) {
  require_input(options.problems, "--problems");
  if (options.out.empty()) throw ConfigError("rollout requires -o/--out");

  RolloutConfig rollout_config;
  rollout_config.n = options.rollout_n;
  rollout_config.split = parse_split(options.rollout_split);
  rollout_config.sampling.temperature = options.temperature;
  rollout_config.sampling.max_tokens = options.max_tokens;

  int total = 0;
  for (const auto& [tag, count] : rollout_config.split) {
    (void)tag;
    total += count;
  }
  if (total != rollout_config.n)
    throw ConfigError("rollout split sums to " + std::to_string(total) + " but n=" +
                      std::to_string(rollout_config.n));

  RunManifest manifest = start_manifest(options, "rollout");
  manifest.inputs.emplace_back(options.problems.string(), file_digest(options.problems));

  RunContext context(options);
  std::vector<Problem> problems = load_problems(options.problems);
  std::sort(problems.begin(), problems.end(),
            [](const Problem& a, const Problem& b) { return a.id < b.id; });

  std::vector<RolloutRecord> records;
  std::int64_t rejected = 0;
  for (const Problem& problem : problems) {
    RolloutSet set = context.gateway->generate_rollouts(problem, context.prompts, rollout_config);
    for (const ResponseTrace& trace : set.traces) {
      RolloutRecord rec;
      rec.problem_id = trace.problem_id;
      rec.response_id = trace.response_id;
      rec.origin = trace.origin;
      rec.text = render_trace(trace);
      if (trace.token_probs) {
        std::vector<std::pair<std::string, double>> tokens;
        for (const TokenSpan& span : *trace.token_probs)
          tokens.emplace_back(span.text, span.prob);
        rec.tokens = std::move(tokens);
      }
      records.push_back(std::move(rec));
    }
    rejected += static_cast<std::int64_t>(set.rejections.size());
  }

  std::sort(records.begin(), records.end(), [](const RolloutRecord& a, const RolloutRecord& b) {
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.response_id < b.response_id;
  });
  write_rollout_records(options.out, records);

  manifest.counts["problems"] = static_cast<std::int64_t>(problems.size());
  manifest.counts["traces_total"] = static_cast<std::int64_t>(records.size()) + rejected;
  manifest.counts["traces_parsed"] = static_cast<std::int64_t>(records.size());
  manifest.counts["traces_rejected"] = rejected;
  manifest.outputs.emplace_back(options.out.string(), file_digest(options.out));
  finish_manifest(manifest, options.out);
  return manifest;
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

namespace {

struct ParsedRollouts {
  std::vector<ResponseTrace> traces;
  std::int64_t rejected = 0;
  std::int64_t alignment_dropped = 0;
};

ParsedRollouts parse_all(const std::vector<RolloutRecord>& records) {
  ParsedRollouts out;
  for (const RolloutRecord& rec : records) {
    try {
      out.traces.push_back(parse_rollout_record(rec));
    } catch (const AlignmentFailure&) {
      // the steps parsed; only the token alignment failed, so score without
      // token data rather than rejecting the trace
      RolloutRecord stripped = rec;
      stripped.tokens.reset();
      out.traces.push_back(parse_rollout_record(stripped));
      ++out.alignment_dropped;
    } catch (const MalformedTrace&) {
      ++out.rejected;
    } catch (const MissingAnswer&) {
      ++out.rejected;
    }
  }
  return out;
}

} // namespace

RunManifest run_score(const RunOptions& options) {
  require_input(options.problems, "--problems");
  require_input(options.rollouts, "--rollouts");
  if (options.out.empty()) throw ConfigError("score requires -o/--out");

  RunManifest manifest = start_manifest(options, "score");
  manifest.inputs.emplace_back(options.problems.string(), file_digest(options.problems));
  manifest.inputs.emplace_back(options.rollouts.string(), file_digest(options.rollouts));

  RunContext context(options);
  std::map<std::string, Problem> problems = problems_by_id(load_problems(options.problems));
  ParsedRollouts parsed = parse_all(load_rollout_records(options.rollouts));

  for (const ResponseTrace& trace : parsed.traces)
    if (!problems.count(trace.problem_id))
      throw IoError("rollout references unknown problem '" + trace.problem_id + "'");

  PipelineHandles handles = context.handles();
  std::vector<TraceScore> scores =
      parallel_map(parsed.traces, options.jobs, [&](const ResponseTrace& trace) {
        return score_trace(trace, problems.at(trace.problem_id), handles,
                           context.pipeline_config);
      });

  std::sort(scores.begin(), scores.end(), [](const TraceScore& a, const TraceScore& b) {
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.response_id < b.response_id;
  });
  write_scored(options.out, scores);

  manifest.counts["problems"] = static_cast<std::int64_t>(problems.size());
  manifest.counts["traces_total"] =
      static_cast<std::int64_t>(parsed.traces.size()) + parsed.rejected;
  manifest.counts["traces_parsed"] = static_cast<std::int64_t>(parsed.traces.size());
  manifest.counts["traces_rejected"] = parsed.rejected;
  manifest.counts["token_alignment_dropped"] = parsed.alignment_dropped;
  tally_steps(manifest, scores);
  manifest.outputs.emplace_back(options.out.string(), file_digest(options.out));
  finish_manifest(manifest, options.out);
  return manifest;
}

// ---------------------------------------------------------------------------
// refine
// ---------------------------------------------------------------------------

RunManifest run_refine(const RunOptions& options) {
  if (options.refine_k < 1) throw ConfigError("--refine-k must be >= 1");
  if (options.max_iterations < 1) throw ConfigError("--max-iterations must be >= 1");
  if (options.refined.empty() || options.refined_scored.empty() || options.refinements.empty())
    throw ConfigError("refine requires --refined, --refined-scored and --refinements outputs");
  require_input(options.problems, "--problems");
  require_input(options.rollouts, "--rollouts");
  require_input(options.scored, "--scored");

  RunManifest manifest = start_manifest(options, "refine");
  manifest.inputs.emplace_back(options.problems.string(), file_digest(options.problems));
  manifest.inputs.emplace_back(options.rollouts.string(), file_digest(options.rollouts));
  manifest.inputs.emplace_back(options.scored.string(), file_digest(options.scored));

  RunContext context(options);
  std::map<std::string, Problem> problems = problems_by_id(load_problems(options.problems));
  ParsedRollouts parsed = parse_all(load_rollout_records(options.rollouts));
  std::vector<TraceScore> scores = load_scored(options.scored);

  // group per problem, keeping input order within each rollout set
  std::map<std::string, RolloutSet> rollouts;
  for (ResponseTrace& trace : parsed.traces) {
    if (!problems.count(trace.problem_id))
      throw IoError("rollout references unknown problem '" + trace.problem_id + "'");
    RolloutSet& set = rollouts[trace.problem_id];
    set.problem_id = trace.problem_id;
    set.traces.push_back(std::move(trace));
  }

  PipelineHandles handles = context.handles();
  const PipelineConfig& config = context.pipeline_config;

  std::vector<RolloutRecord> refined_records;
  std::vector<TraceScore> refined_scores;
  std::vector<RefinementRecord> refinement_log;
  std::int64_t steps_refined = 0, steps_fixed = 0;

  for (auto& [problem_id, rollout] : rollouts) {
    const Problem& problem = problems.at(problem_id);
    for (std::size_t index :
         select_for_refinement(rollout, scores, options.refine_k, options.seed)) {
      const ResponseTrace& original = rollout.traces[index];
      ResponseTrace refined = original;

      for (std::size_t s = 0; s < original.steps.size(); ++s) {
        // re-derive the failing theory and verdict for this step
        Step unified =
            soft_unify(original.steps[s], problem, *context.gateway, context.prompts,
                       config.formalizer);
        std::string lif = formalize(unified, *context.gateway, context.prompts,
                                    config.formalizer);
        ProverVerdict verdict = context.prover->check_text(lif, config.budget);
        if (verdict.logic_ok) continue;

        LogicTheory theory;
        try {
          theory = parse_lif(lif);
          assign_axiom_provenance(theory, unified);
        } catch (const LifSyntaxError&) {
          // no well-formed theory; refinement still sees the diagnostics
        }

        auto [revised, record] =
            refine_step(unified, theory, verdict, handles, config, options.max_iterations);
        record.problem_id = problem_id;
        record.response_id = original.response_id;
        refined.steps[s].soft_unification = revised.soft_unification;
        ++steps_refined;
        if (record.final_verdict.logic_ok) ++steps_fixed;
        refinement_log.push_back(std::move(record));
      }

      RolloutRecord rec;
      rec.problem_id = problem_id;
      rec.response_id = refined.response_id;
      rec.origin = refined.origin;
      rec.text = render_trace(refined);
      if (refined.token_probs) {
        std::vector<std::pair<std::string, double>> tokens;
        for (const TokenSpan& span : *refined.token_probs)
          tokens.emplace_back(span.text, span.prob);
        rec.tokens = std::move(tokens);
      }
      rec.refined = true;
      refined_records.push_back(std::move(rec));

      refined_scores.push_back(rescore(refined, problem, handles, config));
    }
  }

  auto record_order = [](const RolloutRecord& a, const RolloutRecord& b) {
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.response_id < b.response_id;
  };
  std::sort(refined_records.begin(), refined_records.end(), record_order);
  std::sort(refined_scores.begin(), refined_scores.end(),
            [](const TraceScore& a, const TraceScore& b) {
              if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
              return a.response_id < b.response_id;
            });
  std::sort(refinement_log.begin(), refinement_log.end(),
            [](const RefinementRecord& a, const RefinementRecord& b) {
              if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
              if (a.response_id != b.response_id) return a.response_id < b.response_id;
              return a.step_index < b.step_index;
            });

  write_rollout_records(options.refined, refined_records);
  write_scored(options.refined_scored, refined_scores);
  write_refinements(options.refinements, refinement_log);

  manifest.counts["traces_refined"] = static_cast<std::int64_t>(refined_records.size());
  manifest.counts["steps_refined"] = steps_refined;
  manifest.counts["steps_fixed"] = steps_fixed;
  manifest.outputs.emplace_back(options.refined.string(), file_digest(options.refined));
  manifest.outputs.emplace_back(options.refined_scored.string(),
                                file_digest(options.refined_scored));
  manifest.outputs.emplace_back(options.refinements.string(),
                                file_digest(options.refinements));
  finish_manifest(manifest, options.refined);
  return manifest;
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

namespace {

std::vector<ProblemPool> assemble_pools(const RunOptions& options, RunManifest& manifest) {
  require_input(options.problems, "--problems");
  require_input(options.rollouts, "--rollouts");
  require_input(options.scored, "--scored");
  manifest.inputs.emplace_back(options.problems.string(), file_digest(options.problems));
  manifest.inputs.emplace_back(options.rollouts.string(), file_digest(options.rollouts));
  manifest.inputs.emplace_back(options.scored.string(), file_digest(options.scored));

  PromptStore prompts(options.prompts_dir);
  std::vector<Problem> problems = load_problems(options.problems);

  // canonical trace text per (problem, response, refined)
  std::map<std::tuple<std::string, std::string, bool>, std::string> rendered;
  auto ingest_records = [&](const std::filesystem::path& path) {
    for (const RolloutRecord& rec : load_rollout_records(path)) {
      try {
        ResponseTrace trace = parse_trace(rec.text, rec.problem_id, rec.response_id);
        rendered[{rec.problem_id, rec.response_id, rec.refined}] = render_trace(trace);
      } catch (const Error&) {
        // unparseable rollouts never reach the dataset
      }
    }
  };
  ingest_records(options.rollouts);

  auto pool_from_scores = [&](const std::vector<TraceScore>& scores) {
    std::map<std::string, ProblemPool> by_problem;
    for (const TraceScore& t : scores) {
      auto it = rendered.find({t.problem_id, t.response_id, t.refined});
      if (it == rendered.end())
        throw IoError("scored row (" + t.problem_id + ", " + t.response_id +
                      (t.refined ? ", refined" : "") + ") has no matching rollout text");
      ProblemPool& pool = by_problem[t.problem_id];
      pool.problem_id = t.problem_id;
      pool.candidates.push_back(
          ScoredCandidate{t.response_id, t.refined, t.logic_score, t.reasoning_validity,
                          it->second});
    }
    std::vector<ProblemPool> pools;
    pools.reserve(by_problem.size());
    for (auto& [id, pool] : by_problem) {
      (void)id;
      pools.push_back(std::move(pool));
    }
    return pools;
  };

  std::vector<TraceScore> scores = load_scored(options.scored);
  std::vector<ProblemPool> originals = pool_from_scores(scores);

  std::vector<ProblemPool> merged;
  if (!options.refined.empty() || !options.refined_scored.empty()) {
    require_input(options.refined, "--refined");
    require_input(options.refined_scored, "--refined-scored");
    manifest.inputs.emplace_back(options.refined.string(), file_digest(options.refined));
    manifest.inputs.emplace_back(options.refined_scored.string(),
                                 file_digest(options.refined_scored));
    ingest_records(options.refined);
    std::vector<ProblemPool> refined = pool_from_scores(load_scored(options.refined_scored));

    // both inputs must come from the same scoring config when manifests exist
    std::string digest_a, digest_b;
    if (auto m = load_manifest(manifest_path_for(options.scored))) digest_a = m->config_digest;
    if (auto m = load_manifest(manifest_path_for(options.refined_scored)))
      digest_b = m->config_digest;
    merged = merge_final(std::move(originals), refined, digest_a, digest_b);
  } else {
    merged = merge_final(std::move(originals), {});
  }

  // attach the rollout prompt each problem was sampled with
  std::map<std::string, const Problem*> by_id;
  for (const Problem& p : problems) by_id[p.id] = &p;
  for (ProblemPool& pool : merged) {
    auto it = by_id.find(pool.problem_id);
    if (it == by_id.end())
      throw IoError("scored rows reference unknown problem '" + pool.problem_id + "'");
    pool.prompt = Gateway::render_rollout_prompt(prompts, *it->second);
  }
  return merged;
}

} // namespace

RunManifest run_build_sft(const RunOptions& options) {
  if (options.out.empty()) throw ConfigError("build-sft requires -o/--out");
  RunManifest manifest = start_manifest(options, "build-sft");
  std::vector<ProblemPool> pools = assemble_pools(options, manifest);
  std::vector<SftRecord> records = build_sft(pools);
  write_sft(options.out, records);
  manifest.counts["problems"] = static_cast<std::int64_t>(pools.size());
  manifest.counts["sft_records"] = static_cast<std::int64_t>(records.size());
  manifest.outputs.emplace_back(options.out.string(), file_digest(options.out));
  finish_manifest(manifest, options.out);
  return manifest;
}

RunManifest run_build_dpo(const RunOptions& options, PairStrategy strategy) {
  if (options.out.empty()) throw ConfigError("build-dpo requires -o/--out");
  RunManifest manifest = start_manifest(options, "build-dpo");
  std::vector<ProblemPool> pools = assemble_pools(options, manifest);

  std::vector<PreferencePair> pairs;
  switch (strategy) {
    case PairStrategy::MaxMin: pairs = build_dpo_maxmin(pools); break;
    case PairStrategy::DualThreshold:
      pairs = build_dpo_dual_threshold(pools, options.hi, options.lo);
      break;
    case PairStrategy::RandomMid: pairs = build_dpo_random_mid(pools, options.seed); break;
  }
  write_dpo(options.out, pairs);
  manifest.counts["problems"] = static_cast<std::int64_t>(pools.size());
  manifest.counts["dpo_pairs"] = static_cast<std::int64_t>(pairs.size());
  manifest.outputs.emplace_back(options.out.string(), file_digest(options.out));
  finish_manifest(manifest, options.out);
  return manifest;
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

RunManifest run_report(const RunOptions& options, const std::filesystem::path& compare,
                       std::string* text_out) {
  require_input(options.scored, "--scored");
  RunManifest manifest = start_manifest(options, "report");
  manifest.inputs.emplace_back(options.scored.string(), file_digest(options.scored));

  std::vector<TraceScore> before = load_scored(options.scored);
  if (before.empty()) throw IoError("no records in " + options.scored.string());
  DistributionReport report_before = DistributionReport::from_scores(before);

  std::ostringstream text;
  nlohmann::ordered_json j;
  j["before"] = report_before.to_json();
  text << report_before.render_text(compare.empty() ? "scores" : "before");

  if (!compare.empty()) {
    require_input(compare, "--compare");
    manifest.inputs.emplace_back(compare.string(), file_digest(compare));
    std::vector<TraceScore> after = load_scored(compare);
    if (after.empty()) throw IoError("no records in " + compare.string());
    DistributionReport report_after = DistributionReport::from_scores(after);
    j["after"] = report_after.to_json();
    j["mean_delta"] = round6(report_after.mean - report_before.mean);
    text << report_after.render_text("after");
    text << "mean delta: " << format_fixed(report_after.mean - report_before.mean, 6) << "\n";
  }

  manifest.counts["traces"] = report_before.trace_count;
  if (!options.out.empty()) {
    atomic_write_file(options.out, j.dump(2) + "\n");
    manifest.outputs.emplace_back(options.out.string(), file_digest(options.out));
    finish_manifest(manifest, options.out);
  } else {
    manifest.finished = iso8601_utc_now();
    manifest.finalize_run_id();
  }
  if (text_out) *text_out = text.str();
  return manifest;
}

} // namespace logicscore

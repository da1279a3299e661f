#pragma once

#include "logicscore/prover.hpp"
#include "logicscore/trace.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace logicscore {

// Relative weight of reasoning validity (w1) and outcome validity (w2) in
// the final score. Must sum to 1.
struct Weights {
  double w1 = 0.5;
  double w2 = 0.5;

  // throws ConfigError unless w1, w2 >= 0 and w1 + w2 == 1 (within 1e-9)
  void validate() const;
};

enum class LogicSource { Prover, Fallback };

struct StepScore {
  int step_index = 0;
  double premise_validity = 0.0;
  double logic_validity = 0.0;
  LogicSource logic_source = LogicSource::Prover;
  ProverVerdict verdict;
};

struct TraceScore {
  std::string problem_id;
  std::string response_id;
  bool refined = false;
  std::vector<StepScore> step_scores;
  double reasoning_validity = 0.0;
  std::optional<int> outcome_validity; // absent in no-ground-truth mode
  double logic_score = 0.0;
};

// Average token probability of a step's conclusion. Falls back to
// `default_conf` when the step has no aligned spans; throws MissingTokenProbs
// when neither exists.
double conf(const ResponseTrace& trace, int step_index,
            std::optional<double> default_conf = std::nullopt);

// The unified logic-validity mapping: 1 when the prover accepts, 0 when it
// rejects a well-formed theory, and the step confidence when the
// formalization never parsed. conf_value is required in that last case.
double logic_validity(const ProverVerdict& verdict, std::optional<double> conf_value);

// Mean over steps of avg(premise validity, logic validity).
double reasoning_validity(const std::vector<StepScore>& step_scores);

// 1 iff the answers match after trim + case-fold + surrounding-bracket strip.
int outcome_validity(const std::string& answer, const std::string& gold);
std::string normalize_answer(const std::string& raw);

// w1*rv + w2*ov when the outcome is known; rv alone otherwise.
double logic_score(double rv, std::optional<int> ov, const Weights& weights);

// Confidence-baseline reward: mean step confidence, plus outcome correctness
// when a gold label is available.
double confidence_reward(const ResponseTrace& trace, const std::optional<std::string>& gold,
                         std::optional<double> default_conf = std::nullopt);

// ---------------------------------------------------------------------------
// scored.jsonl
// one object per trace; floats rounded to 6 decimals for byte-stable goldens
// ---------------------------------------------------------------------------

void write_scored(const std::filesystem::path& path, const std::vector<TraceScore>& scores);
// Verifies on load that reasoning_validity is recomputable from the step
// scores; throws IoError on drift.
std::vector<TraceScore> load_scored(const std::filesystem::path& path);

} // namespace logicscore

#pragma once

#include "logicscore/scoring.hpp"
#include "logicscore/trace.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace logicscore {

struct SftRecord {
  std::string prompt;
  std::string target; // rendered trace text; parses back through parse_trace
  double score = 0.0;
  std::string problem_id;
  std::string response_id;
};

enum class PairStrategy { MaxMin, DualThreshold, RandomMid };

std::string pair_strategy_tag(PairStrategy s);

struct PreferencePair {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  double chosen_score = 0.0;
  double rejected_score = 0.0; // strictly below chosen_score, every strategy
  PairStrategy strategy = PairStrategy::MaxMin;
  std::string problem_id;
};

// One candidate in a problem's scored pool: the trace text to train on plus
// its score row.
struct ScoredCandidate {
  std::string response_id;
  bool refined = false;
  double score = 0.0;
  double rv = 0.0;
  std::string rendered; // canonical trace text
};

struct ProblemPool {
  std::string problem_id;
  std::string prompt; // the rollout prompt this problem was sampled with
  std::vector<ScoredCandidate> candidates;
};

// Joins original and refined pools keyed by (problem_id, response_id,
// refined); refined traces extend the candidate set before selection.
// Throws DuplicateKey on key collisions and ConfigMismatch when the two
// inputs were scored under different configs (digests supplied by the
// caller; empty digests skip the check).
std::vector<ProblemPool> merge_final(std::vector<ProblemPool> originals,
                                     const std::vector<ProblemPool>& refined,
                                     const std::string& config_digest_originals = {},
                                     const std::string& config_digest_refined = {});

// Highest-scored candidate per problem; ties break to the lowest response_id.
std::vector<SftRecord> build_sft(const std::vector<ProblemPool>& pools);

// argmax paired with argmin; degenerate pools (max == min) are skipped.
std::vector<PreferencePair> build_dpo_maxmin(const std::vector<ProblemPool>& pools);

// Every candidate scoring >= hi crossed with every candidate scoring <= lo.
std::vector<PreferencePair> build_dpo_dual_threshold(const std::vector<ProblemPool>& pools,
                                                     double hi = 0.75, double lo = 0.25);

// One seeded pick above 0.5 against one below; exactly 0.5 joins neither side.
std::vector<PreferencePair> build_dpo_random_mid(const std::vector<ProblemPool>& pools,
                                                 std::uint64_t seed);

void write_sft(const std::filesystem::path& path, std::vector<SftRecord> records);
void write_dpo(const std::filesystem::path& path, std::vector<PreferencePair> pairs);

} // namespace logicscore

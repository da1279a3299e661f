#include "logicscore/dataset.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/rng.hpp"
#include "logicscore/util.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace logicscore {

using nlohmann::ordered_json;

std::string pair_strategy_tag(PairStrategy s) {
  switch (s) {
    case PairStrategy::MaxMin: return "maxmin";
    case PairStrategy::DualThreshold: return "dual_threshold";
    case PairStrategy::RandomMid: return "random_mid";
  }
  return "maxmin";
}

namespace {

// Deterministic candidate order: argmax/argmin scans resolve ties toward the
// lowest response_id by construction.
void sort_candidates(ProblemPool& pool) {
  std::sort(pool.candidates.begin(), pool.candidates.end(),
            [](const ScoredCandidate& a, const ScoredCandidate& b) {
              if (a.response_id != b.response_id) return a.response_id < b.response_id;
              return a.refined < b.refined;
            });
}

const ScoredCandidate* arg_best(const ProblemPool& pool) {
  const ScoredCandidate* best = nullptr;
  for (const ScoredCandidate& c : pool.candidates)
    if (!best || c.score > best->score) best = &c;
  return best;
}

const ScoredCandidate* arg_worst(const ProblemPool& pool) {
  const ScoredCandidate* worst = nullptr;
  for (const ScoredCandidate& c : pool.candidates)
    if (!worst || c.score < worst->score) worst = &c;
  return worst;
}

} // namespace

std::vector<ProblemPool> merge_final(std::vector<ProblemPool> originals,
                                     const std::vector<ProblemPool>& refined,
                                     const std::string& config_digest_originals,
                                     const std::string& config_digest_refined) {
  if (!config_digest_originals.empty() && !config_digest_refined.empty() &&
      config_digest_originals != config_digest_refined)
    throw ConfigMismatch("refined traces were scored under a different config (" +
                         config_digest_originals + " vs " + config_digest_refined + ")");

  std::map<std::string, size_t> by_problem;
  std::set<std::tuple<std::string, std::string, bool>> keys;
  for (size_t i = 0; i < originals.size(); ++i) {
    by_problem[originals[i].problem_id] = i;
    for (const ScoredCandidate& c : originals[i].candidates) {
      if (!keys.emplace(originals[i].problem_id, c.response_id, c.refined).second)
        throw DuplicateKey("duplicate candidate (" + originals[i].problem_id + ", " +
                           c.response_id + ")");
    }
  }
  for (const ProblemPool& pool : refined) {
    auto it = by_problem.find(pool.problem_id);
    if (it == by_problem.end()) {
      by_problem[pool.problem_id] = originals.size();
      originals.push_back(pool);
      for (const ScoredCandidate& c : pool.candidates)
        if (!keys.emplace(pool.problem_id, c.response_id, c.refined).second)
          throw DuplicateKey("duplicate candidate (" + pool.problem_id + ", " + c.response_id +
                             ", refined)");
      continue;
    }
    ProblemPool& target = originals[it->second];
    for (const ScoredCandidate& c : pool.candidates) {
      if (!keys.emplace(pool.problem_id, c.response_id, c.refined).second)
        throw DuplicateKey("duplicate candidate (" + pool.problem_id + ", " + c.response_id +
                           (c.refined ? ", refined)" : ")"));
      target.candidates.push_back(c);
    }
  }

  std::sort(originals.begin(), originals.end(),
            [](const ProblemPool& a, const ProblemPool& b) { return a.problem_id < b.problem_id; });
  for (ProblemPool& pool : originals) sort_candidates(pool);
  return originals;
}

std::vector<SftRecord> build_sft(const std::vector<ProblemPool>& pools) {
  std::vector<SftRecord> records;
  for (const ProblemPool& pool : pools) {
    if (pool.candidates.empty()) continue; // rollouts all failed parsing; logged upstream
    const ScoredCandidate* best = arg_best(pool);
    records.push_back(SftRecord{pool.prompt, best->rendered, best->score, pool.problem_id,
                                best->response_id});
  }
  return records;
}

std::vector<PreferencePair> build_dpo_maxmin(const std::vector<ProblemPool>& pools) {
  std::vector<PreferencePair> pairs;
  for (const ProblemPool& pool : pools) {
    if (pool.candidates.size() < 2) continue;
    const ScoredCandidate* chosen = arg_best(pool);
    const ScoredCandidate* rejected = arg_worst(pool);
    if (!(chosen->score > rejected->score)) continue; // zero-margin pool carries no signal
    pairs.push_back(PreferencePair{pool.prompt, chosen->rendered, rejected->rendered,
                                   chosen->score, rejected->score, PairStrategy::MaxMin,
                                   pool.problem_id});
  }
  return pairs;
}

std::vector<PreferencePair> build_dpo_dual_threshold(const std::vector<ProblemPool>& pools,
                                                     double hi, double lo) {
  if (!(hi > lo)) throw ConfigError("dual-threshold requires hi > lo");
  std::vector<PreferencePair> pairs;
  for (const ProblemPool& pool : pools) {
    for (const ScoredCandidate& chosen : pool.candidates) {
      if (chosen.score < hi) continue;
      for (const ScoredCandidate& rejected : pool.candidates) {
        if (rejected.score > lo) continue;
        pairs.push_back(PreferencePair{pool.prompt, chosen.rendered, rejected.rendered,
                                       chosen.score, rejected.score,
                                       PairStrategy::DualThreshold, pool.problem_id});
      }
    }
  }
  return pairs;
}

std::vector<PreferencePair> build_dpo_random_mid(const std::vector<ProblemPool>& pools,
                                                 std::uint64_t seed) {
  std::vector<PreferencePair> pairs;
  for (const ProblemPool& pool : pools) {
    std::vector<const ScoredCandidate*> above, below;
    for (const ScoredCandidate& c : pool.candidates) {
      if (c.score > 0.5) above.push_back(&c);
      else if (c.score < 0.5) below.push_back(&c);
      // exactly 0.5 belongs to neither side
    }
    if (above.empty() || below.empty()) continue;
    Rng rng = derive_stream(seed, "dpo-random-mid:" + pool.problem_id);
    const ScoredCandidate* chosen = above[rng.bounded(above.size())];
    const ScoredCandidate* rejected = below[rng.bounded(below.size())];
    pairs.push_back(PreferencePair{pool.prompt, chosen->rendered, rejected->rendered,
                                   chosen->score, rejected->score, PairStrategy::RandomMid,
                                   pool.problem_id});
  }
  return pairs;
}

void write_sft(const std::filesystem::path& path, std::vector<SftRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const SftRecord& a, const SftRecord& b) {
    if (a.problem_id != b.problem_id) return a.problem_id < b.problem_id;
    return a.response_id < b.response_id;
  });
  std::ostringstream out;
  for (const SftRecord& r : records) {
    ordered_json j;
    j["prompt"] = r.prompt;
    j["target"] = r.target;
    j["score"] = round6(r.score);
    j["problem_id"] = r.problem_id;
    j["response_id"] = r.response_id;
    out << j.dump() << "\n";
  }
  atomic_write_file(path, out.str());
}

void write_dpo(const std::filesystem::path& path, std::vector<PreferencePair> pairs) {
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const PreferencePair& a, const PreferencePair& b) {
                     return a.problem_id < b.problem_id;
                   });
  std::ostringstream out;
  for (const PreferencePair& p : pairs) {
    ordered_json j;
    j["prompt"] = p.prompt;
    j["chosen"] = p.chosen;
    j["rejected"] = p.rejected;
    j["chosen_score"] = round6(p.chosen_score);
    j["rejected_score"] = round6(p.rejected_score);
    j["strategy"] = pair_strategy_tag(p.strategy);
    j["problem_id"] = p.problem_id;
    out << j.dump() << "\n";
  }
  atomic_write_file(path, out.str());
}

} // namespace logicscore

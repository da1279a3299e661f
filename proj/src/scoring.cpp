#include "logicscore/scoring.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/io.hpp"
#include "logicscore/util.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace logicscore {

using nlohmann::json;
using nlohmann::ordered_json;

void Weights::validate() const {
  if (w1 < 0.0 || w2 < 0.0) throw ConfigError("weights must be non-negative");
  if (std::abs(w1 + w2 - 1.0) > 1e-9)
    throw ConfigError("weights must sum to 1 (got " + format_fixed(w1 + w2, 6) + ")");
}

double conf(const ResponseTrace& trace, int step_index, std::optional<double> default_conf) {
  double sum = 0.0;
  int count = 0;
  if (trace.token_probs) {
    for (const TokenSpan& span : *trace.token_probs) {
      if (span.step_index == step_index) {
        sum += span.prob;
        ++count;
      }
    }
  }
  if (count == 0) {
    if (default_conf) return *default_conf;
    throw MissingTokenProbs("no token probabilities for step " + std::to_string(step_index) +
                            " of response " + trace.response_id);
  }
  return sum / count;
}

double logic_validity(const ProverVerdict& verdict, std::optional<double> conf_value) {
  if (verdict.syntax_ok) return verdict.logic_ok ? 1.0 : 0.0;
  if (!conf_value)
    throw MissingTokenProbs("confidence fallback required for a syntactically invalid step");
  return *conf_value;
}

double reasoning_validity(const std::vector<StepScore>& step_scores) {
  if (step_scores.empty()) throw EmptyTrace("reasoning validity over zero steps");
  double sum = 0.0;
  for (const StepScore& s : step_scores)
    sum += 0.5 * (s.premise_validity + s.logic_validity);
  return sum / static_cast<double>(step_scores.size());
}

std::string normalize_answer(const std::string& raw) {
  std::string s = trim(raw);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']')
    s = trim(s.substr(1, s.size() - 2));
  return to_lower(s);
}

int outcome_validity(const std::string& answer, const std::string& gold) {
  return normalize_answer(answer) == normalize_answer(gold) ? 1 : 0;
}

double logic_score(double rv, std::optional<int> ov, const Weights& weights) {
  if (!ov) return rv;
  return weights.w1 * rv + weights.w2 * static_cast<double>(*ov);
}

double confidence_reward(const ResponseTrace& trace, const std::optional<std::string>& gold,
                         std::optional<double> default_conf) {
  if (trace.steps.empty()) throw EmptyTrace("confidence reward over zero steps");
  double sum = 0.0;
  for (const Step& step : trace.steps) sum += conf(trace, step.index, default_conf);
  double s = sum / static_cast<double>(trace.steps.size());
  if (gold) s += outcome_validity(trace.answer, *gold);
  return s;
}

// ---------------------------------------------------------------------------
// serialization
// ---------------------------------------------------------------------------

namespace {

const char* source_tag(LogicSource src) {
  return src == LogicSource::Prover ? "prover" : "fallback";
}

LogicSource source_from_tag(const std::string& tag, const std::string& where) {
  if (tag == "prover") return LogicSource::Prover;
  if (tag == "fallback") return LogicSource::Fallback;
  throw IoError(where + ": unknown logic source '" + tag + "'");
}

} // namespace

void write_scored(const std::filesystem::path& path, const std::vector<TraceScore>& scores) {
  std::ostringstream out;
  for (const TraceScore& t : scores) {
    ordered_json j;
    j["problem_id"] = t.problem_id;
    j["response_id"] = t.response_id;
    ordered_json steps = ordered_json::array();
    for (const StepScore& s : t.step_scores) {
      ordered_json step;
      step["i"] = s.step_index;
      step["pv"] = round6(s.premise_validity);
      step["lv"] = round6(s.logic_validity);
      step["src"] = source_tag(s.logic_source);
      steps.push_back(std::move(step));
    }
    j["steps"] = std::move(steps);
    j["rv"] = round6(t.reasoning_validity);
    if (t.outcome_validity) j["ov"] = *t.outcome_validity;
    else j["ov"] = nullptr;
    j["score"] = round6(t.logic_score);
    if (t.refined) j["refined"] = true;
    out << j.dump() << "\n";
  }
  atomic_write_file(path, out.str());
}

std::vector<TraceScore> load_scored(const std::filesystem::path& path) {
  std::vector<TraceScore> scores;
  int lineno = 0;
  for (const json& j : read_jsonl(path)) {
    ++lineno;
    std::string where = path.string() + ":" + std::to_string(lineno);
    TraceScore t;
    try {
      t.problem_id = j.at("problem_id").get<std::string>();
      t.response_id = j.at("response_id").get<std::string>();
      for (const json& s : j.at("steps")) {
        StepScore step;
        step.step_index = s.at("i").get<int>();
        step.premise_validity = s.at("pv").get<double>();
        step.logic_validity = s.at("lv").get<double>();
        step.logic_source = source_from_tag(s.at("src").get<std::string>(), where);
        step.verdict.syntax_ok = step.logic_source == LogicSource::Prover;
        step.verdict.logic_ok = step.verdict.syntax_ok && step.logic_validity == 1.0;
        t.step_scores.push_back(std::move(step));
      }
      t.reasoning_validity = j.at("rv").get<double>();
      if (j.contains("ov") && !j["ov"].is_null()) t.outcome_validity = j["ov"].get<int>();
      t.logic_score = j.at("score").get<double>();
      t.refined = j.value("refined", false);
    } catch (const json::exception& e) {
      throw IoError(where + ": " + e.what());
    }
    // serialized rv must stay recomputable from the step scores
    double recomputed = reasoning_validity(t.step_scores);
    if (std::abs(recomputed - t.reasoning_validity) > 2e-6)
      throw IoError(where + ": reasoning_validity " + format_fixed(t.reasoning_validity, 6) +
                    " does not match step scores (" + format_fixed(recomputed, 6) + ")");
    scores.push_back(std::move(t));
  }
  return scores;
}

} // namespace logicscore

#include "logicscore/io.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <set>
#include <sstream>

namespace logicscore {

using nlohmann::json;
using nlohmann::ordered_json;

std::vector<json> read_jsonl(const std::filesystem::path& path) {
  std::string content = read_file(path);
  std::vector<json> rows;
  int lineno = 0;
  for (const std::string& line : split_lines(content)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return rows;
}

std::vector<Problem> load_problems(const std::filesystem::path& path) {
  std::vector<Problem> problems;
  std::set<std::string> seen;
  int lineno = 0;
  for (const json& j : read_jsonl(path)) {
    ++lineno;
    std::string where = path.string() + ":" + std::to_string(lineno);
    Problem p;
    try {
      p.id = j.at("id").get<std::string>();
      p.premises = j.at("premises").get<std::vector<std::string>>();
      p.question = j.at("question").get<std::string>();
      if (j.contains("gold_answer") && !j["gold_answer"].is_null())
        p.gold_answer = j["gold_answer"].get<std::string>();
    } catch (const json::exception& e) {
      throw IoError(where + ": " + e.what());
    }
    if (p.premises.empty()) throw IoError(where + ": premises must be non-empty");
    if (!seen.insert(p.id).second) throw IoError(where + ": duplicate problem id '" + p.id + "'");
    if (p.gold_answer && trim(*p.gold_answer).empty())
      throw IoError(where + ": gold_answer present but empty");
    problems.push_back(std::move(p));
  }
  return problems;
}

void write_problems(const std::filesystem::path& path, const std::vector<Problem>& problems) {
  std::ostringstream out;
  for (const Problem& p : problems) {
    ordered_json j;
    j["id"] = p.id;
    j["premises"] = p.premises;
    j["question"] = p.question;
    if (p.gold_answer) j["gold_answer"] = *p.gold_answer;
    out << j.dump() << "\n";
  }
  atomic_write_file(path, out.str());
}

ordered_json rollout_record_to_json(const RolloutRecord& rec) {
  ordered_json j;
  j["problem_id"] = rec.problem_id;
  j["response_id"] = rec.response_id;
  j["origin"] = rec.origin;
  j["text"] = rec.text;
  if (rec.tokens) {
    ordered_json arr = ordered_json::array();
    for (const auto& [t, p] : *rec.tokens) {
      ordered_json tok;
      tok["t"] = t;
      tok["p"] = round6(p);
      arr.push_back(std::move(tok));
    }
    j["tokens"] = std::move(arr);
  }
  if (rec.refined) j["refined"] = true;
  return j;
}

RolloutRecord rollout_record_from_json(const json& j, const std::string& where) {
  RolloutRecord rec;
  try {
    rec.problem_id = j.at("problem_id").get<std::string>();
    rec.response_id = j.at("response_id").get<std::string>();
    rec.origin = j.value("origin", std::string{});
    rec.text = j.at("text").get<std::string>();
    if (j.contains("tokens") && !j["tokens"].is_null()) {
      std::vector<std::pair<std::string, double>> tokens;
      for (const json& tok : j["tokens"]) {
        tokens.emplace_back(tok.at("t").get<std::string>(), tok.at("p").get<double>());
      }
      rec.tokens = std::move(tokens);
    }
    rec.refined = j.value("refined", false);
  } catch (const json::exception& e) {
    throw IoError(where + ": " + e.what());
  }
  return rec;
}

std::vector<RolloutRecord> load_rollout_records(const std::filesystem::path& path) {
  std::vector<RolloutRecord> records;
  int lineno = 0;
  for (const json& j : read_jsonl(path)) {
    ++lineno;
    records.push_back(rollout_record_from_json(j, path.string() + ":" + std::to_string(lineno)));
  }
  return records;
}

void write_rollout_records(const std::filesystem::path& path,
                           const std::vector<RolloutRecord>& records) {
  std::ostringstream out;
  for (const RolloutRecord& rec : records) out << rollout_record_to_json(rec).dump() << "\n";
  atomic_write_file(path, out.str());
}

ResponseTrace parse_rollout_record(const RolloutRecord& rec) {
  ResponseTrace trace = parse_trace(rec.text, rec.problem_id, rec.response_id);
  trace.origin = rec.origin;
  if (rec.tokens) trace = attach_token_probs(trace, *rec.tokens);
  return trace;
}

} // namespace logicscore

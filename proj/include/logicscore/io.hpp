#pragma once

#include "logicscore/trace.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace logicscore {

// One line of rollouts.jsonl: the trace is stored as raw text and parsed on
// load so rejected generations stay auditable.
struct RolloutRecord {
  std::string problem_id;
  std::string response_id;
  std::string origin;
  std::string text;
  std::optional<std::vector<std::pair<std::string, double>>> tokens;
  bool refined = false; // set on records emitted by the refinement stage
};

// Reads a JSONL file, reporting the offending line on parse failure.
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

std::vector<Problem> load_problems(const std::filesystem::path& path);
void write_problems(const std::filesystem::path& path, const std::vector<Problem>& problems);

std::vector<RolloutRecord> load_rollout_records(const std::filesystem::path& path);
void write_rollout_records(const std::filesystem::path& path,
                           const std::vector<RolloutRecord>& records);

nlohmann::ordered_json rollout_record_to_json(const RolloutRecord& rec);
RolloutRecord rollout_record_from_json(const nlohmann::json& j, const std::string& where);

// Parses a record's text, attaching token probabilities when present.
ResponseTrace parse_rollout_record(const RolloutRecord& rec);

} // namespace logicscore

#pragma once

#include "logicscore/scoring.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace logicscore {

// Audit record written alongside every command's outputs. run_id is a digest
// of the command, config and inputs, so identical runs share an id and the
// data files themselves stay byte-stable.
struct RunManifest {
  std::string run_id;
  std::string command;
  std::string config_digest;
  std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
  std::vector<std::pair<std::string, std::string>> outputs; // path, digest
  std::map<std::string, std::int64_t> counts;
  std::string started;
  std::string finished;

  void finalize_run_id();
  nlohmann::ordered_json to_json() const;
  void write(const std::filesystem::path& path) const;
};

std::optional<RunManifest> load_manifest(const std::filesystem::path& path);
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

// Score distribution over one scored file: 20 equal-width bins over [0,1],
// the mean, and per-branch verdict rates over steps.
struct DistributionReport {
  static constexpr int kBins = 20;
  std::array<std::int64_t, kBins> histogram{};
  std::int64_t trace_count = 0;
  double mean = 0.0;
  double syntax_valid_rate = 0.0; // steps whose formalization parsed
  double logic_valid_rate = 0.0;  // steps the prover accepted

  static DistributionReport from_scores(const std::vector<TraceScore>& scores);
  nlohmann::ordered_json to_json() const;
  std::string render_text(const std::string& label) const;
};

} // namespace logicscore

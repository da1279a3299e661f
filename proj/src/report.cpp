#include "logicscore/report.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/io.hpp"
#include "logicscore/util.hpp"

#include <algorithm>
#include <sstream>

namespace logicscore {

using nlohmann::json;
using nlohmann::ordered_json;

void RunManifest::finalize_run_id() {
  std::string canon = command + "\x1f" + config_digest;
  for (const auto& [path, digest] : inputs) canon += "\x1f" + path + "=" + digest;
  run_id = to_hex(fnv1a64(canon));
}

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["run_id"] = run_id;
  j["command"] = command;
  j["config_digest"] = config_digest;
  ordered_json in = ordered_json::array();
  for (const auto& [path, digest] : inputs)
    in.push_back(ordered_json{{"path", path}, {"digest", digest}});
  j["inputs"] = std::move(in);
  ordered_json out = ordered_json::array();
  for (const auto& [path, digest] : outputs)
    out.push_back(ordered_json{{"path", path}, {"digest", digest}});
  j["outputs"] = std::move(out);
  j["counts"] = counts;
  j["started"] = started;
  j["finished"] = finished;
  return j;
}

void RunManifest::write(const std::filesystem::path& path) const {
  atomic_write_file(path, to_json().dump(2) + "\n");
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

std::optional<RunManifest> load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) return std::nullopt;
  RunManifest m;
  try {
    json j = json::parse(read_file(path));
    m.run_id = j.value("run_id", "");
    m.command = j.value("command", "");
    m.config_digest = j.value("config_digest", "");
    if (j.contains("inputs"))
      for (const json& row : j["inputs"])
        m.inputs.emplace_back(row.value("path", ""), row.value("digest", ""));
    if (j.contains("outputs"))
      for (const json& row : j["outputs"])
        m.outputs.emplace_back(row.value("path", ""), row.value("digest", ""));
    if (j.contains("counts"))
      for (auto it = j["counts"].begin(); it != j["counts"].end(); ++it)
        m.counts[it.key()] = it.value().get<std::int64_t>();
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  return m;
}

DistributionReport DistributionReport::from_scores(const std::vector<TraceScore>& scores) {
  DistributionReport report;
  report.trace_count = static_cast<std::int64_t>(scores.size());
  double sum = 0.0;
  std::int64_t steps = 0, syntax_ok = 0, logic_ok = 0;
  for (const TraceScore& t : scores) {
    sum += t.logic_score;
    int bin = static_cast<int>(t.logic_score * kBins);
    bin = std::clamp(bin, 0, kBins - 1); // score 1.0 lands in the top bin
    ++report.histogram[static_cast<size_t>(bin)];
    for (const StepScore& s : t.step_scores) {
      ++steps;
      if (s.logic_source == LogicSource::Prover) {
        ++syntax_ok;
        if (s.logic_validity == 1.0) ++logic_ok;
      }
    }
  }
  if (report.trace_count > 0) report.mean = sum / static_cast<double>(report.trace_count);
  if (steps > 0) {
    report.syntax_valid_rate = static_cast<double>(syntax_ok) / static_cast<double>(steps);
    report.logic_valid_rate = static_cast<double>(logic_ok) / static_cast<double>(steps);
  }
  return report;
}

ordered_json DistributionReport::to_json() const {
  ordered_json j;
  j["trace_count"] = trace_count;
  j["mean"] = round6(mean);
  j["syntax_valid_rate"] = round6(syntax_valid_rate);
  j["logic_valid_rate"] = round6(logic_valid_rate);
  ordered_json bins = ordered_json::array();
  for (int b = 0; b < kBins; ++b) {
    ordered_json bin;
    bin["lo"] = round6(static_cast<double>(b) / kBins);
    bin["hi"] = round6(static_cast<double>(b + 1) / kBins);
    bin["count"] = histogram[static_cast<size_t>(b)];
    bins.push_back(std::move(bin));
  }
  j["histogram"] = std::move(bins);
  return j;
}

std::string DistributionReport::render_text(const std::string& label) const {
  std::ostringstream out;
  out << label << ": " << trace_count << " traces, mean score " << format_fixed(mean, 4)
      << ", syntax-valid steps " << format_fixed(syntax_valid_rate * 100.0, 1)
      << "%, logic-valid steps " << format_fixed(logic_valid_rate * 100.0, 1) << "%\n";
  std::int64_t peak = 1;
  for (std::int64_t c : histogram) peak = std::max(peak, c);
  for (int b = 0; b < kBins; ++b) {
    double lo = static_cast<double>(b) / kBins;
    double hi = static_cast<double>(b + 1) / kBins;
    std::int64_t count = histogram[static_cast<size_t>(b)];
    int width = static_cast<int>(50.0 * static_cast<double>(count) / static_cast<double>(peak));
    out << "  [" << format_fixed(lo, 2) << ", " << format_fixed(hi, 2)
        << (b + 1 == kBins ? "]" : ")") << " " << std::string(static_cast<size_t>(width), '#')
        << " " << count << "\n";
  }
  return out.str();
}

} // namespace logicscore

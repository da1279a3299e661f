#include "logicscore/report.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <unistd.h>

using namespace logicscore;

namespace {

TraceScore scored(double score, bool prover_valid = true) {
  TraceScore t;
  t.problem_id = "p";
  t.response_id = "r";
  StepScore s;
  s.step_index = 1;
  s.premise_validity = score;
  s.logic_validity = prover_valid ? 1.0 : 0.0;
  s.logic_source = LogicSource::Prover;
  s.verdict.syntax_ok = true;
  s.verdict.logic_ok = prover_valid;
  t.step_scores.push_back(s);
  t.reasoning_validity = reasoning_validity(t.step_scores);
  t.logic_score = score;
  return t;
}

} // namespace

TEST_CASE("distribution report bins, rates and mean") {
  SUBCASE("degenerate all-ones distribution puts every trace in the top bin") {
    std::vector<TraceScore> scores(5, scored(1.0));
    DistributionReport r = DistributionReport::from_scores(scores);
    CHECK(r.mean == doctest::Approx(1.0));
    CHECK(r.histogram[19] == 5);
    CHECK(std::accumulate(r.histogram.begin(), r.histogram.end(), std::int64_t{0}) ==
          r.trace_count);
    CHECK(r.logic_valid_rate == doctest::Approx(1.0));
  }
  SUBCASE("bin counts always sum to the trace count") {
    std::vector<TraceScore> scores;
    for (int i = 0; i < 40; ++i) scores.push_back(scored(i / 40.0, i % 3 != 0));
    DistributionReport r = DistributionReport::from_scores(scores);
    CHECK(std::accumulate(r.histogram.begin(), r.histogram.end(), std::int64_t{0}) == 40);
    CHECK(r.mean >= 0.0);
    CHECK(r.mean <= 1.0);
  }
  SUBCASE("fallback steps lower the syntax-valid rate") {
    TraceScore t = scored(0.5);
    t.step_scores[0].logic_source = LogicSource::Fallback;
    t.step_scores[0].verdict.syntax_ok = false;
    t.step_scores[0].verdict.logic_ok = false;
    DistributionReport r = DistributionReport::from_scores({t});
    CHECK(r.syntax_valid_rate == 0.0);
    CHECK(r.logic_valid_rate == 0.0);
  }
  SUBCASE("text rendering carries the headline numbers") {
    DistributionReport r = DistributionReport::from_scores({scored(1.0)});
    std::string text = r.render_text("scores");
    CHECK(text.find("1 traces") != std::string::npos);
    CHECK(text.find("mean score 1.0000") != std::string::npos);
  }
}

TEST_CASE("manifest run ids are digests of command, config and inputs") {
  RunManifest a;
  a.command = "score";
  a.config_digest = "cfg";
  a.inputs = {{"problems.jsonl", "111"}, {"rollouts.jsonl", "222"}};
  a.started = "2026-01-01T00:00:00Z";
  a.finalize_run_id();

  RunManifest b = a;
  b.started = "2027-05-05T05:05:05Z"; // timestamps do not affect identity
  b.finalize_run_id();
  CHECK(a.run_id == b.run_id);

  RunManifest c = a;
  c.inputs[0].second = "999";
  c.finalize_run_id();
  CHECK(c.run_id != a.run_id);
}

TEST_CASE("manifest files round-trip") {
  namespace fs = std::filesystem;
  fs::path path = fs::temp_directory_path() /
                  ("logicscore-manifest-" + std::to_string(::getpid()) + ".json");
  RunManifest m;
  m.command = "score";
  m.config_digest = "abc";
  m.inputs = {{"in.jsonl", "d1"}};
  m.outputs = {{"out.jsonl", "d2"}};
  m.counts["traces_parsed"] = 8;
  m.counts["traces_rejected"] = 1;
  m.started = m.finished = "2026-01-01T00:00:00Z";
  m.finalize_run_id();
  m.write(path);

  auto loaded = load_manifest(path);
  REQUIRE(loaded.has_value());
  CHECK(loaded->run_id == m.run_id);
  CHECK(loaded->counts.at("traces_parsed") == 8);
  CHECK(loaded->outputs == m.outputs);
  CHECK_FALSE(load_manifest(path.string() + ".missing").has_value());
  fs::remove(path);
}

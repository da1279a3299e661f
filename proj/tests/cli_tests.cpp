// Black-box checks of the command-line surface: exit codes, config handling,
// manifest reconciliation, and fixture regeneration drift.
// Usage: cli_tests <cli-binary> <fixtures-dir> <prompts-dir> <mkfixtures-binary>

#include "logicscore/io.hpp"
#include "logicscore/report.hpp"
#include "logicscore/scoring.hpp"
#include "logicscore/util.hpp"

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace logicscore;

namespace {

struct Harness {
  std::string cli;
  fs::path fixtures;
  fs::path prompts;
  std::string mkfixtures;
  fs::path work;
  int failures = 0;

  int run(const std::string& args) {
    std::string cmd = cli + " " + args + " >" + (work / "out.log").string() + " 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  void expect(bool ok, const std::string& what) {
    if (ok) {
      std::printf("ok    %s\n", what.c_str());
    } else {
      ++failures;
      std::printf("FAIL  %s\n", what.c_str());
      fs::path log = work / "out.log";
      if (fs::exists(log)) std::printf("      log: %s\n", read_file(log).c_str());
    }
  }

  void expect_exit(int expected, const std::string& args, const std::string& what) {
    int got = run(args);
    if (got == expected) {
      std::printf("ok    %s (exit %d)\n", what.c_str(), got);
    } else {
      ++failures;
      std::printf("FAIL  %s: expected exit %d, got %d\n", what.c_str(), expected, got);
      fs::path log = work / "out.log";
      if (fs::exists(log)) std::printf("      log: %s\n", read_file(log).c_str());
    }
  }

  std::string inputs() const {
    return " --problems " + (fixtures / "problems.jsonl").string() + " --rollouts " +
           (fixtures / "rollouts.jsonl").string();
  }
  std::string replay() const {
    return " --cache " + (fixtures / "cache.jsonl").string() + " --prompts-dir " +
           prompts.string() + " --mode replay --seed 7";
  }
};

} // namespace

int main(int argc, char** argv) {
  if (argc < 5) {
    std::cerr << "usage: cli_tests <cli> <fixtures> <prompts> <mkfixtures>\n";
    return 2;
  }
  Harness h;
  h.cli = argv[1];
  h.fixtures = argv[2];
  h.prompts = argv[3];
  h.mkfixtures = argv[4];
  h.work = fs::temp_directory_path() / ("logicscore-cli-" + std::to_string(::getpid()));
  fs::create_directories(h.work);

  // --- configuration errors exit 2 -----------------------------------------
  h.expect_exit(2,
                "score" + h.inputs() + " -o " + (h.work / "s.jsonl").string() + h.replay() +
                    " --weights 0.6,0.5",
                "weights that do not sum to 1");
  h.expect_exit(2,
                "refine" + h.inputs() + " --scored missing.jsonl --refined r.jsonl"
                " --refined-scored rs.jsonl --refinements rf.jsonl" + h.replay() +
                    " --refine-k 0",
                "--refine-k 0");
  h.expect_exit(2, "score" + h.inputs() + " -o x.jsonl" + h.replay() + " --embedder bogus",
                "unknown embedder");
  h.expect_exit(2, "rollout --problems " + (h.fixtures / "problems.jsonl").string() +
                       " -o x.jsonl" + h.replay() + " --split qwen3-8b=5,gpt-4o=2",
                "rollout split not summing to n");
  h.expect_exit(2, "build-dpo" + h.inputs() + " --scored missing.jsonl -o d.jsonl"
                   " --strategy sideways",
                "unknown pairing strategy");

  // flags mirrored through a config file behave identically
  atomic_write_file(h.work / "bad.cfg", "weights=0.6,0.5\n");
  h.expect_exit(2,
                "score" + h.inputs() + " -o " + (h.work / "s.jsonl").string() + h.replay() +
                    " --config " + (h.work / "bad.cfg").string(),
                "invalid weights via --config");

  // --- i/o errors exit 3 ----------------------------------------------------
  h.expect_exit(3,
                "build-sft" + h.inputs() + " --scored " + (h.work / "missing.jsonl").string() +
                    " --prompts-dir " + h.prompts.string() + " -o " +
                    (h.work / "sft.jsonl").string(),
                "missing scored input");
  h.expect_exit(3, "report --scored " + (h.work / "nothere.jsonl").string(),
                "missing report input");
  atomic_write_file(h.work / "empty.jsonl", "");
  h.expect_exit(3, "report --scored " + (h.work / "empty.jsonl").string(),
                "empty report input");

  // --- backend availability exits 4 -----------------------------------------
  h.expect_exit(4,
                "score" + h.inputs() + " -o " + (h.work / "s.jsonl").string() + h.replay() +
                    " --prover isabelle --isabelle-path /no/such/binary",
                "isabelle backend without an executable");

  // --- a clean score run, its manifest, and reconciliation -------------------
  fs::path scored = h.work / "scored.jsonl";
  h.expect_exit(0, "score" + h.inputs() + " -o " + scored.string() + h.replay() + " --jobs 2",
                "score over the bundled corpus");
  {
    auto manifest = load_manifest(manifest_path_for(scored));
    h.expect(manifest.has_value(), "score writes a manifest sidecar");
    if (manifest) {
      auto parsed = manifest->counts.at("traces_parsed");
      auto rejected = manifest->counts.at("traces_rejected");
      auto total = manifest->counts.at("traces_total");
      h.expect(parsed + rejected == total, "manifest counts reconcile");
      auto rows = load_scored(scored);
      h.expect(static_cast<std::int64_t>(rows.size()) == parsed,
               "scored rows match the manifest count");
      std::int64_t steps = 0;
      for (const auto& r : rows) steps += static_cast<std::int64_t>(r.step_scores.size());
      h.expect(steps == manifest->counts.at("steps"), "step counts reconcile");
      h.expect(!manifest->run_id.empty() && manifest->outputs.size() == 1 &&
                   manifest->outputs[0].second == file_digest(scored),
               "manifest references its output by digest");
    }
  }

  // rejected rollouts are counted, not silently dropped
  {
    RolloutRecord good;
    good.problem_id = "p01";
    good.response_id = "a";
    good.text = "Step 1:\nPremise: x.\nConclusion: y.\nFinal answer: [True]\n";
    RolloutRecord bad = good;
    bad.response_id = "b";
    bad.text = "no steps here at all";
    write_rollout_records(h.work / "mixed.jsonl", {good, bad});
    h.expect_exit(0,
                  "ingest --problems " + (h.fixtures / "problems.jsonl").string() +
                      " --rollouts " + (h.work / "mixed.jsonl").string() + " -o " +
                      (h.work / "ingest").string(),
                  "ingest with a malformed rollout");
    auto manifest = load_manifest(manifest_path_for(h.work / "ingest"));
    h.expect(manifest && manifest->counts.at("traces_rejected") == 1 &&
                 manifest->counts.at("traces_parsed") == 1 &&
                 manifest->counts.at("traces_total") == 2,
             "ingest counts the rejection");
  }

  // --- report command -------------------------------------------------------
  h.expect_exit(0,
                "report --scored " + scored.string() + " -o " +
                    (h.work / "report.json").string(),
                "report over the scored corpus");
  h.expect(read_file(h.work / "report.json").find("\"histogram\"") != std::string::npos,
           "report emits the machine-readable summary");

  // --- fixture regeneration drift -------------------------------------------
  {
    fs::path regen = h.work / "fixtures";
    std::string cmd = h.mkfixtures + " " + regen.string() + " " + h.prompts.string() + " >" +
                      (h.work / "mk.log").string() + " 2>&1";
    int status = std::system(cmd.c_str());
    h.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, "mkfixtures regenerates");
    for (const char* name : {"problems.jsonl", "rollouts.jsonl", "cache.jsonl"}) {
      h.expect(read_file(regen / name) == read_file(h.fixtures / name),
               std::string("regenerated ") + name + " matches the bundled copy");
    }
  }

  fs::remove_all(h.work);
  if (h.failures) {
    std::printf("%d check(s) failed\n", h.failures);
    return 1;
  }
  std::printf("all cli checks passed\n");
  return 0;
}

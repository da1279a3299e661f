#include "logicscore/isabelle.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sys/stat.h>
#include <unistd.h>

using namespace logicscore;
namespace fs = std::filesystem;

namespace {

// A stand-in `isabelle` executable that prints a canned transcript; lets the
// adapter run end to end without a real install.
fs::path write_mock(const fs::path& dir, const std::string& body, int exit_code) {
  fs::create_directories(dir);
  fs::path script = dir / "isabelle";
  std::ofstream out(script);
  out << "#!/bin/sh\n" << body << "\nexit " << exit_code << "\n";
  out.close();
  ::chmod(script.c_str(), 0755);
  return script;
}

ProofBudget quick_budget(double seconds = 20.0) {
  ProofBudget b;
  b.timeout = std::chrono::duration<double>(seconds);
  return b;
}

const char* kDoc = "theory Step imports Main begin\nend\n";

} // namespace

TEST_CASE("output classification covers the verdict branches") {
  SUBCASE("clean build passes") {
    ProverVerdict v = classify_isabelle_output(0, false, "Finished Step_Check\n");
    CHECK(v.syntax_ok);
    CHECK(v.logic_ok);
  }
  SUBCASE("parse errors fail syntax") {
    ProverVerdict v = classify_isabelle_output(
        1, false, "*** Outer syntax error (line 4): unexpected text\n");
    CHECK_FALSE(v.syntax_ok);
    CHECK_FALSE(v.logic_ok);
    REQUIRE_FALSE(v.diagnostics.empty());
    CHECK(v.diagnostics[0] == "Outer syntax error (line 4): unexpected text");
  }
  SUBCASE("failed proofs keep syntax but fail logic") {
    ProverVerdict v = classify_isabelle_output(
        1, false, "*** Failed to finish proof:\n*** goal (1 subgoal):\n");
    CHECK(v.syntax_ok);
    CHECK_FALSE(v.logic_ok);
    CHECK(v.diagnostics.size() == 2);
  }
  SUBCASE("timeouts map to a logic failure with a timeout diagnostic") {
    ProverVerdict v = classify_isabelle_output(-1, true, "partial output");
    CHECK(v.syntax_ok);
    CHECK_FALSE(v.logic_ok);
    CHECK(v.diagnostics.back() == "timeout");
  }
  SUBCASE("unclassifiable failures fail closed with the raw tail") {
    ProverVerdict v = classify_isabelle_output(2, false, "something strange happened");
    CHECK(v.syntax_ok);
    CHECK_FALSE(v.logic_ok);
    REQUIRE_FALSE(v.diagnostics.empty());
    CHECK(v.diagnostics[0].find("something strange") != std::string::npos);
  }
}

TEST_CASE("isabelle_check requires a configured executable") {
  IsabelleConfig config;
  config.executable = "/definitely/not/here/isabelle";
  CHECK_THROWS_AS(isabelle_check(kDoc, quick_budget(), config), BackendUnavailable);
}

TEST_CASE("isabelle_check drives a mock binary end to end") {
  fs::path dir = fs::temp_directory_path() / ("logicscore-isa-" + std::to_string(::getpid()));
  fs::path scratch = dir / "scratch";

  SUBCASE("success transcript") {
    IsabelleConfig config;
    config.executable = write_mock(dir / "ok", "echo Finished Step_Check", 0);
    config.scratch_root = scratch;
    ProverVerdict v = isabelle_check(kDoc, quick_budget(), config);
    CHECK(v.syntax_ok);
    CHECK(v.logic_ok);
    CHECK(v.backend == ProverBackendKind::Isabelle);
  }
  SUBCASE("failing proof transcript") {
    IsabelleConfig config;
    config.executable =
        write_mock(dir / "fail", "echo '*** Failed to finish proof:'", 1);
    config.scratch_root = scratch;
    ProverVerdict v = isabelle_check(kDoc, quick_budget(), config);
    CHECK(v.syntax_ok);
    CHECK_FALSE(v.logic_ok);
    CHECK(v.diagnostics[0] == "Failed to finish proof:");
  }
  SUBCASE("parse-error transcript via the full check_text path") {
    IsabelleConfig config;
    config.executable =
        write_mock(dir / "syn", "echo '*** Inner syntax error at end of input'", 1);
    config.scratch_root = scratch;
    IsabelleProver prover(config);
    ProverVerdict v = prover.check_text("axiom: p(a)\ngoal: p(a)\n", quick_budget());
    CHECK_FALSE(v.syntax_ok);
    CHECK_FALSE(v.logic_ok);
  }
  SUBCASE("a hanging binary hits the budget and reports timeout") {
    IsabelleConfig config;
    config.executable = write_mock(dir / "hang", "sleep 5", 0);
    config.scratch_root = scratch;
    ProverVerdict v = isabelle_check(kDoc, quick_budget(0.2), config);
    CHECK(v.syntax_ok);
    CHECK_FALSE(v.logic_ok);
    CHECK(v.diagnostics.back() == "timeout");
  }
  SUBCASE("lif syntax errors never reach the binary") {
    IsabelleConfig config;
    config.executable = write_mock(dir / "never", "echo should-not-run; exit 9", 9);
    config.scratch_root = scratch;
    IsabelleProver prover(config);
    ProverVerdict v = prover.check_text("goal: p(a", quick_budget());
    CHECK_FALSE(v.syntax_ok);
    CHECK_FALSE(v.diagnostics.empty());
  }

  fs::remove_all(dir);
}

#include "logicscore/trace.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/io.hpp"
#include "logicscore/rng.hpp"

#include <doctest.h>

#include <filesystem>

using namespace logicscore;

namespace {

const char* kHarryText =
    "Step 1:\n"
    "Premise: Harry read a book. People who read books will be smart.\n"
    "Assumption: Harry is a person. A person is people.\n"
    "Conclusion: Harry will be smart.\n"
    "\n"
    "Final answer: [True]\n";

} // namespace

TEST_CASE("parse_trace reads the worked single-step example") {
  ResponseTrace trace = parse_trace(kHarryText, "p1", "r1");
  REQUIRE(trace.steps.size() == 1);
  CHECK(trace.steps[0].index == 1);
  CHECK(trace.steps[0].premise_text ==
        "Harry read a book. People who read books will be smart.");
  CHECK(trace.steps[0].soft_unification == "Harry is a person. A person is people.");
  CHECK(trace.steps[0].conclusion == "Harry will be smart.");
  CHECK(trace.answer == "True");
}

TEST_CASE("parse_trace accepts the Soft Unification label and option answers") {
  std::string text =
      "Step 1:\n"
      "Premise: All cats purr.\n"
      "Soft Unification: Tom is a cat.\n"
      "Conclusion: Tom purrs.\n"
      "Final answer: [A]\n";
  ResponseTrace trace = parse_trace(text, "p", "r");
  REQUIRE(trace.steps.size() == 1);
  CHECK(trace.steps[0].soft_unification == "Tom is a cat.");
  CHECK(trace.answer == "A");
}

TEST_CASE("parse_trace surfaces format violations") {
  SUBCASE("numbering gap") {
    std::string text =
        "Step 1:\nPremise: a.\nConclusion: b.\n"
        "Step 3:\nPremise: c.\nConclusion: d.\nFinal answer: [True]\n";
    CHECK_THROWS_AS(parse_trace(text, "p", "r"), MalformedTrace);
  }
  SUBCASE("no step blocks") {
    CHECK_THROWS_AS(parse_trace("just prose\nFinal answer: [True]\n", "p", "r"),
                    MalformedTrace);
  }
  SUBCASE("missing premise line") {
    std::string text = "Step 1:\nConclusion: b.\nFinal answer: [True]\n";
    CHECK_THROWS_AS(parse_trace(text, "p", "r"), MalformedTrace);
  }
  SUBCASE("missing conclusion line") {
    std::string text = "Step 1:\nPremise: a.\nFinal answer: [True]\n";
    CHECK_THROWS_AS(parse_trace(text, "p", "r"), MalformedTrace);
  }
  SUBCASE("missing final answer") {
    std::string text = "Step 1:\nPremise: a.\nConclusion: b.\n";
    CHECK_THROWS_AS(parse_trace(text, "p", "r"), MalformedTrace);
  }
  SUBCASE("numbering must start at 1") {
    std::string text = "Step 2:\nPremise: a.\nConclusion: b.\nFinal answer: [True]\n";
    CHECK_THROWS_AS(parse_trace(text, "p", "r"), MalformedTrace);
  }
  SUBCASE("empty final answer") {
    std::string text = "Step 1:\nPremise: a.\nConclusion: b.\nFinal answer: []\n";
    CHECK_THROWS_AS(parse_trace(text, "p", "r"), MalformedTrace);
  }
}

TEST_CASE("parse_trace ignores surrounding prose and folds wrapped lines") {
  std::string text =
      "Sure, here is my reasoning:\n\n"
      "Step 1:\n"
      "Premise: The sky is blue\n"
      "   and the grass is green.\n"
      "Conclusion: It is daytime.\n"
      "Thanks for asking!\n"
      "Final answer: [unknown]\n";
  ResponseTrace trace = parse_trace(text, "p", "r");
  CHECK(trace.steps[0].premise_text == "The sky is blue and the grass is green.");
  CHECK(trace.answer == "unknown");
}

TEST_CASE("extract_answer") {
  CHECK(extract_answer("...\nFinal answer: [True]") == "True");
  CHECK(extract_answer("Final answer: [entailment]") == "entailment");
  CHECK(extract_answer("final ANSWER:  [ B ]") == "B");
  CHECK_THROWS_AS(extract_answer("no answer line"), MissingAnswer);
  SUBCASE("the last answer line wins") {
    CHECK(extract_answer("Final answer: [False]\nmore text\nFinal answer: [True]\n") == "True");
  }
}

TEST_CASE("render_trace round-trips and normalizes the assumption alias") {
  ResponseTrace first = parse_trace(kHarryText, "p1", "r1");
  std::string rendered = render_trace(first);
  CHECK(rendered.find("Soft Unification: Harry is a person.") != std::string::npos);
  ResponseTrace second = parse_trace(rendered, "p1", "r1");
  CHECK(first.steps == second.steps);
  CHECK(first.answer == second.answer);
}

TEST_CASE("render/parse round-trip holds on generated traces") {
  Rng rng(42);
  const char* words[] = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};
  for (int t = 0; t < 50; ++t) {
    ResponseTrace trace;
    trace.problem_id = "p";
    trace.response_id = "r" + std::to_string(t);
    int steps = 1 + static_cast<int>(rng.bounded(4));
    for (int s = 1; s <= steps; ++s) {
      Step step;
      step.index = s;
      auto sentence = [&] {
        std::string out;
        int n = 2 + static_cast<int>(rng.bounded(4));
        for (int w = 0; w < n; ++w) {
          if (w) out += " ";
          out += words[rng.bounded(6)];
        }
        return out + ".";
      };
      step.premise_text = sentence();
      if (rng.bounded(2)) step.soft_unification = sentence();
      step.conclusion = sentence();
      trace.steps.push_back(step);
    }
    trace.answer = rng.bounded(2) ? "True" : "False";
    ResponseTrace back = parse_trace(render_trace(trace), "p", trace.response_id);
    CHECK(back.steps == trace.steps);
    CHECK(back.answer == trace.answer);
  }
}

TEST_CASE("attach_token_probs aligns conclusions and tags outside tokens with 0") {
  ResponseTrace trace = parse_trace(kHarryText, "p1", "r1");

  SUBCASE("exact concatenation") {
    std::vector<std::pair<std::string, double>> tokens = {
        {"Harry", 0.9}, {" will", 0.8}, {" be", 0.9}, {" smart", 0.7}, {".", 1.0}};
    ResponseTrace tagged = attach_token_probs(trace, tokens);
    REQUIRE(tagged.token_probs.has_value());
    for (const TokenSpan& span : *tagged.token_probs) CHECK(span.step_index == 1);
  }

  SUBCASE("prefix and suffix tokens stay unassigned") {
    std::vector<std::pair<std::string, double>> tokens = {
        {"Conclusion:", 0.5}, {" Harry will be smart.", 0.8}, {"\nFinal", 0.5}};
    ResponseTrace tagged = attach_token_probs(trace, tokens);
    CHECK((*tagged.token_probs)[0].step_index == 0);
    CHECK((*tagged.token_probs)[1].step_index == 1);
    CHECK((*tagged.token_probs)[2].step_index == 0);
  }

  SUBCASE("no token data returns the trace unchanged") {
    ResponseTrace same = attach_token_probs(trace, {});
    CHECK_FALSE(same.token_probs.has_value());
  }

  SUBCASE("missing conclusion text fails alignment") {
    std::vector<std::pair<std::string, double>> tokens = {{"unrelated", 0.4}, {" text", 0.6}};
    CHECK_THROWS_AS(attach_token_probs(trace, tokens), AlignmentFailure);
  }

  SUBCASE("alignment never alters step text") {
    std::vector<std::pair<std::string, double>> tokens = {{"Harry will be smart.", 0.9}};
    ResponseTrace tagged = attach_token_probs(trace, tokens);
    CHECK(tagged.steps == trace.steps);
  }
}

TEST_CASE("spans per step cover the conclusion exactly once on token-exact traces") {
  Rng rng(77);
  const char* words[] = {"north", "south", "east", "west", "upper", "lower"};
  for (int trial = 0; trial < 30; ++trial) {
    ResponseTrace trace;
    trace.problem_id = "p";
    trace.response_id = "r";
    int steps = 1 + static_cast<int>(rng.bounded(3));
    for (int s = 1; s <= steps; ++s) {
      Step step;
      step.index = s;
      step.premise_text = "premise.";
      std::string conclusion;
      int n = 2 + static_cast<int>(rng.bounded(3));
      for (int w = 0; w < n; ++w) {
        if (w) conclusion += " ";
        conclusion += words[rng.bounded(6)];
        conclusion += std::to_string(s); // conclusions never repeat across steps
      }
      step.conclusion = conclusion + ".";
      trace.steps.push_back(step);
    }
    trace.answer = "True";

    // word-level tokenization of the rendered text, whitespace attached
    std::string text = render_trace(trace);
    std::vector<std::pair<std::string, double>> tokens;
    size_t i = 0;
    while (i < text.size()) {
      size_t start = i;
      while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
      if (i == start) break;
      tokens.emplace_back(text.substr(start, i - start), 0.9);
    }

    ResponseTrace tagged = attach_token_probs(trace, tokens);
    REQUIRE(tagged.token_probs.has_value());
    for (const Step& step : trace.steps) {
      std::string covered;
      for (const TokenSpan& span : *tagged.token_probs)
        if (span.step_index == step.index) covered += span.text;
      // the assigned spans contain the conclusion exactly once
      size_t first = covered.find(step.conclusion);
      REQUIRE(first != std::string::npos);
      CHECK(covered.find(step.conclusion, first + 1) == std::string::npos);
    }
  }
}

TEST_CASE("problems and rollouts jsonl round-trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / ("logicscore-io-" + std::to_string(::getpid()));
  fs::create_directories(dir);

  std::vector<Problem> problems;
  Problem p;
  p.id = "p1";
  p.premises = {"Harry read a book.", "People who read books will be smart."};
  p.question = "Will Harry be smart?";
  p.gold_answer = "True";
  problems.push_back(p);
  write_problems(dir / "problems.jsonl", problems);
  std::vector<Problem> loaded = load_problems(dir / "problems.jsonl");
  REQUIRE(loaded.size() == 1);
  CHECK(loaded[0].premises == p.premises);
  CHECK(loaded[0].gold_answer == p.gold_answer);

  RolloutRecord rec;
  rec.problem_id = "p1";
  rec.response_id = "m-0";
  rec.origin = "m";
  rec.text = kHarryText;
  rec.tokens = {{{"Harry", 0.9}, {" will be smart.", 0.8}}};
  write_rollout_records(dir / "rollouts.jsonl", {rec});
  std::vector<RolloutRecord> records = load_rollout_records(dir / "rollouts.jsonl");
  REQUIRE(records.size() == 1);
  ResponseTrace trace = parse_rollout_record(records[0]);
  CHECK(trace.origin == "m");
  REQUIRE(trace.token_probs.has_value());
  CHECK((*trace.token_probs)[1].step_index == 1);

  SUBCASE("duplicate problem ids are rejected") {
    write_problems(dir / "dup.jsonl", {p, p});
    CHECK_THROWS_AS(load_problems(dir / "dup.jsonl"), IoError);
  }

  fs::remove_all(dir);
}

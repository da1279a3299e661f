#pragma once

#include <optional>
#include <string>
#include <vector>

namespace logicscore {

// One scoring unit: premises, a question, and (when known) the gold label.
struct Problem {
  std::string id;
  std::vector<std::string> premises;
  std::string question;
  std::optional<std::string> gold_answer;
};

// A generated token with its probability, tagged with the step whose
// conclusion it belongs to (0 = outside any conclusion).
struct TokenSpan {
  std::string text;
  double prob = 0.0;
  int step_index = 0;
};

// One reasoning step: the premises it cites, the assumption line bridging
// implicit gaps, and the inference drawn.
struct Step {
  int index = 0;
  std::string premise_text;
  std::string soft_unification;
  std::string conclusion;

  bool operator==(const Step&) const = default;
};

struct ResponseTrace {
  std::string problem_id;
  std::string response_id;
  std::string origin; // free-form model tag
  std::vector<Step> steps;
  std::string answer; // stored verbatim; normalization happens in scoring
  std::optional<std::vector<TokenSpan>> token_probs;
};

struct RolloutRejection {
  std::string problem_id;
  std::string response_id;
  std::string reason;
};

// The n sampled responses to one problem.
struct RolloutSet {
  std::string problem_id;
  std::vector<ResponseTrace> traces;
  std::vector<RolloutRejection> rejections;
};

// ---------------------------------------------------------------------------
// operations
// ---------------------------------------------------------------------------

// Parses raw model output in the numbered-step format:
//
//   Step 1:
//   Premise: ...
//   Soft Unification: ...     (label "Assumption:" is accepted as an alias)
//   Conclusion: ...
//   ...
//   Final answer: [X]
//
// Labels match case-insensitively; prose outside the blocks is ignored.
// Throws MalformedTrace when no step blocks exist, numbering is not
// 1..m consecutive, a block lacks a Premise or Conclusion, or there is no
// final-answer line.
ResponseTrace parse_trace(const std::string& text, const std::string& problem_id,
                          const std::string& response_id);

// Bracketed content of the last `Final answer: [X]` line, trimmed.
// Throws MissingAnswer when no such line exists.
std::string extract_answer(const std::string& text);

// Canonical text form. parse_trace(render_trace(t)) == t up to label aliasing.
std::string render_trace(const ResponseTrace& trace);

// Aligns generator tokens to step conclusions by greedy in-order substring
// matching over the concatenated token stream. Tokens outside every
// conclusion get step_index 0. An empty token list returns the trace
// unchanged. Throws AlignmentFailure when a conclusion cannot be located.
ResponseTrace attach_token_probs(const ResponseTrace& trace,
                                 const std::vector<std::pair<std::string, double>>& tokens);

} // namespace logicscore

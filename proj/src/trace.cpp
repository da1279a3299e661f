#include "logicscore/trace.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <cctype>
#include <sstream>

namespace logicscore {

namespace {

// Matches "Step N:" (case-insensitive) and returns N plus any trailing text.
bool match_step_header(const std::string& line, int& number, std::string& rest) {
  std::string t = trim(line);
  if (!starts_with_ci(t, "step")) return false;
  size_t pos = 4;
  if (pos >= t.size() || !std::isspace(static_cast<unsigned char>(t[pos]))) return false;
  while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
  size_t digits_start = pos;
  while (pos < t.size() && std::isdigit(static_cast<unsigned char>(t[pos]))) ++pos;
  if (pos == digits_start) return false;
  int n = 0;
  for (size_t i = digits_start; i < pos; ++i) n = n * 10 + (t[i] - '0');
  if (pos >= t.size() || t[pos] != ':') return false;
  number = n;
  rest = trim(t.substr(pos + 1));
  return true;
}

// Matches "<label>: value" case-insensitively on the label.
bool match_label(const std::string& line, std::string_view label, std::string& value) {
  std::string t = trim(line);
  if (!starts_with_ci(t, label)) return false;
  size_t pos = label.size();
  while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
  if (pos >= t.size() || t[pos] != ':') return false;
  value = trim(t.substr(pos + 1));
  return true;
}

bool match_final_answer(const std::string& line, std::string& answer) {
  std::string t = trim(line);
  if (!starts_with_ci(t, "final answer")) return false;
  size_t pos = 12;
  while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
  if (pos >= t.size() || t[pos] != ':') return false;
  ++pos;
  while (pos < t.size() && std::isspace(static_cast<unsigned char>(t[pos]))) ++pos;
  if (pos >= t.size() || t[pos] != '[') return false;
  size_t close = t.rfind(']');
  if (close == std::string::npos || close <= pos) return false;
  if (!trim(t.substr(close + 1)).empty()) return false;
  answer = trim(t.substr(pos + 1, close - pos - 1));
  return true;
}

void append_field(std::string& field, const std::string& text) {
  if (text.empty()) return;
  if (field.empty()) field = text;
  else field += " " + text;
}

} // namespace

std::string extract_answer(const std::string& text) {
  std::string answer;
  bool found = false;
  for (const std::string& line : split_lines(text)) {
    std::string a;
    if (match_final_answer(line, a)) {
      answer = a;
      found = true; // keep scanning: the last final-answer line wins
    }
  }
  if (!found) throw MissingAnswer("no 'Final answer: [X]' line found");
  return answer;
}

ResponseTrace parse_trace(const std::string& text, const std::string& problem_id,
                          const std::string& response_id) {
  ResponseTrace trace;
  trace.problem_id = problem_id;
  trace.response_id = response_id;

  enum class Field { None, Premise, SoftUnification, Conclusion };
  Step current;
  Field active = Field::None;
  bool in_step = false;

  auto flush = [&](std::vector<Step>& steps) {
    if (!in_step) return;
    if (trim(current.premise_text).empty())
      throw MalformedTrace("step " + std::to_string(current.index) + " lacks a Premise line");
    if (trim(current.conclusion).empty())
      throw MalformedTrace("step " + std::to_string(current.index) + " lacks a Conclusion line");
    steps.push_back(current);
  };

  auto handle_line = [&](const std::string& line, auto&& self) -> void {
    int number = 0;
    std::string rest, value;
    if (match_step_header(line, number, rest)) {
      flush(trace.steps);
      int expected = static_cast<int>(trace.steps.size()) + 1;
      if (number != expected)
        throw MalformedTrace("step numbering gap: expected Step " + std::to_string(expected) +
                             ", found Step " + std::to_string(number));
      current = Step{};
      current.index = number;
      active = Field::None;
      in_step = true;
      if (!rest.empty()) self(rest, self); // tolerate "Step 1: Premise: ..." on one line
      return;
    }
    std::string dummy;
    if (match_final_answer(line, dummy)) {
      active = Field::None; // answer lines never continue a field
      return;
    }
    if (!in_step) return; // prose outside blocks is ignored
    if (match_label(line, "premise", value)) {
      append_field(current.premise_text, value);
      active = Field::Premise;
    } else if (match_label(line, "soft unification", value) ||
               match_label(line, "assumption", value)) {
      append_field(current.soft_unification, value);
      active = Field::SoftUnification;
    } else if (match_label(line, "conclusion", value)) {
      append_field(current.conclusion, value);
      active = Field::Conclusion;
    } else {
      std::string t = trim(line);
      if (t.empty()) return;
      switch (active) { // wrapped continuation of the last labelled line
        case Field::Premise: append_field(current.premise_text, t); break;
        case Field::SoftUnification: append_field(current.soft_unification, t); break;
        case Field::Conclusion: append_field(current.conclusion, t); break;
        case Field::None: break;
      }
    }
  };

  for (const std::string& line : split_lines(text)) handle_line(line, handle_line);
  flush(trace.steps);

  if (trace.steps.empty()) throw MalformedTrace("no step blocks found");

  try {
    trace.answer = extract_answer(text);
  } catch (const MissingAnswer& e) {
    throw MalformedTrace(e.what());
  }
  if (trace.answer.empty()) throw MalformedTrace("final answer is empty");
  return trace;
}

std::string render_trace(const ResponseTrace& trace) {
  std::ostringstream out;
  for (const Step& step : trace.steps) {
    out << "Step " << step.index << ":\n";
    out << "Premise: " << step.premise_text << "\n";
    out << "Soft Unification: " << step.soft_unification << "\n";
    out << "Conclusion: " << step.conclusion << "\n\n";
  }
  out << "Final answer: [" << trace.answer << "]\n";
  return out.str();
}

ResponseTrace attach_token_probs(const ResponseTrace& trace,
                                 const std::vector<std::pair<std::string, double>>& tokens) {
  if (tokens.empty()) return trace;

  std::string stream;
  std::vector<std::pair<size_t, size_t>> extents; // [begin, end) of each token
  extents.reserve(tokens.size());
  for (const auto& [text, prob] : tokens) {
    (void)prob;
    extents.emplace_back(stream.size(), stream.size() + text.size());
    stream += text;
  }

  ResponseTrace out = trace;
  out.token_probs = std::vector<TokenSpan>();
  auto& spans = *out.token_probs;
  spans.reserve(tokens.size());
  for (const auto& [text, prob] : tokens) spans.push_back(TokenSpan{text, prob, 0});

  size_t pos = 0;
  for (const Step& step : trace.steps) {
    size_t at = stream.find(step.conclusion, pos);
    if (at == std::string::npos)
      throw AlignmentFailure("conclusion of step " + std::to_string(step.index) +
                             " not found in token stream");
    size_t end = at + step.conclusion.size();
    for (size_t i = 0; i < spans.size(); ++i) {
      if (extents[i].first < end && extents[i].second > at) spans[i].step_index = step.index;
    }
    pos = end;
  }
  return out;
}

} // namespace logicscore

#include "logicscore/premise.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>

namespace logicscore {

namespace {

constexpr std::array<std::string_view, 6> kAbbreviations = {
    "e.g.", "i.e.", "etc.", "Dr.", "Mr.", "Ms.",
};

// True when the terminator at `pos` closes a known abbreviation rather than a
// sentence. Comparison is case-insensitive and anchored at a word boundary.
bool ends_abbreviation(std::string_view text, size_t pos) {
  for (std::string_view abbr : kAbbreviations) {
    if (pos + 1 < abbr.size()) continue;
    size_t start = pos + 1 - abbr.size();
    std::string_view candidate = text.substr(start, abbr.size());
    bool match = true;
    for (size_t i = 0; i < abbr.size(); ++i) {
      if (std::tolower(static_cast<unsigned char>(candidate[i])) !=
          std::tolower(static_cast<unsigned char>(abbr[i]))) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (start == 0 || !std::isalnum(static_cast<unsigned char>(text[start - 1]))) return true;
  }
  return false;
}

} // namespace

EmbeddingVector make_embedding(std::vector<double> components) {
  EmbeddingVector v;
  v.components = std::move(components);
  double sumsq = 0.0;
  for (double x : v.components) sumsq += x * x;
  v.norm = std::sqrt(sumsq);
  return v;
}

SentenceSet split_sentences(const std::string& text) {
  SentenceSet set;
  size_t start = 0;
  for (size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c != '.' && c != '!' && c != '?') continue;
    bool boundary =
        (i + 1 == text.size()) || std::isspace(static_cast<unsigned char>(text[i + 1]));
    if (!boundary) continue;
    if (c == '.' && ends_abbreviation(text, i)) continue;
    std::string fragment = trim(std::string_view(text).substr(start, i + 1 - start));
    if (!fragment.empty()) set.sentences.push_back(std::move(fragment));
    start = i + 1;
  }
  std::string tail = trim(std::string_view(text).substr(start));
  if (!tail.empty()) set.sentences.push_back(std::move(tail));
  return set;
}

std::vector<EmbeddingVector> LexicalEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(embed_one(t));
  return out;
}

EmbeddingVector LexicalEmbedder::embed_one(const std::string& text) {
  EmbeddingVector v;
  v.components.assign(kDim, 0.0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    v.components[fnv1a64(token) % kDim] += 1.0;
    token.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else {
      flush();
    }
  }
  flush();

  double sumsq = 0.0;
  for (double x : v.components) sumsq += x * x;
  double norm = std::sqrt(sumsq);
  if (norm > 0.0) {
    for (double& x : v.components) x /= norm;
    v.norm = 1.0;
  } else {
    v.norm = 0.0; // zero vector is only produced by empty text
  }
  return v;
}

double cosine(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.components.size() != v.components.size())
    throw DimensionMismatch("cosine over vectors of dimension " +
                            std::to_string(u.components.size()) + " and " +
                            std::to_string(v.components.size()));
  if (u.norm == 0.0 || v.norm == 0.0) return 0.0;
  double dot = 0.0;
  for (size_t i = 0; i < u.components.size(); ++i) dot += u.components[i] * v.components[i];
  return dot / (u.norm * v.norm);
}

double premise_validity(const Step& step, const std::vector<std::string>& premises,
                        EmbeddingProvider& provider, PremiseAggregate aggregate) {
  SentenceSet sentences = split_sentences(step.premise_text);
  if (sentences.sentences.empty() || premises.empty()) return 0.0;

  std::vector<std::string> batch = sentences.sentences;
  batch.insert(batch.end(), premises.begin(), premises.end());
  std::vector<EmbeddingVector> vecs = provider.embed(batch);
  if (vecs.size() != batch.size())
    throw ProviderError("embedding provider returned " + std::to_string(vecs.size()) +
                        " vectors for " + std::to_string(batch.size()) + " inputs");

  size_t m = sentences.sentences.size();
  double mean_acc = 0.0;
  double global_max = 0.0;
  for (size_t j = 0; j < m; ++j) {
    double best = -1.0;
    for (size_t k = 0; k < premises.size(); ++k)
      best = std::max(best, cosine(vecs[j], vecs[m + k]));
    double clamped = std::clamp(best, 0.0, 1.0);
    mean_acc += clamped;
    global_max = std::max(global_max, clamped);
  }
  return aggregate == PremiseAggregate::GlobalMax ? global_max : mean_acc / static_cast<double>(m);
}

} // namespace logicscore

#pragma once

#include "logicscore/trace.hpp"

#include <string>
#include <vector>

namespace logicscore {

struct SentenceSet {
  std::vector<std::string> sentences;
};

struct EmbeddingVector {
  std::vector<double> components;
  double norm = 0.0;
};

// Builds a vector with its Euclidean norm precomputed.
EmbeddingVector make_embedding(std::vector<double> components);

// Batch embedding contract: one vector per input string, all of equal length.
class EmbeddingProvider {
public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) = 0;
};

// Deterministic bag-of-words embedder: case-fold, split on non-alphanumerics,
// FNV-1a 64-bit hash each token, accumulate counts at (hash mod 256),
// L2-normalize. Identical output on every platform, which makes it the
// test and golden-run default.
class LexicalEmbedder : public EmbeddingProvider {
public:
  static constexpr std::size_t kDim = 256;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override;
  EmbeddingVector embed_one(const std::string& text);
};

// Splits on '.', '!' or '?' followed by whitespace or end of text. A short
// list of known abbreviations (e.g., i.e., etc., Dr., Mr., Ms.) never splits.
SentenceSet split_sentences(const std::string& text);

// dot(u,v) / (|u||v|); 0 when either norm is 0. Throws DimensionMismatch.
double cosine(const EmbeddingVector& u, const EmbeddingVector& v);

enum class PremiseAggregate {
  MeanOfMax, // mean over sentences of the per-sentence max similarity
  GlobalMax, // single max over the full sentence x premise similarity matrix
};

// Grounding score of a step's cited premises in the given premise set:
// split premise_text into sentences, take each sentence's best cosine match
// over the premises (clamped to [0,1]), aggregate. Empty premise_text
// scores 0.
double premise_validity(const Step& step, const std::vector<std::string>& premises,
                        EmbeddingProvider& provider,
                        PremiseAggregate aggregate = PremiseAggregate::MeanOfMax);

} // namespace logicscore

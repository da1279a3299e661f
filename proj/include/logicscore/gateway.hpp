#pragma once

#include "logicscore/premise.hpp"
#include "logicscore/trace.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace logicscore {

enum class GatewayMode { Live, Record, Replay };

struct SamplingParams {
  double temperature = 0.6;
  int max_tokens = 2048;

  bool operator==(const SamplingParams&) const = default;
};

struct CompletionRequest {
  std::string prompt_id; // template name + version, e.g. "rollout@v1"
  std::string rendered_prompt;
  std::string model_tag;
  SamplingParams sampling;
  bool want_token_probs = false;
  int sample_index = 0; // distinguishes repeated samples of one prompt
};

struct Completion {
  std::string text;
  std::optional<std::vector<std::pair<std::string, double>>> token_probs;
};

// Platform-stable digest of every request field; the cache key.
std::string completion_cache_key(const CompletionRequest& request);

// Abstract network layer, injectable so tests and the fixture generator can
// run without any live service. Replay mode never touches it.
class Transport {
public:
  virtual ~Transport() = default;
  virtual Completion complete(const CompletionRequest& request) = 0;
  virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) = 0;
  virtual double score(const std::string& scorer_tag, const std::string& rendered_trace) = 0;
};

struct HttpTransportConfig {
  std::string base_url;     // e.g. https://api.example.com
  std::string api_key_env;  // name of the env var holding the credential
  std::string embed_path = "/v1/embeddings";
  std::string complete_path = "/v1/chat/completions";
  std::string embed_model = "text-embedding";
  std::map<std::string, std::string> scorer_urls; // scorer_tag -> url
};

// Chat-completion style HTTP JSON client. Requires the credential env var in
// live/record mode.
std::unique_ptr<Transport> make_http_transport(const HttpTransportConfig& config);

// Loads prompt templates from a directory; "name@vN" maps to "name.vN.txt".
class PromptStore {
public:
  explicit PromptStore(std::filesystem::path dir);
  // substitutes [PLACEHOLDER] markers; throws ConfigError on unknown ids
  std::string render(const std::string& prompt_id,
                     const std::map<std::string, std::string>& subs) const;
  const std::filesystem::path& dir() const { return dir_; }

private:
  std::filesystem::path dir_;
};

struct RolloutConfig {
  int n = 8;
  // model tag -> sample count, in request order; counts must sum to n
  std::vector<std::pair<std::string, int>> split = {{"qwen3-8b", 5}, {"gpt-4o", 3}};
  SamplingParams sampling;
  bool want_token_probs = true;
};

// All external-service access: LLM completions, remote embeddings and
// external scorers, each behind the deterministic record/replay cache.
class Gateway {
public:
  Gateway(GatewayMode mode, std::filesystem::path cache_path, Transport* transport);

  GatewayMode mode() const { return mode_; }

  Completion complete(const CompletionRequest& request);
  std::vector<EmbeddingVector> embed_remote(const std::vector<std::string>& texts);
  double external_score(const ResponseTrace& trace, const std::string& scorer_tag);

  // Renders the rollout prompt for the problem and samples the configured
  // counts per model, parsing each response. Unparseable responses become
  // rejection notes rather than traces.
  RolloutSet generate_rollouts(const Problem& problem, const PromptStore& prompts,
                               const RolloutConfig& config);

  static std::string render_rollout_prompt(const PromptStore& prompts, const Problem& problem);

private:
  Completion complete_locked(const CompletionRequest& request);
  void append_entry(const std::string& line);

  GatewayMode mode_;
  std::filesystem::path cache_path_;
  Transport* transport_; // may be null in replay mode

  std::mutex mu_;
  std::map<std::string, Completion> completions_;             // key -> response
  std::map<std::string, std::string> completion_prompts_;     // key -> prompt (collision guard)
  std::map<std::string, std::vector<double>> embeddings_;     // text digest -> vector
  std::map<std::string, double> scores_;                      // scorer digest -> value
  std::optional<size_t> embed_dim_;
};

// Remote embedding provider backed by a gateway.
class RemoteEmbedder : public EmbeddingProvider {
public:
  explicit RemoteEmbedder(Gateway& gateway) : gateway_(gateway) {}
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts) override {
    return gateway_.embed_remote(texts);
  }

private:
  Gateway& gateway_;
};

} // namespace logicscore

#include "logicscore/gateway.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/io.hpp"
#include "logicscore/util.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace logicscore {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// cache keys
// ---------------------------------------------------------------------------

std::string completion_cache_key(const CompletionRequest& request) {
  std::string canon;
  canon += request.prompt_id;
  canon += '\x1f';
  canon += request.model_tag;
  canon += '\x1f';
  canon += format_fixed(request.sampling.temperature, 6);
  canon += '\x1f';
  canon += std::to_string(request.sampling.max_tokens);
  canon += '\x1f';
  canon += std::to_string(request.sample_index);
  canon += '\x1f';
  canon += request.want_token_probs ? '1' : '0';
  canon += '\x1f';
  canon += request.rendered_prompt;
  return to_hex(fnv1a64(canon));
}

// ---------------------------------------------------------------------------
// prompt store
// ---------------------------------------------------------------------------

PromptStore::PromptStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string PromptStore::render(const std::string& prompt_id,
                                const std::map<std::string, std::string>& subs) const {
  size_t at = prompt_id.find('@');
  if (at == std::string::npos)
    throw ConfigError("prompt id '" + prompt_id + "' must look like name@version");
  std::filesystem::path file =
      dir_ / (prompt_id.substr(0, at) + "." + prompt_id.substr(at + 1) + ".txt");
  if (!std::filesystem::exists(file))
    throw ConfigError("prompt asset missing: " + file.string());
  std::string text = read_file(file);
  for (const auto& [key, value] : subs) {
    std::string marker = "[" + key + "]";
    size_t pos = 0;
    while ((pos = text.find(marker, pos)) != std::string::npos) {
      text.replace(pos, marker.size(), value);
      pos += value.size();
    }
  }
  return text;
}

// ---------------------------------------------------------------------------
// gateway
// ---------------------------------------------------------------------------

Gateway::Gateway(GatewayMode mode, std::filesystem::path cache_path, Transport* transport)
    : mode_(mode), cache_path_(std::move(cache_path)), transport_(transport) {
  if (mode_ != GatewayMode::Replay && !transport_)
    throw ConfigError("live/record gateway mode requires a transport");

  if (std::filesystem::exists(cache_path_)) {
    int lineno = 0;
    for (const json& j : read_jsonl(cache_path_)) {
      ++lineno;
      std::string where = cache_path_.string() + ":" + std::to_string(lineno);
      try {
        std::string kind = j.value("kind", "completion");
        if (kind == "completion") {
          Completion c;
          c.text = j.at("text").get<std::string>();
          if (j.contains("tokens") && !j["tokens"].is_null()) {
            std::vector<std::pair<std::string, double>> toks;
            for (const json& t : j["tokens"])
              toks.emplace_back(t.at("t").get<std::string>(), t.at("p").get<double>());
            c.token_probs = std::move(toks);
          }
          std::string key = j.at("key").get<std::string>();
          completions_[key] = std::move(c);
          completion_prompts_[key] = j.at("prompt").get<std::string>();
        } else if (kind == "embedding") {
          embeddings_[j.at("key").get<std::string>()] =
              j.at("vector").get<std::vector<double>>();
        } else if (kind == "external_score") {
          scores_[j.at("key").get<std::string>()] = j.at("value").get<double>();
        } else {
          throw IoError(where + ": unknown cache entry kind '" + kind + "'");
        }
      } catch (const json::exception& e) {
        throw IoError(where + ": " + e.what());
      }
    }
    for (const auto& [key, vec] : embeddings_) {
      (void)key;
      if (!embed_dim_) embed_dim_ = vec.size();
    }
  } else if (mode_ == GatewayMode::Replay) {
    throw IoError("replay cache not found: " + cache_path_.string());
  }
}

void Gateway::append_entry(const std::string& line) {
  std::ofstream out(cache_path_, std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to cache " + cache_path_.string());
  out << line << "\n";
}

Completion Gateway::complete(const CompletionRequest& request) {
  if (trim(request.rendered_prompt).empty())
    throw ConfigError("completion request with an empty prompt");
  if (request.sampling.temperature < 0.0)
    throw ConfigError("temperature must be non-negative");
  std::lock_guard<std::mutex> lock(mu_);
  return complete_locked(request);
}

Completion Gateway::complete_locked(const CompletionRequest& request) {
  std::string key = completion_cache_key(request);

  auto it = completions_.find(key);
  if (it != completions_.end()) {
    auto pit = completion_prompts_.find(key);
    if (pit != completion_prompts_.end() && pit->second != request.rendered_prompt)
      throw GatewayError(GatewayError::Kind::CacheMiss,
                         "cache digest collision on " + key + "; refusing stale entry");
    return it->second;
  }

  if (mode_ == GatewayMode::Replay)
    throw GatewayError(GatewayError::Kind::CacheMiss,
                       "replay cache has no entry for digest " + key + " (prompt_id " +
                           request.prompt_id + ", model " + request.model_tag + ", sample " +
                           std::to_string(request.sample_index) + ")");

  Completion response = transport_->complete(request);

  if (mode_ == GatewayMode::Record) {
    ordered_json j;
    j["kind"] = "completion";
    j["key"] = key;
    j["prompt_id"] = request.prompt_id;
    j["model_tag"] = request.model_tag;
    j["temperature"] = request.sampling.temperature;
    j["max_tokens"] = request.sampling.max_tokens;
    j["sample_index"] = request.sample_index;
    j["want_token_probs"] = request.want_token_probs;
    j["prompt"] = request.rendered_prompt;
    j["text"] = response.text;
    if (response.token_probs) {
      ordered_json toks = ordered_json::array();
      for (const auto& [t, p] : *response.token_probs) {
        ordered_json tok;
        tok["t"] = t;
        tok["p"] = p;
        toks.push_back(std::move(tok));
      }
      j["tokens"] = std::move(toks);
    }
    append_entry(j.dump());
    completions_[key] = response;
    completion_prompts_[key] = request.rendered_prompt;
  }
  return response;
}

std::vector<EmbeddingVector> Gateway::embed_remote(const std::vector<std::string>& texts) {
  if (texts.empty()) return {};
  std::lock_guard<std::mutex> lock(mu_);

  std::vector<EmbeddingVector> out(texts.size());
  std::vector<size_t> missing;
  std::vector<std::string> missing_texts;
  for (size_t i = 0; i < texts.size(); ++i) {
    std::string key = to_hex(fnv1a64(texts[i]));
    auto it = embeddings_.find(key);
    if (it != embeddings_.end()) {
      out[i] = make_embedding(it->second);
    } else {
      // batch-local duplicates only go out once
      bool queued = false;
      for (size_t j : missing)
        if (texts[j] == texts[i]) { queued = true; break; }
      if (!queued) {
        missing.push_back(i);
        missing_texts.push_back(texts[i]);
      }
    }
  }

  if (!missing_texts.empty()) {
    if (mode_ == GatewayMode::Replay)
      throw GatewayError(GatewayError::Kind::CacheMiss,
                         "replay cache has no embedding for digest " +
                             to_hex(fnv1a64(missing_texts.front())));
    std::vector<std::vector<double>> vecs = transport_->embed(missing_texts);
    if (vecs.size() != missing_texts.size())
      throw GatewayError(GatewayError::Kind::Transport,
                         "embedding provider returned a short batch");
    for (size_t k = 0; k < vecs.size(); ++k) {
      if (embed_dim_ && vecs[k].size() != *embed_dim_)
        throw DimensionMismatch("embedding provider changed dimension from " +
                                std::to_string(*embed_dim_) + " to " +
                                std::to_string(vecs[k].size()));
      if (!embed_dim_) embed_dim_ = vecs[k].size();
      std::string key = to_hex(fnv1a64(missing_texts[k]));
      embeddings_[key] = vecs[k];
      if (mode_ == GatewayMode::Record) {
        ordered_json j;
        j["kind"] = "embedding";
        j["key"] = key;
        j["text"] = missing_texts[k];
        j["vector"] = vecs[k];
        append_entry(j.dump());
      }
    }
  }

  for (size_t i = 0; i < texts.size(); ++i) {
    if (!out[i].components.empty()) continue;
    auto it = embeddings_.find(to_hex(fnv1a64(texts[i])));
    if (it == embeddings_.end())
      throw GatewayError(GatewayError::Kind::Transport, "embedding missing after fetch");
    out[i] = make_embedding(it->second);
  }

  size_t dim = out.front().components.size();
  for (const EmbeddingVector& v : out)
    if (v.components.size() != dim)
      throw DimensionMismatch("ragged embedding batch");
  return out;
}

double Gateway::external_score(const ResponseTrace& trace, const std::string& scorer_tag) {
  std::string rendered = render_trace(trace);
  std::string key = to_hex(fnv1a64(scorer_tag + "\x1f" + rendered));
  std::lock_guard<std::mutex> lock(mu_);
  auto it = scores_.find(key);
  if (it != scores_.end()) return it->second;
  if (mode_ == GatewayMode::Replay)
    throw GatewayError(GatewayError::Kind::CacheMiss,
                       "replay cache has no external score for digest " + key);
  double value = transport_->score(scorer_tag, rendered);
  scores_[key] = value;
  if (mode_ == GatewayMode::Record) {
    ordered_json j;
    j["kind"] = "external_score";
    j["key"] = key;
    j["scorer"] = scorer_tag;
    j["value"] = value;
    append_entry(j.dump());
  }
  return value;
}

std::string Gateway::render_rollout_prompt(const PromptStore& prompts, const Problem& problem) {
  std::string premises;
  for (size_t i = 0; i < problem.premises.size(); ++i) {
    if (i) premises += " ";
    premises += problem.premises[i];
  }
  return prompts.render("rollout@v1", {{"PREMISES", premises}, {"QUESTION", problem.question}});
}

RolloutSet Gateway::generate_rollouts(const Problem& problem, const PromptStore& prompts,
                                      const RolloutConfig& config) {
  int total = 0;
  for (const auto& [tag, count] : config.split) {
    (void)tag;
    if (count < 0) throw ConfigError("rollout split counts must be non-negative");
    total += count;
  }
  if (total != config.n)
    throw ConfigError("rollout split sums to " + std::to_string(total) + " but n=" +
                      std::to_string(config.n));

  std::string prompt = render_rollout_prompt(prompts, problem);

  RolloutSet set;
  set.problem_id = problem.id;
  for (const auto& [model_tag, count] : config.split) {
    for (int k = 0; k < count; ++k) {
      CompletionRequest request;
      request.prompt_id = "rollout@v1";
      request.rendered_prompt = prompt;
      request.model_tag = model_tag;
      request.sampling = config.sampling;
      request.want_token_probs = config.want_token_probs;
      request.sample_index = k;
      Completion completion = complete(request);

      std::string response_id = model_tag + "-" + std::to_string(k);
      try {
        ResponseTrace trace = parse_trace(completion.text, problem.id, response_id);
        trace.origin = model_tag;
        if (completion.token_probs) trace = attach_token_probs(trace, *completion.token_probs);
        set.traces.push_back(std::move(trace));
      } catch (const MalformedTrace& e) {
        set.rejections.push_back({problem.id, response_id, e.what()});
      } catch (const AlignmentFailure&) {
        // the step text parsed; keep the trace and drop only its token data
        ResponseTrace trace = parse_trace(completion.text, problem.id, response_id);
        trace.origin = model_tag;
        set.traces.push_back(std::move(trace));
      }
    }
  }
  return set;
}

// ---------------------------------------------------------------------------
// HTTP transport
// ---------------------------------------------------------------------------

namespace {

class HttpTransport : public Transport {
public:
  explicit HttpTransport(HttpTransportConfig config) : config_(std::move(config)) {}

  Completion complete(const CompletionRequest& request) override {
    httplib::Client client(base_url());
    client.set_read_timeout(120, 0);
    ordered_json body;
    body["model"] = request.model_tag;
    body["messages"] = ordered_json::array({ordered_json{{"role", "user"},
                                                         {"content", request.rendered_prompt}}});
    body["temperature"] = request.sampling.temperature;
    body["max_tokens"] = request.sampling.max_tokens;
    if (request.want_token_probs) body["logprobs"] = true;

    auto res = client.Post(config_.complete_path, headers(), body.dump(), "application/json");
    if (!res)
      throw GatewayError(GatewayError::Kind::Transport,
                         "completion request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
      throw GatewayError(GatewayError::Kind::Transport,
                         "completion request returned HTTP " + std::to_string(res->status));
    try {
      json j = json::parse(res->body);
      Completion out;
      const json& choice = j.at("choices").at(0);
      out.text = choice.at("message").at("content").get<std::string>();
      if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
          choice["logprobs"].contains("content")) {
        std::vector<std::pair<std::string, double>> toks;
        for (const json& t : choice["logprobs"]["content"])
          toks.emplace_back(t.at("token").get<std::string>(),
                            std::exp(t.at("logprob").get<double>()));
        out.token_probs = std::move(toks);
      }
      return out;
    } catch (const json::exception& e) {
      throw GatewayError(GatewayError::Kind::Transport,
                         std::string("malformed completion response: ") + e.what());
    }
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    httplib::Client client(base_url());
    ordered_json body;
    body["model"] = config_.embed_model;
    body["input"] = texts;
    auto res = client.Post(config_.embed_path, headers(), body.dump(), "application/json");
    if (!res || res->status != 200)
      throw GatewayError(GatewayError::Kind::Transport, "embedding request failed");
    try {
      json j = json::parse(res->body);
      std::vector<std::vector<double>> out;
      for (const json& row : j.at("data"))
        out.push_back(row.at("embedding").get<std::vector<double>>());
      return out;
    } catch (const json::exception& e) {
      throw GatewayError(GatewayError::Kind::Transport,
                         std::string("malformed embedding response: ") + e.what());
    }
  }

  double score(const std::string& scorer_tag, const std::string& rendered_trace) override {
    auto it = config_.scorer_urls.find(scorer_tag);
    if (it == config_.scorer_urls.end())
      throw ConfigError("unknown external scorer '" + scorer_tag + "'");
    httplib::Client client(it->second);
    ordered_json body;
    body["input"] = rendered_trace;
    auto res = client.Post("/", headers(), body.dump(), "application/json");
    if (!res || res->status != 200)
      throw GatewayError(GatewayError::Kind::Transport,
                         "external scorer '" + scorer_tag + "' request failed");
    try {
      return json::parse(res->body).at("score").get<double>();
    } catch (const json::exception& e) {
      throw GatewayError(GatewayError::Kind::Transport,
                         std::string("malformed scorer response: ") + e.what());
    }
  }

private:
  std::string base_url() const {
    if (config_.base_url.empty()) throw ConfigError("api base url not configured");
    return config_.base_url;
  }

  httplib::Headers headers() const {
    if (config_.api_key_env.empty())
      throw GatewayError(GatewayError::Kind::AuthMissing, "api_key_env not configured");
    const char* key = std::getenv(config_.api_key_env.c_str());
    if (!key || !*key)
      throw GatewayError(GatewayError::Kind::AuthMissing,
                         "credential env var " + config_.api_key_env + " is not set");
    return {{"Authorization", std::string("Bearer ") + key}};
  }

  HttpTransportConfig config_;
};

} // namespace

std::unique_ptr<Transport> make_http_transport(const HttpTransportConfig& config) {
  return std::make_unique<HttpTransport>(config);
}

} // namespace logicscore

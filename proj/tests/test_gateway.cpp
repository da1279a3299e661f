#include "logicscore/gateway.hpp"

#include "logicscore/errors.hpp"
#include "logicscore/util.hpp"

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <thread>
#include <unistd.h>

using namespace logicscore;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("logicscore-gw-" + std::to_string(::getpid()) + "-" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static std::atomic<int>& counter() {
    static std::atomic<int> c{0};
    return c;
  }
};

// Echoes a canned response and counts invocations.
class StubTransport : public Transport {
public:
  std::atomic<int> completions{0};
  std::atomic<int> embeds{0};
  std::string canned_text = "stub response";
  size_t embed_dim = 4;
  bool ragged = false;
  int delay_ms = 0;

  Completion complete(const CompletionRequest& request) override {
    ++completions;
    if (delay_ms)
      std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    Completion c;
    c.text = canned_text + " to " + request.prompt_id;
    return c;
  }

  std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) override {
    ++embeds;
    std::vector<std::vector<double>> out;
    for (size_t i = 0; i < texts.size(); ++i) {
      size_t dim = ragged && i == 1 ? embed_dim + 1 : embed_dim;
      std::vector<double> v(dim, 0.0);
      v[0] = static_cast<double>(texts[i].size());
      out.push_back(std::move(v));
    }
    return out;
  }

  double score(const std::string& tag, const std::string&) override {
    if (tag != "fixture") throw ConfigError("unknown external scorer '" + tag + "'");
    return 0.42;
  }
};

// Any touch means the test failed: replay mode must never reach the network.
class ExplodingTransport : public Transport {
public:
  Completion complete(const CompletionRequest&) override {
    FAIL("replay mode touched the transport");
    return {};
  }
  std::vector<std::vector<double>> embed(const std::vector<std::string>&) override {
    FAIL("replay mode touched the transport");
    return {};
  }
  double score(const std::string&, const std::string&) override {
    FAIL("replay mode touched the transport");
    return 0.0;
  }
};

CompletionRequest basic_request() {
  CompletionRequest r;
  r.prompt_id = "rollout@v1";
  r.rendered_prompt = "What is the answer?";
  r.model_tag = "model-a";
  r.sampling.temperature = 0.6;
  r.sampling.max_tokens = 128;
  r.sample_index = 2;
  return r;
}

} // namespace

TEST_CASE("cache keys are stable across platforms and runs") {
  // frozen digest: any change to the key derivation breaks every shipped cache
  CHECK(completion_cache_key(basic_request()) == "bbf84d2ae7a00975");
  CompletionRequest other = basic_request();
  other.sample_index = 3;
  CHECK(completion_cache_key(other) != completion_cache_key(basic_request()));
}

TEST_CASE("record then replay round-trips a completion") {
  TempDir dir;
  fs::path cache = dir.path / "cache.jsonl";
  StubTransport stub;
  std::string recorded;
  {
    Gateway gateway(GatewayMode::Record, cache, &stub);
    recorded = gateway.complete(basic_request()).text;
    CHECK(stub.completions == 1);
    // a second identical request is served from the cache
    CHECK(gateway.complete(basic_request()).text == recorded);
    CHECK(stub.completions == 1);
  }
  {
    ExplodingTransport boom;
    (void)boom;
    Gateway replay(GatewayMode::Replay, cache, nullptr);
    CHECK(replay.complete(basic_request()).text == recorded);
  }
}

TEST_CASE("replay misses name the digest and leave no side effects") {
  TempDir dir;
  fs::path cache = dir.path / "cache.jsonl";
  {
    StubTransport stub;
    Gateway gateway(GatewayMode::Record, cache, &stub);
    gateway.complete(basic_request());
  }
  Gateway replay(GatewayMode::Replay, cache, nullptr);
  CompletionRequest unseen = basic_request();
  unseen.rendered_prompt = "different prompt";
  try {
    replay.complete(unseen);
    FAIL("expected CacheMiss");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayError::Kind::CacheMiss);
    CHECK(std::string(e.what()).find(completion_cache_key(unseen)) != std::string::npos);
  }
}

TEST_CASE("replay requires an existing cache and no transport") {
  TempDir dir;
  CHECK_THROWS_AS(Gateway(GatewayMode::Replay, dir.path / "missing.jsonl", nullptr), IoError);
  CHECK_THROWS_AS(Gateway(GatewayMode::Record, dir.path / "cache.jsonl", nullptr), ConfigError);
}

TEST_CASE("identical concurrent requests collapse to one transport call") {
  TempDir dir;
  StubTransport stub;
  stub.delay_ms = 30;
  Gateway gateway(GatewayMode::Record, dir.path / "cache.jsonl", &stub);
  std::vector<std::thread> threads;
  for (int i = 0; i < 4; ++i)
    threads.emplace_back([&] { gateway.complete(basic_request()); });
  for (auto& t : threads) t.join();
  CHECK(stub.completions == 1);
}

TEST_CASE("embed_remote caches by text and enforces dimensions") {
  TempDir dir;
  StubTransport stub;
  Gateway gateway(GatewayMode::Record, dir.path / "cache.jsonl", &stub);

  SUBCASE("empty input short-circuits") {
    CHECK(gateway.embed_remote({}).empty());
    CHECK(stub.embeds == 0);
  }
  SUBCASE("repeated text in one batch gives identical vectors") {
    auto vecs = gateway.embed_remote({"alpha", "alpha", "beta"});
    REQUIRE(vecs.size() == 3);
    CHECK(vecs[0].components == vecs[1].components);
    CHECK(stub.embeds == 1);
    //,second call is fully cached
    gateway.embed_remote({"alpha", "beta"});
    CHECK(stub.embeds == 1);
  }
  SUBCASE("ragged provider output is rejected") {
    stub.ragged = true;
    CHECK_THROWS_AS(gateway.embed_remote({"one", "two"}), DimensionMismatch);
  }
  SUBCASE("replayed embeddings need no transport") {
    gateway.embed_remote({"gamma"});
    Gateway replay(GatewayMode::Replay, dir.path / "cache.jsonl", nullptr);
    CHECK(replay.embed_remote({"gamma"}).size() == 1);
    CHECK_THROWS_AS(replay.embed_remote({"delta"}), GatewayError);
  }
}

TEST_CASE("external_score passes through and records") {
  TempDir dir;
  StubTransport stub;
  ResponseTrace trace;
  trace.problem_id = "p";
  trace.response_id = "r";
  Step s;
  s.index = 1;
  s.premise_text = "a.";
  s.conclusion = "b.";
  trace.steps.push_back(s);
  trace.answer = "True";

  Gateway gateway(GatewayMode::Record, dir.path / "cache.jsonl", &stub);
  CHECK(gateway.external_score(trace, "fixture") == doctest::Approx(0.42));
  CHECK_THROWS_AS(gateway.external_score(trace, "nope"), ConfigError);

  Gateway replay(GatewayMode::Replay, dir.path / "cache.jsonl", nullptr);
  CHECK(replay.external_score(trace, "fixture") == doctest::Approx(0.42));
}

namespace {

// Produces a fixed well-formed trace for any rollout request.
class RolloutTransport : public Transport {
public:
  int bad_every = 0; // every n-th response is malformed
  std::atomic<int> calls{0};

  Completion complete(const CompletionRequest& request) override {
    int n = ++calls;
    Completion c;
    if (bad_every && n % bad_every == 0) {
      c.text = "I refuse to follow the format.";
      return c;
    }
    c.text =
        "Step 1:\nPremise: base fact.\nSoft Unification: linking fact.\n"
        "Conclusion: derived fact " + std::to_string(request.sample_index) + ".\n"
        "Final answer: [True]\n";
    c.token_probs = {{std::string("derived fact ") + std::to_string(request.sample_index) +
                          ".",
                      0.9}};
    return c;
  }
  std::vector<std::vector<double>> embed(const std::vector<std::string>&) override {
    return {};
  }
  double score(const std::string&, const std::string&) override { return 0.0; }
};

} // namespace

TEST_CASE("generate_rollouts samples the configured split") {
  TempDir dir;
  fs::path prompts_dir = dir.path / "prompts";
  fs::create_directories(prompts_dir);
  atomic_write_file(prompts_dir / "rollout.v1.txt",
                    "Premises: [PREMISES]\nQuestion: [QUESTION]\n");
  PromptStore prompts(prompts_dir);

  Problem problem;
  problem.id = "p1";
  problem.premises = {"base fact."};
  problem.question = "Is it so?";

  RolloutTransport transport;
  Gateway gateway(GatewayMode::Record, dir.path / "cache.jsonl", &transport);

  RolloutConfig config;
  config.n = 5;
  config.split = {{"model-a", 3}, {"model-b", 2}};

  RolloutSet set = gateway.generate_rollouts(problem, prompts, config);
  CHECK(set.traces.size() == 5);
  CHECK(set.rejections.empty());
  CHECK(set.traces[0].response_id == "model-a-0");
  CHECK(set.traces[3].response_id == "model-b-0");
  CHECK(set.traces[0].origin == "model-a");
  REQUIRE(set.traces[0].token_probs.has_value());

  SUBCASE("split must sum to n") {
    config.n = 8;
    CHECK_THROWS_AS(gateway.generate_rollouts(problem, prompts, config), ConfigError);
  }
  SUBCASE("malformed responses become rejection notes") {
    transport.bad_every = 3;
    transport.calls = 0;
    Gateway fresh(GatewayMode::Record, dir.path / "cache2.jsonl", &transport);
    RolloutSet mixed = fresh.generate_rollouts(problem, prompts, config);
    CHECK(mixed.traces.size() + mixed.rejections.size() == 5);
    CHECK(mixed.rejections.size() > 0);
  }
}

TEST_CASE("prompt store renders placeholders and validates ids") {
  TempDir dir;
  atomic_write_file(dir.path / "greet.v2.txt", "Hello [NAME], meet [NAME] and [OTHER].");
  PromptStore store(dir.path);
  CHECK(store.render("greet@v2", {{"NAME", "Ada"}, {"OTHER", "Bob"}}) ==
        "Hello Ada, meet Ada and Bob.");
  CHECK_THROWS_AS(store.render("greet@v9", {}), ConfigError);
  CHECK_THROWS_AS(store.render("noversion", {}), ConfigError);
}

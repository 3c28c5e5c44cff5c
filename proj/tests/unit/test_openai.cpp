#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "dnagpt/error.hpp"
#include "dnagpt/openai_backend.hpp"

using namespace dnagpt;
using nlohmann::json;

namespace {

// Local OpenAI-compatible stub. Handlers see every parsed request body.
class MockServer {
 public:
  using Handler = std::function<void(const json& body, const httplib::Request&, httplib::Response&)>;

  MockServer() {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      dispatch(chat, req, res);
    });
    server_.Post("/v1/completions", [this](const httplib::Request& req, httplib::Response& res) {
      dispatch(completions, req, res);
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~MockServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

  std::vector<json> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  std::vector<std::string> auth() {
    std::lock_guard lock(mu_);
    return auth_;
  }

  Handler chat;
  Handler completions;

 private:
  void dispatch(const Handler& h, const httplib::Request& req, httplib::Response& res) {
    const json body = json::parse(req.body);
    {
      std::lock_guard lock(mu_);
      bodies_.push_back(body);
      auth_.push_back(req.get_header_value("Authorization"));
    }
    h(body, req, res);
  }

  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::mutex mu_;
  std::vector<json> bodies_;
  std::vector<std::string> auth_;
};

json choices(int n, int offset = 0) {
  json c = json::array();
  for (int i = 0; i < n; ++i) {
    c.push_back({{"index", i}, {"message", {{"role", "assistant"}, {"content", "reply " + std::to_string(offset + i)}}}});
  }
  return {{"choices", c}};
}

BackendDescriptor descriptor(const MockServer& s) {
  BackendDescriptor d;
  d.id = "api";
  d.kind = BackendKind::kApi;
  d.base_url = s.url();
  d.model = "chat-model";
  d.capabilities = {true, true};
  return d;
}

RetryPolicy fast_retry() { return RetryPolicy{3, std::chrono::milliseconds(0)}; }

GenerationParams params() {
  GenerationParams p;
  p.max_tokens = 50;
  p.seed = 3;
  return p;
}

}  // namespace

TEST_CASE("K continuations come from one request with n=K") {
  MockServer s;
  s.chat = [](const json& b, const httplib::Request&, httplib::Response& res) {
    res.set_content(choices(b["n"].get<int>()).dump(), "application/json");
  };
  OpenAIBackend b(descriptor(s), fast_retry());
  auto p = params();
  p.system_prompt = "You are a helpful assistant.";
  const auto out = generate_continuations(b, "Once upon", 5, p);
  REQUIRE(out.size() == 5);
  CHECK(out[4].text == "reply 4");
  CHECK_FALSE(out[0].logprob.has_value());
  const auto bodies = s.bodies();
  REQUIRE(bodies.size() == 1);
  const auto& body = bodies[0];
  CHECK(body["model"] == "chat-model");
  CHECK(body["n"] == 5);
  CHECK(body["max_tokens"] == 50);
  CHECK(body["temperature"] == 0.7);
  CHECK(body["messages"].size() == 2);
  CHECK(body["messages"][0] == json{{"role", "system"}, {"content", "You are a helpful assistant."}});
  CHECK(body["messages"][1] == json{{"role", "user"}, {"content", "Once upon"}});
}

TEST_CASE("short multi-sample responses are topped up with n=1 requests") {
  MockServer s;
  std::atomic<int> served{0};
  s.chat = [&](const json&, const httplib::Request&, httplib::Response& res) {
    // Server ignores n and always returns two choices.
    res.set_content(choices(2, 10 * served++).dump(), "application/json");
  };
  OpenAIBackend b(descriptor(s), fast_retry());
  const auto out = generate_continuations(b, "x", 5, params());
  CHECK(out.size() == 5);
  const auto bodies = s.bodies();
  CHECK(bodies.size() == 4);
  CHECK(bodies[0]["n"] == 5);
  for (std::size_t i = 1; i < bodies.size(); ++i) CHECK(bodies[i]["n"] == 1);
}

TEST_CASE("without multi-sample support K requests are sent") {
  MockServer s;
  s.chat = [](const json& b, const httplib::Request&, httplib::Response& res) {
    res.set_content(choices(b["n"].get<int>()).dump(), "application/json");
  };
  auto d = descriptor(s);
  d.supports_n = false;
  d.parallelism = 2;
  OpenAIBackend b(d, fast_retry());
  CHECK(generate_continuations(b, "x", 3, params()).size() == 3);
  CHECK(s.bodies().size() == 3);
}

TEST_CASE("prompt template substitutes prefix and prompt") {
  MockServer s;
  s.chat = [](const json&, const httplib::Request&, httplib::Response& res) {
    res.set_content(choices(1).dump(), "application/json");
  };
  OpenAIBackend b(descriptor(s), fast_retry());
  auto p = params();
  p.user_prompt_template = "Answer: {prompt}\nContinue: {prefix}";
  generate_continuations(b, "The tide", 1, p, std::string("What happened?"));
  CHECK(s.bodies()[0]["messages"][0]["content"] == "Answer: What happened?\nContinue: The tide");
}

TEST_CASE("transient failures are retried, permanent ones are not") {
  MockServer s;
  std::atomic<int> calls{0};
  s.chat = [&](const json&, const httplib::Request&, httplib::Response& res) {
    if (calls++ < 2) {
      res.status = calls == 1 ? 503 : 429;
      return;
    }
    res.set_content(choices(1).dump(), "application/json");
  };
  OpenAIBackend b(descriptor(s), fast_retry());
  CHECK(generate_continuations(b, "x", 1, params()).size() == 1);
  CHECK(calls == 3);

  calls = 0;
  s.chat = [&](const json&, const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 400;
  };
  CHECK_THROWS_AS(generate_continuations(b, "x", 1, params()), TransportError);
  CHECK(calls == 1);

  calls = 0;
  s.chat = [&](const json&, const httplib::Request&, httplib::Response& res) {
    ++calls;
    res.status = 500;
  };
  try {
    generate_continuations(b, "x", 1, params());
    FAIL("expected transport error");
  } catch (const TransportError& e) {
    CHECK(calls == 4);
    CHECK_FALSE(e.request_id().empty());
    CHECK(std::string(e.what()).find(e.request_id()) != std::string::npos);
  }
}

TEST_CASE("unreachable server is a transport error") {
  BackendDescriptor d;
  d.id = "dead";
  d.base_url = "http://127.0.0.1:1";
  d.model = "m";
  OpenAIBackend b(d, RetryPolicy{1, std::chrono::milliseconds(0)});
  CHECK_THROWS_AS(generate_continuations(b, "x", 1, params()), TransportError);
}

TEST_CASE("bearer token is read from the named environment variable") {
  MockServer s;
  s.chat = [](const json&, const httplib::Request&, httplib::Response& res) {
    res.set_content(choices(1).dump(), "application/json");
  };
  auto d = descriptor(s);
  d.api_key_env = "DNAGPT_TEST_KEY";
  OpenAIBackend b(d, fast_retry());
  ::unsetenv("DNAGPT_TEST_KEY");
  CHECK_THROWS_AS(generate_continuations(b, "x", 1, params()), Error);
  CHECK(s.bodies().empty());
  ::setenv("DNAGPT_TEST_KEY", "sk-test", 1);
  generate_continuations(b, "x", 1, params());
  CHECK(s.auth().back() == "Bearer sk-test");
  ::unsetenv("DNAGPT_TEST_KEY");
}

TEST_CASE("echo scoring sums logprobs over the continuation span") {
  MockServer s;
  s.completions = [](const json& b, const httplib::Request&, httplib::Response& res) {
    CHECK(b["prompt"] == "The cat sat");
    CHECK(b["echo"] == true);
    CHECK(b["max_tokens"] == 0);
    CHECK(b["logprobs"] == 1);
    CHECK(b["model"] == "base-model");
    const json lp{{"tokens", {"The", " cat", " sat"}},
                  {"token_logprobs", {nullptr, -1.5, -2.25}},
                  {"text_offset", {0, 3, 7}}};
    res.set_content(json{{"choices", {{{"text", "The cat sat"}, {"logprobs", lp}}}}}.dump(), "application/json");
  };
  auto d = descriptor(s);
  d.completions_model = "base-model";
  OpenAIBackend b(d, fast_retry());
  CHECK(score_continuation(b, "The cat", "sat") == -2.25);
  CHECK(score_continuation(b, "The", " cat sat") == -3.75);

  d.capabilities.can_score = false;
  OpenAIBackend black(d, fast_retry());
  CHECK_THROWS_AS(score_continuation(black, "The", "cat"), CapabilityError);
}

TEST_CASE("malformed responses are reported") {
  MockServer s;
  s.chat = [](const json&, const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"choices": [{"text": "no message"}]})", "application/json");
  };
  OpenAIBackend b(descriptor(s), fast_retry());
  CHECK_THROWS_AS(generate_continuations(b, "x", 1, params()), TransportError);
}

TEST_CASE("base_url must carry a scheme") {
  BackendDescriptor d;
  d.id = "x";
  d.base_url = "localhost:8000";
  d.model = "m";
  CHECK_THROWS_AS(OpenAIBackend{d}, InvalidArgument);
}

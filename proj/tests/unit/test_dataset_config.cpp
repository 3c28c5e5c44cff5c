#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dnagpt/benchmark.hpp"
#include "dnagpt/config.hpp"
#include "dnagpt/error.hpp"
#include "dnagpt/markov_backend.hpp"
#include "dnagpt/replay_cache.hpp"
#include "dnagpt/toy.hpp"
#include "support.hpp"

using namespace dnagpt;
using nlohmann::json;
using testing_support::TempDir;

namespace {

const toy::World& world() {
  static const toy::World w = toy::build_world();
  return w;
}

class FailingBackend final : public Backend {
 public:
  FailingBackend() {
    desc_.id = "flaky";
    desc_.capabilities = {true, false};
  }
  const BackendDescriptor& descriptor() const override { return desc_; }
  std::vector<Continuation> generate(const GenerationRequest& r) override {
    if (r.prefix.find("fail") != std::string::npos) throw TransportError("down", "r");
    return std::vector<Continuation>(static_cast<std::size_t>(r.params.num_samples), {"x y z", std::nullopt});
  }
  double score(std::string_view, std::string_view) override { return 0.0; }

 private:
  BackendDescriptor desc_;
};

}  // namespace

TEST_CASE("dataset JSONL round-trip and validation") {
  std::vector<LabeledSample> samples{{"1", "some text", Label::kHuman, std::nullopt, std::nullopt},
                                     {"2", "other text", Label::kMachine, std::string("q?"), std::string("toy-a")}};
  std::stringstream ss;
  write_dataset(ss, samples);
  const auto back = read_dataset(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].prompt == std::string("q?"));
  CHECK(back[1].source_model == std::string("toy-a"));
  CHECK(back[0].label == Label::kHuman);

  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return read_dataset(in);
  };
  CHECK(parse("\n{\"id\": 5, \"text\": \"t\", \"label\": \"human\"}\n\n").at(0).id == "5");
  CHECK_THROWS_AS(parse(R"({"id":"a","text":"t","label":"human"})" "\n" R"({"id":"a","text":"u","label":"machine"})"),
                  InvalidArgument);
  CHECK_THROWS_AS(parse(R"({"id":"a","text":"","label":"human"})"), InvalidArgument);
  CHECK_THROWS_AS(parse(R"({"id":"a","text":"t","label":"robot"})"), InvalidArgument);
  CHECK_THROWS_AS(parse("{not json"), InvalidArgument);
}

TEST_CASE("config parsing resolves paths and validates backends") {
  TempDir dir("config");
  world().lm_a->save(dir / "a.json");
  const json j{{"backends",
                {{{"id", "toy"}, {"kind", "markov"}, {"model_path", "a.json"}},
                 {{"id", "gpt"},
                  {"kind", "api"},
                  {"base_url", "http://127.0.0.1:9"},
                  {"model", "m"},
                  {"api_key_env", "KEY"}}}},
               {"default_backend", "toy"},
               {"detection", {{"k", 3}, {"gamma", 0.4}}}};
  std::ofstream(dir / "cfg.json") << j.dump();
  const auto cfg = load_app_config(dir / "cfg.json");
  CHECK(cfg.backends.size() == 2);
  CHECK(cfg.default_backend == std::string("toy"));
  CHECK(cfg.detection.k == 3);
  CHECK(cfg.find("toy").model_path == (dir.path() / "a.json").lexically_normal().string());
  CHECK(cfg.find("toy").capabilities.can_score);
  CHECK_FALSE(cfg.find("gpt").capabilities.can_score);
  CHECK(cfg.find("gpt").api_key_env == "KEY");
  CHECK_FALSE(to_json(cfg.find("gpt")).dump().empty());
  CHECK_THROWS_AS(cfg.find("nope"), UnknownBackendError);

  auto bad = [](json backends, json extra = json::object()) {
    json j{{"backends", std::move(backends)}};
    j.update(extra);
    return app_config_from_json(j, {});
  };
  CHECK_THROWS_AS(bad({{{"id", "x"}, {"kind", "markov"}}}), InvalidArgument);
  CHECK_THROWS_AS(bad({{{"id", "x"}, {"kind", "api"}, {"model", "m"}}}), InvalidArgument);
  CHECK_THROWS_AS(bad({{{"id", "x"}, {"kind", "replay"}}}), InvalidArgument);
  CHECK_THROWS_AS(bad({{{"id", "x"}, {"kind", "ftp"}}}), InvalidArgument);
  CHECK_THROWS_AS(bad({{{"id", "x"}, {"kind", "markov"}, {"model_path", "m"}},
                       {{"id", "x"}, {"kind", "markov"}, {"model_path", "n"}}}),
                  InvalidArgument);
  CHECK_THROWS_AS(bad(json::array(), {{"default_backend", "ghost"}}), UnknownBackendError);
  CHECK_THROWS_AS(bad(json::array(), {{"detection", {{"gamma", 2}}}}), InvalidArgument);
}

TEST_CASE("make_backend builds markov, cached and replay backends") {
  TempDir dir("make-backend");
  world().lm_a->save(dir / "a.json");
  const json j{{"backends",
                {{{"id", "toy"}, {"kind", "markov"}, {"model_path", "a.json"}},
                 {{"id", "toy-cached"}, {"kind", "markov"}, {"model_path", "a.json"}, {"cache_path", "c.jsonl"}},
                 {{"id", "toy-replay"}, {"kind", "replay"}, {"cache_path", "c.jsonl"}, {"source_id", "toy-cached"}}}}};
  const auto cfg = app_config_from_json(j, dir.path());
  GenerationParams p;
  p.seed = 5;
  p.max_tokens = 10;

  auto plain = make_backend(cfg, "toy");
  CHECK(dynamic_cast<MarkovBackend*>(plain.get()) != nullptr);
  auto cached_backend = make_backend(cfg, "toy-cached");
  const auto first = generate_continuations(*cached_backend, "the sea", 3, p);
  auto replay = make_backend(cfg, "toy-replay");
  CHECK(generate_continuations(*replay, "the sea", 3, p) == first);
  p.seed = 6;
  CHECK_THROWS_AS(generate_continuations(*replay, "the sea", 3, p), CacheMissError);
  CHECK_THROWS_AS(make_backend(cfg, "absent"), UnknownBackendError);
}

TEST_CASE("benchmark on the toy world") {
  MarkovBackend a("a", world().lm_a);
  toy::BenchmarkOptions bopts;
  bopts.pairs = 30;
  const auto data = toy::make_benchmark(*world().lm_a, bopts);
  DetectionConfig cfg;
  cfg.generation.seed = 1;
  const auto r1 = run_benchmark(data, a, cfg, {0.01, 4});
  const auto r2 = run_benchmark(data, a, cfg, {0.01, 1});
  CHECK(r1.n_machine == 30);
  CHECK(r1.n_human == 30);
  CHECK(r1.excluded == 0);
  CHECK(r1.auroc >= 0.9);
  CHECK(to_json(r1).dump() == to_json(r2).dump());
  const auto j = to_json(r1);
  CHECK(j["samples"].size() == 60);
  CHECK(j["metrics"]["auroc"] == r1.auroc);

  auto one_class = data;
  std::erase_if(one_class, [](const auto& s) { return s.label == Label::kHuman; });
  CHECK_THROWS_AS(run_benchmark(one_class, a, cfg), InvalidArgument);
}

TEST_CASE("benchmark excludes failed samples and counts them") {
  FailingBackend b;
  std::vector<LabeledSample> data{{"m1", "alpha beta gamma delta", Label::kMachine, {}, {}},
                                  {"m2", "fail fail fail fail", Label::kMachine, {}, {}},
                                  {"h1", "one two three four", Label::kHuman, {}, {}}};
  const auto r = run_benchmark(data, b, DetectionConfig{});
  CHECK(r.excluded == 1);
  CHECK(r.n_machine == 1);
  const auto j = to_json(r);
  CHECK(j["counts"]["excluded"] == 1);
  CHECK(j["exclusions"][0]["id"] == "m2");

  data.pop_back();
  data.push_back({"h2", "fail again fail again", Label::kHuman, {}, {}});
  CHECK_THROWS_AS(run_benchmark(data, b, DetectionConfig{}), Error);
}

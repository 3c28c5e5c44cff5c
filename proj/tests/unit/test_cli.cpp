#include <doctest.h>

#include <fstream>
#include <sstream>

#include "dnagpt/cli.hpp"
#include "dnagpt/dataset.hpp"
#include "support.hpp"

using namespace dnagpt;
using nlohmann::json;
using testing_support::TempDir;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = run_cli(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// One toy world shared by every case.
const TempDir& toy_dir() {
  static const TempDir dir("cli");
  static const int made = run({"toy", "--out-dir", dir.path().string(), "--pairs", "30", "--corpus-tokens", "30000"}).code;
  REQUIRE(made == 0);
  return dir;
}

std::string p(const std::string& name) { return (toy_dir() / name).string(); }

std::vector<LabeledSample> bench() { return load_dataset(p("benchmark.jsonl")); }

std::string write_text(const TempDir& dir, const std::string& name, const std::string& text) {
  std::ofstream(dir / name) << text;
  return (dir / name).string();
}

}  // namespace

TEST_CASE("toy writes a complete world") {
  for (const char* f : {"corpus_a.txt", "corpus_b.txt", "lm_a.json", "lm_b.json", "benchmark.jsonl", "config.json"}) {
    CHECK(std::filesystem::exists(toy_dir() / f));
  }
  CHECK(bench().size() == 60);
}

TEST_CASE("help and usage errors") {
  const auto help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("detect") != std::string::npos);
  const auto none = run({});
  CHECK(none.code == 1);
  CHECK(none.out.empty());
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"evaluate"}).code == 1);  // --dataset missing
  CHECK(run({"detect", "--gamma", "abc"}).code == 1);
}

TEST_CASE("detect without a backend is a usage error") {
  const auto r = run({"detect"}, "some words here to classify");
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  CHECK(r.err.find("usage error") != std::string::npos);
  CHECK(r.err.find("--backend") != std::string::npos);
}

TEST_CASE("detect exit codes follow the verdict") {
  const auto samples = bench();
  const std::string machine = samples[0].text;
  const std::string human = samples[1].text;
  const auto undecided = run({"detect", "--config", p("config.json")}, machine);
  REQUIRE(undecided.code == 3);
  const json report = json::parse(undecided.out);
  CHECK(report["verdict"] == "undecided");
  CHECK(report["k"] == 10);
  CHECK(report["backend"] == "toy-a");
  CHECK(undecided.err.empty());

  // Calibrated on this toy world's human samples, every one of which scores 0.
  const auto cal = run({"calibrate", "--config", p("config.json"), "--dataset", p("benchmark.jsonl"), "--fpr", "0.01"});
  REQUIRE(cal.code == 0);
  const std::string threshold = json::parse(cal.out)["threshold"].dump();
  CHECK(run({"detect", "--config", p("config.json"), "--gamma", "0.5", "--k", "10", "--threshold", threshold}, machine)
            .code == 2);
  CHECK(run({"detect", "--config", p("config.json"), "--threshold", threshold}, human).code == 0);
}

TEST_CASE("detect reads files, honors flags and writes --out") {
  TempDir dir("cli-detect");
  const std::string input = write_text(dir, "in.txt", bench()[0].text);
  const auto r = run({"detect", "--model", p("lm_a.json"), "--input", input, "--k", "3", "--gamma", "0.4", "--n0", "3",
                      "--nmax", "9", "--weight-fn", "n2", "--seed", "4", "--temperature", "0.5", "--max-tokens", "40",
                      "--out", (dir / "r.json").string(), "--timing"});
  CHECK(r.code == 3);
  CHECK(r.out.empty());
  const json report = json::parse(slurp(dir / "r.json"));
  CHECK(report["k"] == 3);
  CHECK(report["gamma"] == 0.4);
  CHECK(report["backend"] == "lm_a");
  CHECK(report.contains("timing_ms"));
  for (const auto& e : report["evidence"]) CHECK(e["n"].get<int>() <= 9);

  const auto windows = run({"detect", "--model", p("lm_a.json"), "--input", input, "--windows", "2", "--threshold", "0"});
  CHECK(json::parse(windows.out)["windows"].size() == 2);
  CHECK((windows.code == 0 || windows.code == 2));
  CHECK(run({"detect", "--model", p("lm_a.json"), "--input", (dir / "missing.txt").string()}).code == 1);
}

TEST_CASE("white mode against a black-box backend fails with a capability error") {
  TempDir dir("cli-white");
  const json cfg{{"backends",
                  {{{"id", "remote"}, {"kind", "api"}, {"base_url", "http://127.0.0.1:9"}, {"model", "m"}}}},
                 {"default_backend", "remote"}};
  const std::string path = write_text(dir, "cfg.json", cfg.dump());
  const auto r = run({"detect", "--config", path, "--mode", "white"}, "a b c d e f");
  CHECK(r.code == 1);
  CHECK(r.out.empty());
  CHECK(r.err.find("score") != std::string::npos);
}

TEST_CASE("detection is deterministic with a warm cache") {
  TempDir dir("cli-cache");
  const std::string cache = (dir / "cache.jsonl").string();
  const std::string text = bench()[2].text;
  const auto first = run({"detect", "--config", p("config.json"), "--cache", cache}, text);
  const auto size = std::filesystem::file_size(cache);
  const auto second = run({"detect", "--config", p("config.json"), "--cache", cache, "--strict-cache"}, text);
  CHECK(first.out == second.out);
  CHECK(std::filesystem::file_size(cache) == size);
  const auto miss = run({"detect", "--config", p("config.json"), "--cache", cache, "--strict-cache", "--seed", "77"},
                        text);
  CHECK(miss.code == 1);
  CHECK(miss.err.find("cache miss") != std::string::npos);
}

TEST_CASE("evaluate emits a results bundle") {
  TempDir dir("cli-eval");
  const auto r = run({"evaluate", "--config", p("config.json"), "--dataset", p("benchmark.jsonl"), "--fpr", "0.01",
                      "--out", (dir / "bundle.json").string()});
  REQUIRE(r.code == 0);
  const json bundle = json::parse(slurp(dir / "bundle.json"));
  CHECK(bundle["metrics"]["auroc"].get<double>() >= 0.9);
  CHECK(bundle["samples"].size() == 60);
  CHECK(bundle["counts"]["excluded"] == 0);

  const auto cal = run({"calibrate", "--scores", (dir / "bundle.json").string(), "--fpr", "0.05"});
  REQUIRE(cal.code == 0);
  const json c = json::parse(cal.out);
  CHECK(c["n_human"] == 30);
  CHECK(c["achieved_fpr"].get<double>() <= 0.05);
}

TEST_CASE("calibrate on 100 human scores") {
  TempDir dir("cli-cal");
  json scores = json::array();
  for (int i = 1; i <= 100; ++i) scores.push_back(i);
  const auto r = run({"calibrate", "--scores", write_text(dir, "s.json", scores.dump()), "--fpr", "0.01"});
  REQUIRE(r.code == 0);
  const json c = json::parse(r.out);
  CHECK(c["achieved_fpr"] == 0.01);
  CHECK(c["threshold"] == 99.0);
  CHECK(c["target_fpr"] == 0.01);

  const auto single = run({"calibrate", "--scores", write_text(dir, "one.json", "[0.5]"), "--fpr", "0.01"});
  CHECK(single.code == 0);
  CHECK(single.err.find("warning") != std::string::npos);
  CHECK(json::parse(single.out).contains("warning"));
  CHECK(run({"calibrate", "--fpr", "0.01"}).code == 1);
  CHECK(run({"calibrate", "--scores", write_text(dir, "bad.json", "{\"x\": 1}"), "--fpr", "0.01"}).code == 1);
}

TEST_CASE("attack with ratio 0 leaves every text byte-equal") {
  TempDir dir("cli-attack");
  const auto r = run({"attack", "--dataset", p("benchmark.jsonl"), "--ratio", "0", "--filler", p("lm_b.json"), "--all"});
  REQUIRE(r.code == 0);
  std::istringstream in(r.out);
  const auto revised = read_dataset(in);
  const auto original = bench();
  REQUIRE(revised.size() == original.size());
  for (std::size_t i = 0; i < original.size(); ++i) CHECK(revised[i].text == original[i].text);

  const auto half = run({"attack", "--dataset", p("benchmark.jsonl"), "--ratio", "0.5", "--filler", p("lm_b.json"),
                         "--seed", "3", "--out", (dir / "r.jsonl").string()});
  REQUIRE(half.code == 0);
  const auto changed = load_dataset(dir / "r.jsonl");
  CHECK(changed[0].text != original[0].text);  // machine samples revised
  CHECK(changed[1].text == original[1].text);  // human samples untouched
  CHECK(run({"attack", "--dataset", p("benchmark.jsonl"), "--ratio", "2", "--filler", p("lm_b.json")}).code == 1);
}

TEST_CASE("toylm is deterministic") {
  TempDir dir("cli-toylm");
  const auto a = run({"toylm", "--corpus", p("corpus_a.txt"), "--order", "2", "--out", (dir / "1.json").string()});
  const auto b = run({"toylm", "--corpus", p("corpus_a.txt"), "--order", "2", "--out", (dir / "2.json").string()});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(slurp(dir / "1.json") == slurp(dir / "2.json"));
  CHECK(json::parse(a.out)["order"] == 2);
  CHECK(run({"toylm", "--corpus", write_text(dir, "short.txt", "a b"), "--order", "2"}).code == 1);
}

TEST_CASE("source ranks candidate models") {
  const auto r = run({"source", "--config", p("config.json"), "--backends", "toy-a,toy-b"}, bench()[0].text);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["winner"] == "toy-a");
  CHECK(j["ranked"].size() == 2);
  const auto m = run({"source", "--models", p("lm_a.json") + "," + p("lm_b.json"), "--seed", "2"}, bench()[0].text);
  CHECK(json::parse(m.out)["winner"] == "lm_a");
  CHECK(run({"source", "--models", p("lm_a.json")}, "x y z").code == 1);
}

TEST_CASE("report renders detection output and rejects malformed input") {
  const auto det = run({"detect", "--config", p("config.json")}, bench()[0].text);
  const auto md = run({"report"}, det.out);
  REQUIRE(md.code == 0);
  CHECK(md.out.find("# Detection report") != std::string::npos);
  const auto html = run({"report", "--format", "html"}, det.out);
  CHECK(html.out.find("<mark>") != std::string::npos);
  CHECK(run({"report"}, det.out).out == md.out);
  const auto bad = run({"report"}, "{not json");
  CHECK(bad.code == 1);
  CHECK(bad.out.empty());
  CHECK(run({"report"}, "{\"verdict\": \"machine\"}").code == 1);
}

#include "dnagpt/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dnagpt/benchmark.hpp"
#include "dnagpt/config.hpp"
#include "dnagpt/dataset.hpp"
#include "dnagpt/error.hpp"
#include "dnagpt/hash.hpp"
#include "dnagpt/markov_backend.hpp"
#include "dnagpt/metrics.hpp"
#include "dnagpt/pipeline.hpp"
#include "dnagpt/replay_cache.hpp"
#include "dnagpt/report_render.hpp"
#include "dnagpt/revision.hpp"
#include "dnagpt/toy.hpp"

namespace dnagpt {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Flags parsed but inconsistent; reported like a parse error.
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << content;
  if (!out) throw InvalidArgument("write failed for " + path.string());
}

std::string read_input(const std::string& path, std::istream& in) {
  if (path.empty() || path == "-") return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return read_file(path);
}

// Payload to --out when given, otherwise stdout.
void emit(const std::string& out_path, const std::string& payload, std::ostream& out) {
  if (out_path.empty()) {
    out << payload;
  } else {
    write_file(out_path, payload);
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument("malformed " + what + ": " + e.what());
  }
}

// Backend selection shared by detect, evaluate, calibrate and source.
struct BackendFlags {
  std::string config;
  std::string backend;
  std::string model;
  std::string cache;
  bool strict_cache = false;

  void add(CLI::App& app) {
    app.add_option("--config", config, "JSON config file");
    app.add_option("--backend", backend, "Backend id from the config");
    app.add_option("--model", model, "Markov model file; used instead of a configured backend");
    app.add_option("--cache", cache, "Replay cache file wrapping the backend");
    app.add_flag("--strict-cache", strict_cache, "Fail on replay cache misses");
  }

  std::optional<AppConfig> load() const {
    if (config.empty()) return std::nullopt;
    return load_app_config(config);
  }

  BackendPtr wrap(BackendPtr b) const {
    if (cache.empty()) return b;
    return cached(std::move(b), cache, strict_cache);
  }

  BackendPtr markov(const std::string& path) const {
    auto lm = std::make_shared<const MarkovLM>(MarkovLM::load(path));
    return wrap(std::make_shared<MarkovBackend>(fs::path(path).stem().string(), std::move(lm)));
  }

  BackendPtr resolve(const std::optional<AppConfig>& cfg) const {
    if (!model.empty()) return markov(model);
    if (!cfg) throw UsageError("no backend: pass --model, or --config with --backend or a default_backend");
    std::string id = backend;
    if (id.empty()) {
      if (!cfg->default_backend) throw UsageError("no backend: pass --backend or set default_backend");
      id = *cfg->default_backend;
    }
    return wrap(make_backend(*cfg, id));
  }
};

// Detection parameters; flags override the config's detection block.
struct DetectFlags {
  std::optional<double> gamma;
  std::optional<int> k;
  std::string mode;
  std::optional<int> n0;
  std::optional<int> n_max;
  std::string weight_fn;
  std::optional<double> temperature;
  std::optional<int> max_tokens;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  std::string tokenize;
  bool per_token = false;
  bool timing = false;

  void add(CLI::App& app) {
    app.add_option("--gamma", gamma, "Truncation ratio in (0, 1)");
    app.add_option("--k", k, "Number of regenerations");
    app.add_option("--mode", mode, "black or white");
    app.add_option("--n0", n0, "Smallest n-gram order");
    app.add_option("--nmax", n_max, "Largest n-gram order");
    app.add_option("--weight-fn", weight_fn, "log, n, nlogn, nlog2n, n2 or exp");
    app.add_option("--temperature", temperature, "Regeneration temperature");
    app.add_option("--max-tokens", max_tokens, "Regeneration length cap");
    app.add_option("--threshold", threshold, "Decision threshold");
    app.add_option("--seed", seed, "Regeneration seed");
    app.add_option("--tokenize", tokenize, "whitespace-lower or whitespace-exact");
    app.add_flag("--per-token", per_token, "Length-normalize WScore");
    app.add_flag("--timing", timing, "Record wall-clock time in the report");
  }

  DetectionConfig apply(DetectionConfig c) const {
    if (gamma) c.gamma = *gamma;
    if (k) c.k = *k;
    if (!mode.empty()) c.mode = parse_score_mode(mode);
    if (n0) c.score.n0 = *n0;
    if (n_max) c.score.n_max = *n_max;
    if (!weight_fn.empty()) c.score.weight_fn = parse_weight_fn(weight_fn);
    if (temperature) c.generation.temperature = *temperature;
    if (max_tokens) c.generation.max_tokens = *max_tokens;
    if (threshold) c.threshold = *threshold;
    if (seed) c.generation.seed = *seed;
    if (!tokenize.empty()) c.tokenize = parse_tokenize_mode(tokenize);
    if (per_token) c.wscore_per_token = true;
    if (timing) c.record_timing = true;
    c.validate();
    return c;
  }
};

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::kMachine: return kExitMachine;
    case Verdict::kHuman: return kExitHuman;
    case Verdict::kUndecided: break;
  }
  return kExitUndecided;
}

std::vector<double> scores_from_json(const json& j, bool human_only) {
  std::vector<double> scores;
  if (j.is_array()) {
    for (const auto& v : j) scores.push_back(v.get<double>());
    return scores;
  }
  if (j.is_object() && j.contains("samples")) {
    for (const auto& s : j["samples"]) {
      if (s.value("score", json()).is_null()) continue;
      if (human_only && s.at("label").get<std::string>() != "human") continue;
      scores.push_back(s["score"].get<double>());
    }
    return scores;
  }
  throw InvalidArgument("scores must be a JSON array or an evaluation bundle with a samples array");
}

json to_json(const CalibrationResult& c) {
  json j{{"threshold", c.threshold},
         {"achieved_fpr", c.achieved_fpr},
         {"target_fpr", c.target_fpr},
         {"n_human", c.n_human}};
  if (!c.warning.empty()) j["warning"] = c.warning;
  return j;
}

class Cli {
 public:
  Cli(std::istream& in, std::ostream& out, std::ostream& err) : in_(in), out_(out), err_(err) {}

  int run(std::vector<std::string> args) {
    CLI::App app{"Zero-shot detector for machine-generated text", "dnagpt"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::function<int()> action;
    add_detect(app, action);
    add_evaluate(app, action);
    add_calibrate(app, action);
    add_source(app, action);
    add_attack(app, action);
    add_toylm(app, action);
    add_toy(app, action);
    add_report(app, action);

    try {
      std::reverse(args.begin(), args.end());
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err_ << "usage error: " << e.what() << "\n";
      const CLI::App* failed = &app;
      for (const auto* sub : app.get_subcommands()) failed = sub;
      err_ << failed->help();
      return kExitError;
    }

    try {
      return action();
    } catch (const UsageError& e) {
      err_ << "usage error: " << e.what() << "\n";
      const CLI::App* failed = &app;
      for (const auto* sub : app.get_subcommands()) failed = sub;
      err_ << failed->help();
      return kExitError;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kExitError;
    }
  }

 private:
  void add_detect(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("detect", "Classify one text; exit 0 human, 2 machine, 3 undecided");
    auto input = std::make_shared<std::string>();
    auto prompt = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto windows = std::make_shared<int>(0);
    auto bf = std::make_shared<BackendFlags>();
    auto df = std::make_shared<DetectFlags>();
    sub->add_option("--input", *input, "Text file; stdin when omitted or '-'");
    sub->add_option("--prompt", *prompt, "Question the text answers, used in regeneration requests");
    sub->add_option("--windows", *windows, "Split into this many windows and flag if any is machine")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", *out_path, "Write the JSON report here instead of stdout");
    bf->add(*sub);
    df->add(*sub);
    sub->callback([=, this, &action] {
      action = [=, this] {
        const auto cfg_file = bf->load();
        DetectionConfig cfg = df->apply(cfg_file ? cfg_file->detection : DetectionConfig{});
        std::optional<std::string> question;
        if (!prompt->empty()) {
          question = *prompt;
          cfg.prompt_known = true;
        }
        auto backend = bf->resolve(cfg_file);
        const std::string text = read_input(*input, in_);
        if (*windows > 0) {
          auto result = sliding_window_detect(text, *backend, cfg, *windows);
          emit(*out_path, dump(to_json(result)), out_);
          return verdict_exit(result.aggregate);
        }
        auto report = detect(text, *backend, cfg, question);
        emit(*out_path, dump(to_json(report)), out_);
        return verdict_exit(report.verdict);
      };
    });
  }

  void add_evaluate(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("evaluate", "Score a labeled JSONL dataset and report AUROC and TPR at a fixed FPR");
    auto dataset = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto fpr = std::make_shared<double>(0.01);
    auto parallelism = std::make_shared<std::optional<int>>();
    auto bf = std::make_shared<BackendFlags>();
    auto df = std::make_shared<DetectFlags>();
    sub->add_option("--dataset", *dataset, "JSONL dataset")->required();
    sub->add_option("--fpr", *fpr, "Target false-positive rate");
    sub->add_option("--parallelism", *parallelism, "Samples scored concurrently");
    sub->add_option("--out", *out_path, "Write the results bundle here instead of stdout");
    bf->add(*sub);
    df->add(*sub);
    sub->callback([=, this, &action] {
      action = [=, this] {
        const auto cfg_file = bf->load();
        const DetectionConfig cfg = df->apply(cfg_file ? cfg_file->detection : DetectionConfig{});
        auto backend = bf->resolve(cfg_file);
        BenchmarkOptions opts;
        opts.target_fpr = *fpr;
        opts.parallelism = parallelism->value_or(cfg_file ? cfg_file->parallelism : 4);
        auto result = run_benchmark(load_dataset(*dataset), *backend, cfg, opts);
        if (result.excluded > 0) err_ << "warning: " << result.excluded << " samples excluded after backend failures\n";
        emit(*out_path, dump(to_json(result)), out_);
        return kExitOk;
      };
    });
  }

  void add_calibrate(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("calibrate", "Pick the threshold that meets a target FPR on human scores");
    auto fpr = std::make_shared<double>(0.01);
    auto scores = std::make_shared<std::string>();
    auto dataset = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto bf = std::make_shared<BackendFlags>();
    auto df = std::make_shared<DetectFlags>();
    sub->add_option("--fpr", *fpr, "Target false-positive rate")->required();
    auto* s = sub->add_option("--scores", *scores, "JSON array of human scores, or an evaluate bundle");
    auto* d = sub->add_option("--dataset", *dataset, "JSONL dataset; its human samples are scored");
    s->excludes(d);
    sub->add_option("--out", *out_path, "Write the calibration here instead of stdout");
    bf->add(*sub);
    df->add(*sub);
    sub->callback([=, this, &action] {
      action = [=, this] {
        std::vector<double> human;
        if (!scores->empty()) {
          human = scores_from_json(parse_json(read_file(*scores), "scores file"), true);
        } else if (!dataset->empty()) {
          const auto cfg_file = bf->load();
          const DetectionConfig cfg = df->apply(cfg_file ? cfg_file->detection : DetectionConfig{});
          auto backend = bf->resolve(cfg_file);
          for (const auto& sample : load_dataset(*dataset)) {
            if (sample.label != Label::kHuman) continue;
            human.push_back(detect(sample.text, *backend, cfg, sample.prompt).score);
          }
        } else {
          throw UsageError("calibrate needs --scores or --dataset");
        }
        auto result = calibrate(human, *fpr);
        if (!result.warning.empty()) err_ << "warning: " << result.warning << "\n";
        emit(*out_path, dump(to_json(result)), out_);
        return kExitOk;
      };
    });
  }

  void add_source(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("source", "Rank candidate models by how well they explain a text");
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto ids = std::make_shared<std::vector<std::string>>();
    auto models = std::make_shared<std::vector<std::string>>();
    auto normalize = std::make_shared<std::string>();
    auto bf = std::make_shared<BackendFlags>();
    auto df = std::make_shared<DetectFlags>();
    sub->add_option("--input", *input, "Text file; stdin when omitted or '-'");
    sub->add_option("--backends", *ids, "Candidate backend ids from the config")->delimiter(',');
    sub->add_option("--models", *models, "Candidate Markov model files")->delimiter(',');
    sub->add_option("--normalize", *normalize,
                    "Experimental: JSON object of id -> [mean, stddev]; rank by z-score");
    sub->add_option("--out", *out_path, "Write the ranking here instead of stdout");
    bf->add(*sub);
    df->add(*sub);
    sub->callback([=, this, &action] {
      action = [=, this] {
        const auto cfg_file = bf->load();
        const DetectionConfig cfg = df->apply(cfg_file ? cfg_file->detection : DetectionConfig{});
        std::vector<BackendPtr> candidates;
        for (const auto& id : *ids) {
          if (!cfg_file) throw UsageError("--backends needs --config");
          candidates.push_back(bf->wrap(make_backend(*cfg_file, id)));
        }
        for (const auto& m : *models) candidates.push_back(bf->markov(m));
        if (candidates.size() < 2) throw UsageError("source needs at least two candidates");
        SourcingOptions opts;
        if (!normalize->empty()) {
          const json j = parse_json(read_file(*normalize), "normalization file");
          for (const auto& [id, v] : j.items()) opts.normalization[id] = {v.at(0).get<double>(), v.at(1).get<double>()};
        }
        auto report = model_sourcing(read_input(*input, in_), candidates, cfg, opts);
        for (const auto& f : report.failures) err_ << "warning: candidate '" << f.backend << "' failed: " << f.error << "\n";
        emit(*out_path, dump(to_json(report)), out_);
        return kExitOk;
      };
    });
  }

  void add_attack(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("attack", "Simulate human revision by rewriting random 5-token spans");
    auto dataset = std::make_shared<std::string>();
    auto filler = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto params = std::make_shared<RevisionParams>();
    auto all = std::make_shared<bool>(false);
    sub->add_option("--dataset", *dataset, "JSONL dataset")->required();
    sub->add_option("--ratio", params->ratio, "Fraction of tokens to rewrite")->required();
    sub->add_option("--filler", *filler, "Markov model that writes the replacement spans")->required();
    sub->add_option("--span", params->span_length, "Span length in tokens");
    sub->add_option("--seed", params->seed, "Revision seed");
    sub->add_option("--temperature", params->temperature, "Filler sampling temperature");
    sub->add_flag("--all", *all, "Revise human samples too (default: machine samples only)");
    sub->add_option("--out", *out_path, "Write the revised dataset here instead of stdout");
    sub->callback([=, this, &action] {
      action = [=, this] {
        params->validate();
        const MarkovLM lm = MarkovLM::load(*filler);
        auto samples = load_dataset(*dataset);
        for (auto& s : samples) {
          if (!*all && s.label != Label::kMachine) continue;
          RevisionParams p = *params;
          Fnv1a h;
          h.field(s.id);
          p.seed = mix_seed(params->seed ^ h.digest());
          s.text = revise_attack(s.text, p, lm);
        }
        std::ostringstream buf;
        write_dataset(buf, samples);
        emit(*out_path, buf.str(), out_);
        return kExitOk;
      };
    });
  }

  void add_toylm(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("toylm", "Fit a Markov language model on a text corpus");
    auto corpus = std::make_shared<std::string>();
    auto order = std::make_shared<int>(2);
    auto alpha = std::make_shared<double>(0.1);
    auto mode = std::make_shared<std::string>("whitespace-lower");
    auto out_path = std::make_shared<std::string>();
    sub->add_option("--corpus", *corpus, "Training text")->required();
    sub->add_option("--order", *order, "Context length")->required();
    sub->add_option("--alpha", *alpha, "Additive smoothing constant");
    sub->add_option("--tokenize", *mode, "whitespace-lower or whitespace-exact");
    sub->add_option("--out", *out_path, "Model file; the model is printed when omitted");
    sub->callback([=, this, &action] {
      action = [=, this] {
        const auto tokens = dnagpt::tokenize(read_file(*corpus), parse_tokenize_mode(*mode));
        const MarkovLM lm = fit_markov(tokens.tokens, *order, *alpha);
        if (out_path->empty()) {
          out_ << lm.to_json().dump() << "\n";
          return kExitOk;
        }
        lm.save(*out_path);
        out_ << dump(json{{"model", *out_path},
                          {"order", lm.order()},
                          {"alpha", lm.alpha()},
                          {"vocab_size", lm.vocab_size()},
                          {"contexts", lm.table().size()},
                          {"corpus_tokens", tokens.size()}});
        return kExitOk;
      };
    });
  }

  void add_toy(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("toy", "Write the synthetic corpora, models, benchmark and config of the toy world");
    auto dir = std::make_shared<std::string>();
    auto world = std::make_shared<toy::WorldOptions>();
    auto bench = std::make_shared<toy::BenchmarkOptions>();
    sub->add_option("--out-dir", *dir, "Output directory")->required();
    sub->add_option("--seed", world->seed, "Corpus seed");
    sub->add_option("--corpus-tokens", world->corpus_tokens, "Tokens per training corpus");
    sub->add_option("--order", world->order, "Markov order");
    sub->add_option("--alpha", world->alpha, "Additive smoothing constant");
    sub->add_option("--pairs", bench->pairs, "Machine/human sample pairs");
    sub->add_option("--bench-seed", bench->seed, "Benchmark seed");
    sub->callback([=, this, &action] {
      action = [=, this] {
        const fs::path root(*dir);
        fs::create_directories(root);
        const auto w = toy::build_world(*world);
        write_file(root / "corpus_a.txt", w.corpus_a + "\n");
        write_file(root / "corpus_b.txt", w.corpus_b + "\n");
        w.lm_a->save(root / "lm_a.json");
        w.lm_b->save(root / "lm_b.json");
        const auto samples = toy::make_benchmark(*w.lm_a, *bench);
        save_dataset(root / "benchmark.jsonl", samples);
        const json config{
            {"backends",
             {{{"id", "toy-a"}, {"kind", "markov"}, {"model_path", "lm_a.json"}},
              {{"id", "toy-b"}, {"kind", "markov"}, {"model_path", "lm_b.json"}}}},
            {"default_backend", "toy-a"},
            {"detection", {{"gamma", 0.5}, {"k", 10}, {"generation", {{"seed", 1}}}}}};
        write_file(root / "config.json", dump(config));
        out_ << dump(json{{"dir", root.string()},
                          {"files", {"corpus_a.txt", "corpus_b.txt", "lm_a.json", "lm_b.json", "benchmark.jsonl",
                                     "config.json"}},
                          {"samples", samples.size()}});
        return kExitOk;
      };
    });
  }

  void add_report(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("report", "Render a detection report with highlighted evidence");
    auto input = std::make_shared<std::string>();
    auto format = std::make_shared<std::string>("markdown");
    auto out_path = std::make_shared<std::string>();
    sub->add_option("--input", *input, "Report JSON; stdin when omitted or '-'");
    sub->add_option("--format", *format, "markdown or html");
    sub->add_option("--out", *out_path, "Write the document here instead of stdout");
    sub->callback([=, this, &action] {
      action = [=, this] {
        const ReportFormat fmt = parse_report_format(*format);
        const json j = parse_json(read_input(*input, in_), "detection report");
        DetectionReport report;
        try {
          report = detection_report_from_json(j);
        } catch (const json::exception& e) {
          throw InvalidArgument(std::string("malformed detection report: ") + e.what());
        }
        emit(*out_path, render_report(report, fmt), out_);
        return kExitOk;
      };
    });
  }

  std::istream& in_;
  std::ostream& out_;
  std::ostream& err_;
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  return Cli(in, out, err).run(args);
}

}  // namespace dnagpt

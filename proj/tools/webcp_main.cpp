#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/log.hpp"
#include "webcp/conformal/scores.hpp"
#include "webcp/conformal/types.hpp"
#include "webcp/embedding/kernels.hpp"
#include "webcp/embedding/wcpe.hpp"
#include "webcp/evaluation/synthetic.hpp"
#include "webcp/miner/miner.hpp"
#include "webcp/pipeline/config.hpp"
#include "webcp/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace webcp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitStage = 3;

std::string absolute(const std::string& p) {
  return p.empty() ? p : fs::absolute(p).lexically_normal().string();
}

// Config document from --config (or empty), base directory for its paths.
std::string parent_dir(const std::string& file) {
  const auto parent = fs::path(file).parent_path();
  return absolute(parent.empty() ? "." : parent.string());
}

std::pair<json, fs::path> base_document(const std::string& config_path) {
  if (config_path.empty()) return {json::object(), fs::current_path()};
  if (!fs::exists(config_path)) throw ConfigError("config file not found: " + config_path);
  try {
    return {io::read_json(config_path), fs::absolute(config_path).parent_path()};
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

void set(json& doc, const std::string& key, const json& value) {
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    if (dot == std::string::npos) break;
    node = &(*node)[key.substr(start, dot - start)];
    start = dot + 1;
  }
  (*node)[key.substr(start)] = value;
}

pipeline::PipelineConfig single_stage(json doc, const fs::path& base, pipeline::Stage stage) {
  doc["stages"] = json::array({pipeline::stage_name(stage)});
  return pipeline::parse_config(doc, base);
}

struct Options {
  // shared
  bool quiet = false;
  std::string config;
  std::string out;
  std::vector<std::string> overrides;

  // mine
  std::string classes;
  std::string query_template = "An image of <category>";
  std::size_t per_class = 50;
  std::size_t search_depth = 0;
  std::string provider;
  std::string fetch;
  std::string task_name = "task";
  bool ignore_robots = false;
  int timeout_ms = 15000;

  // embeddings
  std::string input;
  std::optional<std::size_t> expected_dim;
  std::string corpus;
  std::string embeddings;
  std::string pseudo_map;

  // scoring / calibration
  std::string images;
  std::string labels;
  std::string classes_list;
  double temperature = 0.07;
  std::string plausibilities;
  std::string scores;
  std::string threshold;
  std::string oracle_labels;
  std::optional<double> alpha;
  std::optional<std::size_t> mc_samples;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> method;
  std::optional<std::string> rule;
  std::optional<std::size_t> threads;

  // synth / run
  std::string spec;
  std::string stages;
  std::string output;
};

void apply_common(json& doc, const Options& o) {
  if (o.alpha) doc["alpha"] = *o.alpha;
  if (o.mc_samples) doc["mc_samples"] = *o.mc_samples;
  if (o.seed) doc["seed"] = *o.seed;
  if (o.method) doc["method"] = *o.method;
  if (o.rule) doc["rule"] = *o.rule;
  if (o.threads) doc["threads"] = *o.threads;
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    pipeline::apply_override(doc, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

int cmd_mine(const Options& o) {
  json doc = json::object();
  doc["task_name"] = o.task_name;
  doc["classes"] = absolute(o.classes);
  doc["query_template"] = o.query_template;
  doc["per_class"] = o.per_class;
  doc["search_depth"] = o.search_depth;
  const bool search_http = o.provider.rfind("http://", 0) == 0 || o.provider.rfind("https://", 0) == 0;
  set(doc, "providers.search",
      {{"kind", search_http ? "http" : "fixture"},
       {"location", search_http ? o.provider : absolute(o.provider)},
       {"timeout_ms", o.timeout_ms}});
  const std::string fetch = o.fetch.empty() ? (search_http ? "http" : o.provider) : o.fetch;
  if (fetch == "http") {
    set(doc, "providers.fetch",
        {{"kind", "http"}, {"location", "live"}, {"timeout_ms", o.timeout_ms},
         {"respect_robots", !o.ignore_robots}});
  } else {
    set(doc, "providers.fetch", {{"kind", "fixture"}, {"location", absolute(fetch)}});
  }
  set(doc, "paths.output", absolute(o.out));
  set(doc, "paths.corpus", absolute(o.out));
  apply_common(doc, o);
  const auto config = single_stage(doc, fs::current_path(), pipeline::Stage::kMine);
  const auto manifest = pipeline::run_stage(config, pipeline::Stage::kMine);
  std::cout << manifest.string() << "\n";
  return kExitOk;
}

int cmd_embed_import(const Options& o) {
  const auto m = pipeline::load_embedding_file(o.input);
  if (o.expected_dim && m.dim() != *o.expected_dim) {
    throw DomainError("embedding dim " + std::to_string(m.dim()) + " != expected " +
                      std::to_string(*o.expected_dim));
  }
  embedding::store_embeddings(m, o.out);
  std::cout << json{{"path", o.out}, {"dim", m.dim()}, {"count", m.size()}}.dump() << "\n";
  return kExitOk;
}

int cmd_embed_check(const Options& o) {
  const auto m = embedding::load_embeddings(o.input);
  if (o.expected_dim && m.dim() != *o.expected_dim) {
    throw DomainError("embedding dim " + std::to_string(m.dim()) + " != expected " +
                      std::to_string(*o.expected_dim));
  }
  std::size_t zero_rows = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    double norm = 0.0;
    for (float v : m.row(i)) norm += static_cast<double>(v) * v;
    if (norm == 0.0) ++zero_rows;
  }
  std::cout << json{{"path", o.input}, {"dim", m.dim()}, {"count", m.size()}, {"zero_rows", zero_rows}}
                   .dump()
            << "\n";
  return kExitOk;
}

int cmd_embed_plan(const Options& o) {
  auto [doc, base] = base_document(o.config);
  apply_common(doc, o);
  doc["stages"] = json::array({"plausibility"});
  const auto config = pipeline::parse_config(doc, base);
  const fs::path corpus_dir = o.corpus.empty() ? config.corpus_dir() : fs::path(o.corpus);
  const auto corpus = miner::load_corpus(corpus_dir);
  const auto plan = pipeline::make_embedding_plan(corpus, fs::absolute(corpus_dir), config);
  fs::create_directories(o.out);
  pipeline::write_embedding_plan(plan, o.out);
  std::cout << json{{"texts", plan.texts.size()}, {"images", plan.images.size()}}.dump() << "\n";
  return kExitOk;
}

int cmd_plausibility(const Options& o) {
  auto [doc, base] = base_document(o.config);
  set(doc, "paths.corpus", absolute(o.corpus));
  set(doc, "paths.embeddings", absolute(o.embeddings));
  set(doc, "paths.plausibilities", absolute(o.out));
  set(doc, "paths.output", parent_dir(o.out));
  if (!o.pseudo_map.empty()) doc["pseudo_labels"] = absolute(o.pseudo_map);
  apply_common(doc, o);
  const auto config = single_stage(doc, base, pipeline::Stage::kPlausibility);
  std::cout << pipeline::run_stage(config, pipeline::Stage::kPlausibility).string() << "\n";
  return kExitOk;
}

int cmd_score(const Options& o) {
  const auto images = pipeline::load_embedding_file(o.images);
  const auto labels = pipeline::load_embedding_file(o.labels);
  std::vector<std::string> classes;
  if (!o.classes_list.empty()) {
    for (const auto& c : miner::load_classes(o.classes_list)) classes.push_back(c.id);
  } else {
    classes = labels.ids();
  }
  const auto table = conformal::nonconformity_scores(images, labels, classes, o.temperature);
  conformal::write_scores(table, o.out);
  std::cout << json{{"path", o.out}, {"rows", table.size()}, {"classes", classes.size()}}.dump() << "\n";
  return kExitOk;
}

int cmd_calibrate(const Options& o) {
  auto [doc, base] = base_document(o.config);
  set(doc, "paths.plausibilities", absolute(o.plausibilities));
  set(doc, "paths.scores", absolute(o.scores));
  set(doc, "paths.threshold", absolute(o.out));
  set(doc, "paths.output", parent_dir(o.out));
  if (!o.oracle_labels.empty()) set(doc, "paths.oracle_labels", absolute(o.oracle_labels));
  apply_common(doc, o);
  const auto config = single_stage(doc, base, pipeline::Stage::kCalibrate);
  const auto path = pipeline::run_stage(config, pipeline::Stage::kCalibrate);
  std::cout << io::read_json(path).dump() << "\n";
  return kExitOk;
}

int cmd_predict(const Options& o) {
  json doc = json::object();
  set(doc, "paths.scores", absolute(o.scores));
  set(doc, "paths.threshold", absolute(o.threshold));
  set(doc, "paths.predictions", absolute(o.out));
  set(doc, "paths.plausibilities", absolute(o.plausibilities.empty() ? o.out + ".none" : o.plausibilities));
  set(doc, "paths.output", parent_dir(o.out));
  apply_common(doc, o);
  const auto config = single_stage(doc, fs::current_path(), pipeline::Stage::kPredict);
  std::cout << pipeline::run_stage(config, pipeline::Stage::kPredict).string() << "\n";
  return kExitOk;
}

int cmd_evaluate(const Options& o) {
  auto [doc, base] = base_document(o.config);
  if (!o.out.empty()) set(doc, "paths.report", absolute(o.out));
  apply_common(doc, o);
  const auto config = single_stage(doc, base, pipeline::Stage::kEvaluate);
  const auto path = pipeline::run_stage(config, pipeline::Stage::kEvaluate);
  std::cout << io::read_file(path);
  return kExitOk;
}

int cmd_synth(const Options& o) {
  evaluation::SyntheticTask task;
  if (!o.spec.empty()) {
    auto [doc, base] = base_document(o.spec);
    task = doc.get<evaluation::SyntheticTask>();
  }
  if (o.seed) task.seed = *o.seed;
  try {
    task.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto data = evaluation::generate_synthetic_task(task);
  evaluation::write_synthetic_task(data, task, o.out);
  io::write_json(fs::path(o.out) / "pipeline.json", pipeline::synthetic_pipeline_config(task));
  std::cout << (fs::path(o.out) / "pipeline.json").string() << "\n";
  return kExitOk;
}

int cmd_run(const Options& o) {
  auto [doc, base] = base_document(o.config);
  if (!o.output.empty()) set(doc, "paths.output", absolute(o.output));
  if (!o.stages.empty()) doc["stages"] = o.stages;
  apply_common(doc, o);
  const auto config = pipeline::parse_config(doc, base);
  const auto result = pipeline::run_pipeline(config);
  std::cout << pipeline::manifest_to_json(result, config).dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"webcp: conformal prediction calibrated on web-mined data"};
  app.require_subcommand(1);
  Options o;
  app.add_flag("-q,--quiet", o.quiet, "Only log warnings and errors");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--alpha", o.alpha, "Miscoverage level in (0, 1)");
    sub->add_option("--mc-samples", o.mc_samples, "Monte Carlo iterations M");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--method", o.method, "webcp, standard or oracle");
    sub->add_option("--rule", o.rule, "as_written or conservative");
    sub->add_option("--threads", o.threads, "Worker threads (0: all cores)");
    sub->add_option("--set", o.overrides, "Override a config key: key.path=value");
  };

  auto* mine = app.add_subcommand("mine", "Mine a calibration corpus from image search results");
  mine->add_option("--classes", o.classes, "Class file")->required();
  mine->add_option("--template", o.query_template, "Query template with <category>");
  mine->add_option("--per-class", o.per_class, "Accepted examples per class (K)");
  mine->add_option("--search-depth", o.search_depth, "Results requested per class (0: 2K)");
  mine->add_option("--provider", o.provider, "Search endpoint URL or fixture directory")->required();
  mine->add_option("--fetch", o.fetch, "Fetch fixture directory, or 'http' for live fetching");
  mine->add_option("--task-name", o.task_name, "Task name recorded in the manifest");
  mine->add_flag("--ignore-robots", o.ignore_robots, "Do not consult robots.txt");
  mine->add_option("--timeout-ms", o.timeout_ms, "Per-request timeout");
  mine->add_option("--out", o.out, "Corpus directory")->required();
  add_common(mine);

  auto* imp = app.add_subcommand("embed-import", "Convert a JSON embedding dump to .wcpe");
  imp->add_option("input", o.input, "JSON dump or .wcpe file")->required()->check(CLI::ExistingFile);
  imp->add_option("--dim", o.expected_dim, "Expected dimension");
  imp->add_option("--out", o.out, "Output .wcpe")->required();

  auto* check = app.add_subcommand("embed-check", "Validate a .wcpe file");
  check->add_option("input", o.input, ".wcpe file")->required()->check(CLI::ExistingFile);
  check->add_option("--dim", o.expected_dim, "Expected dimension");

  auto* plan = app.add_subcommand("embed-plan", "List texts and images an encoder must embed");
  plan->add_option("--corpus", o.corpus, "Corpus directory");
  plan->add_option("--config", o.config, "Pipeline config");
  plan->add_option("--out", o.out, "Output directory")->required();
  add_common(plan);

  auto* plaus = app.add_subcommand("plausibility", "Build plausibility vectors for a corpus");
  plaus->add_option("--corpus", o.corpus, "Corpus directory")->required();
  plaus->add_option("--embeddings", o.embeddings, "Directory of .wcpe stores")->required();
  plaus->add_option("--pseudo-map", o.pseudo_map, "Pseudo-label map");
  plaus->add_option("--config", o.config, "Pipeline config (temperatures, prompts)");
  plaus->add_option("--out", o.out, "plausibilities.jsonl")->required();
  add_common(plaus);

  auto* score = app.add_subcommand("score", "Compute a nonconformity score table");
  score->add_option("--images", o.images, "Classifier image embeddings")->required();
  score->add_option("--labels", o.labels, "Classifier label embeddings keyed by class id")->required();
  score->add_option("--classes", o.classes_list, "Class file (default: label ids)");
  score->add_option("--temperature", o.temperature, "Classifier softmax temperature");
  score->add_option("--out", o.out, "scores.jsonl")->required();

  auto* cal = app.add_subcommand("calibrate", "Compute a conformal threshold");
  cal->add_option("--plausibilities", o.plausibilities, "plausibilities.jsonl")->required();
  cal->add_option("--scores", o.scores, "scores.jsonl")->required();
  cal->add_option("--oracle-labels", o.oracle_labels, "Labelled target samples (method oracle)");
  cal->add_option("--config", o.config, "Pipeline config");
  cal->add_option("--out", o.out, "threshold.json")->required();
  add_common(cal);

  auto* pred = app.add_subcommand("predict", "Build prediction sets");
  pred->add_option("--scores", o.scores, "scores.jsonl")->required();
  pred->add_option("--threshold", o.threshold, "threshold.json")->required();
  pred->add_option("--exclude", o.plausibilities, "plausibilities.jsonl whose ids are skipped");
  pred->add_option("--out", o.out, "prediction sets .jsonl")->required();

  auto* eval = app.add_subcommand("evaluate", "Coverage/efficiency report over methods and alphas");
  eval->add_option("--config", o.config, "Pipeline config")->required();
  eval->add_option("--out", o.out, "report.csv");
  add_common(eval);

  auto* synth = app.add_subcommand("synth", "Write a synthetic task directory");
  synth->add_option("--spec", o.spec, "Synthetic task spec (JSON)");
  synth->add_option("--seed", o.seed, "Override the spec seed");
  synth->add_option("--out", o.out, "Output directory")->required();

  auto* run = app.add_subcommand("run", "Run pipeline stages from one config");
  run->add_option("--config", o.config, "Pipeline config")->required();
  run->add_option("--stages", o.stages, "Comma-separated subset of mine,embed,plausibility,calibrate,predict,evaluate");
  run->add_option("--output", o.output, "Output directory");
  add_common(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  if (o.quiet) log::set_min_level(log::Level::kWarn);

  try {
    if (*mine) return cmd_mine(o);
    if (*imp) return cmd_embed_import(o);
    if (*check) return cmd_embed_check(o);
    if (*plan) return cmd_embed_plan(o);
    if (*plaus) return cmd_plausibility(o);
    if (*score) return cmd_score(o);
    if (*cal) return cmd_calibrate(o);
    if (*pred) return cmd_predict(o);
    if (*eval) return cmd_evaluate(o);
    if (*synth) return cmd_synth(o);
    if (*run) return cmd_run(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStage;
  }
  return kExitOk;
}

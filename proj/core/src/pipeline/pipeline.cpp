#include "webcp/pipeline/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>

#include "webcp/common/json_io.hpp"
#include "webcp/common/log.hpp"
#include "webcp/common/sha256.hpp"
#include "webcp/conformal/calibration.hpp"
#include "webcp/conformal/scores.hpp"
#include "webcp/embedding/service.hpp"
#include "webcp/embedding/wcpe.hpp"
#include "webcp/evaluation/benchmark.hpp"
#include "webcp/miner/miner.hpp"
#include "webcp/plausibility/builder.hpp"

namespace fs = std::filesystem;

namespace webcp::pipeline {

namespace {

using nlohmann::json;

constexpr const char* kTextStores[] = {"sentences", "queries", "content_text", "classifier_labels"};

void require_file(const fs::path& path, const std::string& what) {
  if (!fs::exists(path)) throw ConfigError("missing " + what + ": " + path.string());
}

std::vector<std::string> class_ids_of(const std::vector<miner::ClassLabel>& classes) {
  std::vector<std::string> ids;
  for (const auto& c : classes) ids.push_back(c.id);
  return ids;
}

plausibility::PromptSet prompt_set(const PipelineConfig& config) {
  auto prompts = plausibility::PromptSet::defaults();
  if (config.invalid_form_prompts) prompts.invalid_form_prompts = *config.invalid_form_prompts;
  if (config.negative_label) prompts.negative_label = *config.negative_label;
  return prompts;
}

conformal::ThresholdRule threshold_rule(const std::string& rule) {
  return rule == "conservative" ? conformal::ThresholdRule::kConservative
                                : conformal::ThresholdRule::kAsWritten;
}

// ---- mine ------------------------------------------------------------------

fs::path stage_mine(const PipelineConfig& config) {
  if (!config.search || !config.fetch) throw ConfigError("search and fetch providers are required");
  const auto classes_path = config.resolve(config.classes);
  require_file(classes_path, "class file");

  miner::MineOptions options;
  options.task_name = config.task_name;
  options.classes = miner::load_classes(classes_path);
  options.query_template = config.query_template;
  options.per_class = config.per_class;
  options.search_depth = config.search_depth;
  options.max_in_flight = config.max_in_flight;

  std::unique_ptr<miner::SearchProvider> search;
  if (config.search->kind == "fixture") {
    const auto dir = config.resolve(config.search->location);
    require_file(dir, "search fixture directory");
    search = std::make_unique<miner::FixtureSearchProvider>(dir);
  } else {
    http::RequestOptions req;
    req.timeout = config.search->timeout;
    req.user_agent = config.search->user_agent;
    search = std::make_unique<miner::HttpSearchProvider>(
        config.search->location, req, http::RetryPolicy{config.search->retries, std::chrono::milliseconds{500}});
  }

  std::unique_ptr<miner::PageFetcher> fetcher;
  if (config.fetch->kind == "fixture") {
    const auto dir = config.resolve(config.fetch->location);
    require_file(dir / "fetch_index.json", "fetch fixture index");
    fetcher = std::make_unique<miner::FixtureFetcher>(dir);
  } else {
    miner::FetchPolicy policy;
    policy.timeout = config.fetch->timeout;
    policy.retries = config.fetch->retries;
    policy.user_agent = config.fetch->user_agent;
    policy.respect_robots = config.fetch->respect_robots;
    policy.max_in_flight_per_host = config.fetch->max_per_host;
    fetcher = std::make_unique<miner::HttpFetcher>(policy);
  }

  const auto dir = config.corpus_dir();
  fs::create_directories(dir);
  const auto manifest = miner::mine_corpus(options, *search, *fetcher, dir);
  miner::write_corpus(manifest, dir);
  log::info("mine", "corpus_written",
            {{"examples", manifest.examples.size()}, {"warnings", manifest.warnings.size()}});
  return dir / "manifest.json";
}

// ---- embed -----------------------------------------------------------------

fs::path stage_embed(const PipelineConfig& config) {
  const auto corpus_dir = config.corpus_dir();
  require_file(corpus_dir / "manifest.json", "corpus manifest");
  const auto content_path = config.resolve(config.content_images);
  const auto classifier_path = config.resolve(config.classifier_images);
  require_file(content_path, "content image embeddings");
  require_file(classifier_path, "classifier image embeddings");

  const auto corpus = miner::load_corpus(corpus_dir);
  const auto plan = make_embedding_plan(corpus, corpus_dir, config);
  const auto out_dir = config.embeddings_dir();
  fs::create_directories(out_dir);

  std::map<std::string, embedding::EmbeddingMatrix> stores;
  for (const char* store : kTextStores) {
    std::vector<TextItem> items;
    for (const auto& t : plan.texts) {
      if (t.store == store) items.push_back(t);
    }
    if (std::string(store) == "classifier_labels" && !config.classifier_labels.empty()) {
      const auto path = config.resolve(config.classifier_labels);
      require_file(path, "classifier label embeddings");
      stores[store] = load_embedding_file(path);
      for (const auto& c : corpus.classes) {
        if (!stores[store].contains(c.id)) throw MissingEmbeddingError(c.id);
      }
    } else {
      stores[store] = embed_texts(config.encoder(store_role(store)), items);
    }
    embedding::store_embeddings(stores[store], out_dir / (std::string(store) + ".wcpe"));
  }

  const auto content_images = load_embedding_file(content_path);
  if (content_images.dim() != stores["content_text"].dim()) {
    throw DomainError("content image embeddings have dim " + std::to_string(content_images.dim()) +
                      " but content text embeddings have dim " +
                      std::to_string(stores["content_text"].dim()));
  }
  embedding::store_embeddings(content_images, out_dir / "content_images.wcpe");

  const auto classifier_images = load_embedding_file(classifier_path);
  const auto& labels = stores["classifier_labels"];
  if (classifier_images.dim() != labels.dim()) {
    throw DomainError("classifier image embeddings have dim " +
                      std::to_string(classifier_images.dim()) + " but label embeddings have dim " +
                      std::to_string(labels.dim()));
  }
  const auto table = conformal::nonconformity_scores(classifier_images, labels,
                                                     class_ids_of(corpus.classes), config.t_clf);
  conformal::write_scores(table, config.scores_path());

  json files = json::object();
  for (const char* store : kTextStores) {
    files[std::string(store) + ".wcpe"] = sha256_file(out_dir / (std::string(store) + ".wcpe"));
  }
  files["content_images.wcpe"] = sha256_file(out_dir / "content_images.wcpe");
  files["scores.jsonl"] = sha256_file(config.scores_path());
  const auto index = out_dir / "index.json";
  io::write_json(index, {{"files", files}, {"scored_images", table.size()}});
  log::info("embed", "stores_written",
            {{"sentences", stores["sentences"].size()},
             {"content_images", content_images.size()},
             {"scored_images", table.size()}});
  return index;
}

// ---- plausibility ----------------------------------------------------------

fs::path stage_plausibility(const PipelineConfig& config) {
  const auto corpus_dir = config.corpus_dir();
  const auto emb = config.embeddings_dir();
  require_file(corpus_dir / "manifest.json", "corpus manifest");
  for (const char* name : {"sentences", "queries", "content_text", "content_images"}) {
    require_file(emb / (std::string(name) + ".wcpe"), std::string(name) + " embeddings");
  }
  const auto corpus = miner::load_corpus(corpus_dir);
  const auto sentences = embedding::load_embeddings(emb / "sentences.wcpe");
  const auto queries = embedding::load_embeddings(emb / "queries.wcpe");
  const auto content_text = embedding::load_embeddings(emb / "content_text.wcpe");
  const auto content_images = embedding::load_embeddings(emb / "content_images.wcpe");

  plausibility::PlausibilityConfig pc;
  pc.t_ctx = config.t_ctx;
  pc.t_filter = config.t_filter;
  pc.t_content = config.t_content;
  pc.aggregation =
      config.aggregation == "mean" ? plausibility::Aggregation::kMean : plausibility::Aggregation::kMax;
  pc.prompts = prompt_set(config);
  pc.threads = config.threads;

  const auto pseudo = resolve_pseudo_labels(config, corpus.classes);
  const auto report = plausibility::build_ambiguous_set(
      corpus, {sentences, queries, content_images, content_text}, pseudo, pc);
  for (const auto& [id, reason] : report.dropped) {
    log::warn("plausibility", "example_dropped", {{"example_id", id}, {"reason", reason}});
  }
  const auto out = config.plausibilities_path();
  plausibility::write_plausibilities(report.set, out);
  log::info("plausibility", "set_written",
            {{"entries", report.set.entries.size()},
             {"dropped", report.dropped.size()},
             {"clamp_warnings", report.clamp_warnings}});
  return out;
}

// ---- calibrate / predict / evaluate ----------------------------------------

struct CalibrationInputs {
  plausibility::AmbiguousCalibrationSet set;
  conformal::ScoreTable scores;
};

CalibrationInputs load_calibration(const PipelineConfig& config) {
  const auto p_path = config.plausibilities_path();
  const auto s_path = config.scores_path();
  require_file(p_path, "plausibilities");
  require_file(s_path, "score table");
  return {plausibility::read_plausibilities(p_path), conformal::read_scores(s_path)};
}

std::vector<double> oracle_scores(const PipelineConfig& config, const conformal::ScoreTable& scores,
                                  const std::vector<std::string>& class_ids) {
  const auto path = config.resolve(config.oracle_labels);
  require_file(path, "oracle labels");
  const auto labels = evaluation::read_labels(path, "calibration");
  std::vector<std::string> ids;
  for (const auto& item : labels.items) ids.push_back(item.example_id);
  const auto table = scores.select(ids, class_ids);
  std::vector<double> out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    out.push_back(table.row(i)[table.column(labels.items[i].true_class)]);
  }
  return out;
}

fs::path stage_calibrate(const PipelineConfig& config) {
  const auto in = load_calibration(config);
  if (in.set.entries.empty()) throw CalibrationError("empty calibration set");
  const auto aligned = conformal::align_scores(in.set, in.scores);

  conformal::ConformalThreshold t;
  if (config.method == "webcp") {
    conformal::MonteCarloConfig mc;
    mc.alpha = config.alpha;
    mc.mc_samples = config.mc_samples;
    mc.seed = config.seed;
    mc.rule = threshold_rule(config.rule);
    mc.threads = config.threads;
    t = conformal::mc_threshold(in.set, aligned, mc);
  } else {
    const auto scores = config.method == "standard"
                            ? conformal::query_label_scores(in.set, aligned)
                            : oracle_scores(config, in.scores, in.set.class_ids);
    t.method = config.method;
    t.alpha = config.alpha;
    t.gamma = conformal::standard_threshold(scores, config.alpha);
    t.mc_samples = 1;
    t.seed = config.seed;
    t.rule = "split";
    t.n_calibration = scores.size();
  }
  const auto out = config.threshold_path();
  io::write_json(out, conformal::threshold_to_json(t));
  return out;
}

fs::path stage_predict(const PipelineConfig& config) {
  const auto t_path = config.threshold_path();
  const auto s_path = config.scores_path();
  require_file(t_path, "threshold");
  require_file(s_path, "score table");
  const auto threshold = conformal::threshold_from_json(io::read_json(t_path));
  const auto scores = conformal::read_scores(s_path);

  std::vector<std::string> ids;
  if (!config.test_labels.empty()) {
    const auto path = config.resolve(config.test_labels);
    require_file(path, "test labels");
    for (const auto& item : evaluation::read_labels(path).items) ids.push_back(item.example_id);
  } else {
    std::set<std::string> calibration;
    if (fs::exists(config.plausibilities_path())) {
      for (const auto& e : plausibility::read_plausibilities(config.plausibilities_path()).entries) {
        calibration.insert(e.example_id);
      }
    }
    for (const auto& id : scores.example_ids()) {
      if (!calibration.contains(id)) ids.push_back(id);
    }
  }
  const auto table = scores.select(ids, scores.class_ids());
  const auto sets = conformal::predict_sets(table, threshold.gamma);
  const auto out = config.predictions_path();
  conformal::write_prediction_sets(sets, out);
  log::info("predict", "sets_written", {{"count", sets.size()}});
  return out;
}

fs::path stage_evaluate(const PipelineConfig& config) {
  auto in = load_calibration(config);
  const auto test_path = config.resolve(config.test_labels);
  require_file(test_path, "test labels");

  evaluation::BenchmarkInputs inputs{std::move(in.set), std::move(in.scores),
                                     evaluation::read_labels(test_path), std::nullopt};
  if (!config.oracle_labels.empty()) {
    const auto path = config.resolve(config.oracle_labels);
    require_file(path, "oracle labels");
    inputs.oracle_pool = evaluation::read_labels(path, "calibration");
  }

  evaluation::BenchmarkOptions options;
  options.alphas = config.eval_alphas;
  options.mc_samples = config.mc_samples;
  options.seed = config.seed;
  options.rule = threshold_rule(config.rule);
  options.threads = config.threads;
  options.methods.clear();
  if (config.eval_methods.empty()) {
    options.methods = {evaluation::Method::kWebCP, evaluation::Method::kStandard};
    if (inputs.oracle_pool) options.methods.push_back(evaluation::Method::kOracle);
  } else {
    for (const auto& m : config.eval_methods) options.methods.push_back(evaluation::parse_method(m));
  }

  const auto report = evaluation::run_benchmark(inputs, options);
  const auto out = config.report_path();
  io::write_file(out, evaluation::report_to_csv(report));
  auto json_path = out;
  json_path.replace_extension(".json");
  io::write_json(json_path, evaluation::report_to_json(report));
  return out;
}

std::string relative_to_output(const fs::path& path, const PipelineConfig& config) {
  const auto rel = path.lexically_relative(config.output_dir());
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return path.generic_string();
}

}  // namespace

fs::path run_stage(const PipelineConfig& config, Stage stage) {
  try {
    switch (stage) {
      case Stage::kMine:
        return stage_mine(config);
      case Stage::kEmbed:
        return stage_embed(config);
      case Stage::kPlausibility:
        return stage_plausibility(config);
      case Stage::kCalibrate:
        return stage_calibrate(config);
      case Stage::kPredict:
        return stage_predict(config);
      case Stage::kEvaluate:
        return stage_evaluate(config);
    }
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
  throw StageError(stage, "unknown stage");
}

RunResult run_pipeline(const PipelineConfig& config, std::vector<Stage> stages) {
  if (stages.empty()) stages = config.stages;
  PipelineConfig effective = config;
  effective.stages = stages;
  effective.validate();
  std::sort(stages.begin(), stages.end());
  stages.erase(std::unique(stages.begin(), stages.end()), stages.end());

  RunResult result;
  for (Stage stage : stages) {
    const auto start = std::chrono::steady_clock::now();
    log::info(stage_name(stage), "stage_start");
    const auto path = run_stage(effective, stage);
    Artifact a{stage, path, sha256_file(path), fs::file_size(path)};
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    log::info(stage_name(stage), "stage_done",
              {{"elapsed_ms", ms}, {"artifact", path.generic_string()}, {"sha256", a.sha256}});
    result.artifacts.push_back(std::move(a));
  }
  result.manifest = effective.manifest_path();
  io::write_json(result.manifest, manifest_to_json(result, effective));
  return result;
}

json manifest_to_json(const RunResult& result, const PipelineConfig& config) {
  json artifacts = json::array();
  for (const auto& a : result.artifacts) {
    artifacts.push_back({{"stage", stage_name(a.stage)},
                         {"path", relative_to_output(a.path, config)},
                         {"sha256", a.sha256},
                         {"bytes", a.bytes}});
  }
  return {{"task_name", config.task_name}, {"seed", config.seed}, {"artifacts", artifacts}};
}

std::string store_role(const std::string& store) {
  if (store == "sentences" || store == "queries") return "context";
  if (store == "content_text") return "content";
  if (store == "classifier_labels") return "classifier";
  throw ConfigError("unknown embedding store '" + store + "'");
}

EmbeddingPlan make_embedding_plan(const miner::CorpusManifest& corpus, const fs::path& corpus_dir,
                                  const PipelineConfig& config) {
  EmbeddingPlan plan;
  for (const auto& ex : corpus.examples) {
    for (auto& [id, text] : plausibility::example_sentences(ex)) {
      plan.texts.push_back({"sentences", std::move(id), std::move(text)});
    }
    plan.images.push_back({ex.example_id, corpus_dir / ex.image_bytes_path});
  }
  for (const auto& c : corpus.classes) {
    plan.texts.push_back({"queries", c.id, miner::fill_template(corpus.query_template, c.display_name)});
  }
  std::set<std::string> content;
  const auto prompts = prompt_set(config);
  for (const auto& p : prompts.invalid_form_prompts) content.insert(p);
  content.insert(prompts.negative_label);
  for (const auto& [cls, label] : resolve_pseudo_labels(config, corpus.classes)) content.insert(label);
  for (const auto& text : content) plan.texts.push_back({"content_text", text, text});
  for (const auto& c : corpus.classes) {
    plan.texts.push_back(
        {"classifier_labels", c.id, miner::fill_template(config.prompt_template, c.display_name)});
  }
  return plan;
}

void write_embedding_plan(const EmbeddingPlan& plan, const fs::path& dir) {
  std::vector<json> texts;
  for (const auto& t : plan.texts) {
    texts.push_back({{"store", t.store}, {"role", store_role(t.store)}, {"id", t.id}, {"text", t.text}});
  }
  std::vector<json> images;
  for (const auto& i : plan.images) images.push_back({{"id", i.id}, {"path", i.path.generic_string()}});
  io::write_jsonl(dir / "texts.jsonl", texts);
  io::write_jsonl(dir / "images.jsonl", images);
}

embedding::EmbeddingMatrix load_embedding_file(const fs::path& path) {
  char magic[8] = {};
  {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    in.read(magic, sizeof magic);
  }
  if (std::string_view(magic, sizeof magic) == embedding::kWcpeMagic) {
    return embedding::load_embeddings(path);
  }
  return embedding::parse_embedding_json(io::read_json(path));
}

embedding::EmbeddingMatrix embed_texts(const TextEncoderConfig& encoder,
                                       const std::vector<TextItem>& items) {
  if (encoder.kind == "hashing") {
    embedding::EmbeddingBuilder builder(encoder.dim);
    for (const auto& item : items) {
      const auto v = embedding::hashing_text_embedding(item.text, encoder.dim);
      builder.add(item.id, std::span<const float>(v));
    }
    return std::move(builder).build();
  }
  std::vector<embedding::EmbedItem> request;
  request.reserve(items.size());
  for (const auto& item : items) request.push_back({item.id, item.text});
  embedding::ServiceOptions options;
  options.batch_size = encoder.batch_size;
  return embedding::fetch_embeddings(encoder.endpoint, embedding::ItemKind::kText, request, options);
}

std::map<std::string, std::string> resolve_pseudo_labels(
    const PipelineConfig& config, const std::vector<miner::ClassLabel>& classes) {
  if (config.pseudo_labels.empty()) {
    std::map<std::string, std::string> out;
    for (const auto& c : classes) out[c.id] = c.display_name;
    return out;
  }
  const auto path = config.resolve(config.pseudo_labels);
  require_file(path, "pseudo-label map");
  auto map = plausibility::load_pseudo_map(path);
  for (const auto& c : classes) {
    if (!map.contains(c.id)) throw ConfigError("no pseudo label for class '" + c.id + "'");
  }
  return map;
}

json synthetic_pipeline_config(const evaluation::SyntheticTask& task) {
  return {{"task_name", "synthetic"},
          {"stages", {"calibrate", "predict", "evaluate"}},
          {"temperatures", {{"clf", task.classifier_temperature}}},
          {"alpha", 0.1},
          {"mc_samples", 100},
          {"seed", task.seed},
          {"method", "webcp"},
          {"paths",
           {{"output", "out"},
            {"scores", "scores.jsonl"},
            {"plausibilities", "plausibilities.jsonl"},
            {"test_labels", "test_labels.jsonl"},
            {"oracle_labels", "oracle_labels.jsonl"}}}};
}

}  // namespace webcp::pipeline

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "webcp/common/error.hpp"
#include "webcp/embedding/matrix.hpp"
#include "webcp/evaluation/synthetic.hpp"
#include "webcp/miner/types.hpp"
#include "webcp/pipeline/config.hpp"

namespace webcp::pipeline {

/// Failure inside one stage; the message is prefixed with the stage name.
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& what)
      : Error(stage_name(stage) + ": " + what), stage_(stage) {}

  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

struct Artifact {
  Stage stage;
  std::filesystem::path path;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunResult {
  std::vector<Artifact> artifacts;
  std::filesystem::path manifest;
};

/// Runs `stages` (config.stages when empty) in pipeline order and writes
/// run_manifest.json under the output directory. Throws ConfigErrors before
/// any stage runs, StageError when a stage fails.
RunResult run_pipeline(const PipelineConfig& config, std::vector<Stage> stages = {});

/// Runs a single stage and returns the path of its artifact.
std::filesystem::path run_stage(const PipelineConfig& config, Stage stage);

nlohmann::json manifest_to_json(const RunResult& result, const PipelineConfig& config);

/// Texts and images an external encoder has to embed for a corpus.
struct TextItem {
  std::string store;  // sentences, queries, content_text, classifier_labels
  std::string id;
  std::string text;
};

struct ImageItem {
  std::string id;
  std::filesystem::path path;
};

struct EmbeddingPlan {
  std::vector<TextItem> texts;
  std::vector<ImageItem> images;
};

/// Encoder role of a text store: context, content or classifier.
std::string store_role(const std::string& store);

EmbeddingPlan make_embedding_plan(const miner::CorpusManifest& corpus,
                                  const std::filesystem::path& corpus_dir,
                                  const PipelineConfig& config);

/// texts.jsonl ({"store", "role", "id", "text"}) and images.jsonl ({"id", "path"}).
void write_embedding_plan(const EmbeddingPlan& plan, const std::filesystem::path& dir);

/// `.wcpe` by magic, anything else parsed as a JSON embedding dump.
embedding::EmbeddingMatrix load_embedding_file(const std::filesystem::path& path);

embedding::EmbeddingMatrix embed_texts(const TextEncoderConfig& encoder,
                                       const std::vector<TextItem>& items);

/// Class id -> pseudo label from the configured map, or display names.
std::map<std::string, std::string> resolve_pseudo_labels(const PipelineConfig& config,
                                                         const std::vector<miner::ClassLabel>& classes);

/// Pipeline config for a synthetic task directory written by
/// write_synthetic_task (calibrate, predict and evaluate stages).
nlohmann::json synthetic_pipeline_config(const evaluation::SyntheticTask& task);

}  // namespace webcp::pipeline

#pragma once

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "webcp/common/error.hpp"

namespace webcp::pipeline {

enum class Stage { kMine, kEmbed, kPlausibility, kCalibrate, kPredict, kEvaluate };

const std::vector<Stage>& all_stages();
std::string stage_name(Stage s);
/// "mine", "embed" (alias "embed-import"), "plausibility", "calibrate", "predict", "evaluate".
Stage parse_stage(const std::string& name);
/// Comma-separated list; returned in pipeline order without duplicates.
std::vector<Stage> parse_stages(const std::string& csv);

/// Config validation failure carrying every violation found.
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> problems);

  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

struct ProviderConfig {
  std::string kind;      // "fixture" or "http"
  std::string location;  // fixture directory or endpoint URL
  std::chrono::milliseconds timeout{15000};
  int retries = 2;
  bool respect_robots = true;
  std::string user_agent = "webcp/0.1 (+calibration corpus miner)";
  std::size_t max_per_host = 2;
};

struct TextEncoderConfig {
  std::string kind = "hashing";  // "hashing" or "http"
  std::size_t dim = 64;
  std::string endpoint;
  std::size_t batch_size = 256;
};

/// Declarative pipeline configuration (one JSON file). Relative paths are
/// resolved against `base_dir`, normally the config file's directory.
struct PipelineConfig {
  std::filesystem::path base_dir;

  std::string task_name = "task";
  std::string classes;  // class file
  std::string query_template = "An image of <category>";
  std::string prompt_template = "An image of <category>";
  std::size_t per_class = 50;
  std::size_t search_depth = 0;
  std::size_t max_in_flight = 8;

  double t_ctx = 0.07;
  double t_filter = 0.07;
  double t_content = 0.07;
  double t_clf = 0.07;
  std::string aggregation = "max";
  std::optional<std::vector<std::string>> invalid_form_prompts;  // unset: defaults
  std::optional<std::string> negative_label;
  std::string pseudo_labels;  // empty: class display names

  double alpha = 0.1;
  std::size_t mc_samples = 100;
  std::uint64_t seed = 0;
  std::string method = "webcp";
  std::string rule = "as_written";
  std::size_t threads = 0;

  std::vector<double> eval_alphas{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<std::string> eval_methods;  // empty: webcp, standard (+ oracle with oracle labels)

  std::vector<Stage> stages = all_stages();

  // Paths; empty ones default under `output`.
  std::string output = "out";
  std::string corpus;
  std::string embeddings;
  std::string content_images;
  std::string classifier_images;
  std::string classifier_labels;  // empty: prompt_template through the text encoder
  std::string scores;
  std::string plausibilities;
  std::string threshold;
  std::string predictions;
  std::string report;
  std::string test_labels;
  std::string oracle_labels;

  std::optional<ProviderConfig> search;
  std::optional<ProviderConfig> fetch;
  /// Keyed by role: "context", "content", "classifier". A role without an
  /// entry uses "default".
  std::map<std::string, TextEncoderConfig> text_encoders{{"default", {}}};

  std::filesystem::path resolve(const std::string& p) const;
  std::filesystem::path output_dir() const { return resolve(output); }
  std::filesystem::path corpus_dir() const;
  std::filesystem::path embeddings_dir() const;
  std::filesystem::path scores_path() const;
  std::filesystem::path plausibilities_path() const;
  std::filesystem::path threshold_path() const;
  std::filesystem::path predictions_path() const;
  std::filesystem::path report_path() const;
  std::filesystem::path manifest_path() const { return output_dir() / "run_manifest.json"; }

  const TextEncoderConfig& encoder(const std::string& role) const;

  /// Every violation, empty when valid. Stage-specific requirements are
  /// checked only for the configured stages.
  std::vector<std::string> problems() const;
  /// Throws ConfigErrors when problems() is non-empty.
  void validate() const;
};

/// Parses a config document. Unknown keys and type errors are collected and
/// reported together with the validation problems (ConfigErrors).
PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads and parses `path`; the base directory is the file's parent.
PipelineConfig load_config(const std::filesystem::path& path);

nlohmann::json config_to_json(const PipelineConfig& config);

/// Sets a dotted key ("temperatures.ctx") in `doc`. `value` is parsed as JSON
/// when possible, otherwise taken as a string.
void apply_override(nlohmann::json& doc, const std::string& dotted_key, const std::string& value);

}  // namespace webcp::pipeline

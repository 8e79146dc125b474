#pragma once

#include <nlohmann/json.hpp>

#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace webcp::miner {

struct ClassLabel {
  std::string id;
  std::string display_name;
};

struct SearchEntry {
  std::string image_url;
  std::string context_url;
  int rank = 0;  // 1-based
};

struct MinedExample {
  std::string example_id;
  std::string class_query;       // ClassLabel::id used for the search
  std::string image_bytes_path;  // relative to the corpus root
  std::string alt_text;
  std::string pre_text;   // one sentence per line
  std::string post_text;  // one sentence per line
  std::string source_url;
  std::string image_url;
  std::string fetched_at;  // ISO-8601 UTC
};

/// Outcome counters for one class.
struct ClassStats {
  std::size_t entries = 0;
  std::size_t accepted = 0;
  std::map<std::string, std::size_t> skipped;  // reason -> count
};

struct CorpusManifest {
  std::string task_name;
  std::vector<ClassLabel> classes;
  std::size_t per_class_target = 0;
  std::string query_template;
  std::vector<MinedExample> examples;
  std::map<std::string, ClassStats> stats;  // by class id
  std::vector<std::string> warnings;
};

/// Replaces every `<category>` in `tmpl` with `display_name`.
std::string fill_template(std::string_view tmpl, std::string_view display_name);

void validate_classes(const std::vector<ClassLabel>& classes);

void to_json(nlohmann::json& j, const ClassLabel& c);
void from_json(const nlohmann::json& j, ClassLabel& c);
void to_json(nlohmann::json& j, const SearchEntry& e);
void from_json(const nlohmann::json& j, SearchEntry& e);
void to_json(nlohmann::json& j, const MinedExample& e);
void from_json(const nlohmann::json& j, MinedExample& e);
void to_json(nlohmann::json& j, const ClassStats& s);
void from_json(const nlohmann::json& j, ClassStats& s);
void to_json(nlohmann::json& j, const CorpusManifest& m);
void from_json(const nlohmann::json& j, CorpusManifest& m);

}  // namespace webcp::miner

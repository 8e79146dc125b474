#include "webcp/miner/types.hpp"

#include <set>

#include "webcp/common/error.hpp"

namespace webcp::miner {

std::string fill_template(std::string_view tmpl, std::string_view display_name) {
  static constexpr std::string_view kPlaceholder = "<category>";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = tmpl.find(kPlaceholder, pos);
    if (hit == std::string_view::npos) break;
    out.append(tmpl.substr(pos, hit - pos));
    out.append(display_name);
    pos = hit + kPlaceholder.size();
  }
  out.append(tmpl.substr(pos));
  return out;
}

void validate_classes(const std::vector<ClassLabel>& classes) {
  std::set<std::string> seen;
  for (const auto& c : classes) {
    if (c.id.empty()) throw ConfigError("class with empty id");
    if (c.display_name.empty()) throw ConfigError("class '" + c.id + "' has empty display_name");
    if (!seen.insert(c.id).second) throw ConfigError("duplicate class id '" + c.id + "'");
  }
}

void to_json(nlohmann::json& j, const ClassLabel& c) {
  j = {{"id", c.id}, {"display_name", c.display_name}};
}

void from_json(const nlohmann::json& j, ClassLabel& c) {
  j.at("id").get_to(c.id);
  c.display_name = j.value("display_name", c.id);
}

void to_json(nlohmann::json& j, const SearchEntry& e) {
  j = {{"image_url", e.image_url}, {"context_url", e.context_url}, {"rank", e.rank}};
}

void from_json(const nlohmann::json& j, SearchEntry& e) {
  j.at("image_url").get_to(e.image_url);
  j.at("context_url").get_to(e.context_url);
  j.at("rank").get_to(e.rank);
}

void to_json(nlohmann::json& j, const MinedExample& e) {
  j = {{"example_id", e.example_id},
       {"class_query", e.class_query},
       {"image_bytes_path", e.image_bytes_path},
       {"alt_text", e.alt_text},
       {"pre_text", e.pre_text},
       {"post_text", e.post_text},
       {"source_url", e.source_url},
       {"image_url", e.image_url},
       {"fetched_at", e.fetched_at}};
}

void from_json(const nlohmann::json& j, MinedExample& e) {
  j.at("example_id").get_to(e.example_id);
  j.at("class_query").get_to(e.class_query);
  j.at("image_bytes_path").get_to(e.image_bytes_path);
  e.alt_text = j.value("alt_text", "");
  e.pre_text = j.value("pre_text", "");
  e.post_text = j.value("post_text", "");
  e.source_url = j.value("source_url", "");
  e.image_url = j.value("image_url", "");
  e.fetched_at = j.value("fetched_at", "");
}

void to_json(nlohmann::json& j, const ClassStats& s) {
  j = {{"entries", s.entries}, {"accepted", s.accepted}, {"skipped", s.skipped}};
}

void from_json(const nlohmann::json& j, ClassStats& s) {
  s.entries = j.value("entries", std::size_t{0});
  s.accepted = j.value("accepted", std::size_t{0});
  s.skipped = j.value("skipped", std::map<std::string, std::size_t>{});
}

void to_json(nlohmann::json& j, const CorpusManifest& m) {
  j = {{"task_name", m.task_name},
       {"classes", m.classes},
       {"per_class_target", m.per_class_target},
       {"query_template", m.query_template},
       {"examples", m.examples},
       {"stats", m.stats},
       {"warnings", m.warnings}};
}

void from_json(const nlohmann::json& j, CorpusManifest& m) {
  j.at("task_name").get_to(m.task_name);
  j.at("classes").get_to(m.classes);
  j.at("per_class_target").get_to(m.per_class_target);
  j.at("query_template").get_to(m.query_template);
  m.examples = j.value("examples", std::vector<MinedExample>{});
  m.stats = j.value("stats", std::map<std::string, ClassStats>{});
  m.warnings = j.value("warnings", std::vector<std::string>{});
}

}  // namespace webcp::miner

#include "webcp/plausibility/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"

namespace webcp::plausibility {
namespace {

nlohmann::json by_class(const std::vector<double>& values, const std::vector<std::string>& ids) {
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < ids.size() && i < values.size(); ++i) j[ids[i]] = values[i];
  return j;
}

std::vector<double> aligned(const nlohmann::json& obj, const std::vector<std::string>& ids,
                            const std::string& example_id, const char* field) {
  std::vector<double> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    if (!obj.contains(id)) {
      throw FormatError(example_id + ": " + field + " lacks class '" + id + "'", 0);
    }
    out.push_back(obj[id].get<double>());
  }
  if (obj.size() != ids.size()) {
    throw FormatError(example_id + ": " + field + " has classes outside the task", 0);
  }
  return out;
}

}  // namespace

PromptSet PromptSet::defaults() {
  PromptSet p;
  p.invalid_form_prompts = {"an image with a lot of text", "an image of a graph",
                            "an image of a diagram", "a chart"};
  p.negative_label = "an image";
  return p;
}

void PromptSet::validate() const {
  if (negative_label.empty()) throw ConfigError("negative label must be non-empty");
  std::set<std::string> seen{negative_label};
  for (const auto& p : invalid_form_prompts) {
    if (p.empty()) throw ConfigError("invalid-form prompts must be non-empty");
    if (!seen.insert(p).second) throw ConfigError("duplicate prompt '" + p + "'");
  }
}

void AmbiguousCalibrationSet::validate() const {
  for (const auto& e : entries) {
    if (e.lambda.size() != class_ids.size()) {
      throw DomainError(e.example_id + ": plausibility vector size mismatch");
    }
    double total = e.lambda_junk;
    if (!(e.lambda_junk >= 0.0 && e.lambda_junk <= 1.0)) {
      throw DomainError(e.example_id + ": junk probability outside [0, 1]");
    }
    for (double l : e.lambda) {
      if (!(l >= 0.0 && l <= 1.0)) throw DomainError(e.example_id + ": lambda outside [0, 1]");
      total += l;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw DomainError(e.example_id + ": plausibilities sum to " + std::to_string(total));
    }
  }
}

nlohmann::json to_json_line(const PlausibilityVector& v, const std::vector<std::string>& ids) {
  return {{"example_id", v.example_id},
          {"class_query", v.class_query},
          {"lambda", by_class(v.lambda, ids)},
          {"lambda_junk", v.lambda_junk},
          {"components",
           {{"context", by_class(v.context, ids)},
            {"content", by_class(v.content, ids)},
            {"s_neg", v.s_neg}}}};
}

PseudoLabelMap load_pseudo_map(const std::filesystem::path& path) {
  const auto doc = io::read_json(path);
  if (!doc.is_object()) throw ConfigError(path.string() + ": pseudo-label map must be an object");
  PseudoLabelMap map;
  for (const auto& [cls, label] : doc.items()) {
    if (!label.is_string() || label.get<std::string>().empty()) {
      throw ConfigError(path.string() + ": empty pseudo label for class '" + cls + "'");
    }
    map.emplace(cls, label.get<std::string>());
  }
  return map;
}

void write_plausibilities(const AmbiguousCalibrationSet& set, const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(set.entries.size());
  for (const auto& e : set.entries) rows.push_back(to_json_line(e, set.class_ids));
  io::write_jsonl(path, rows);
}

AmbiguousCalibrationSet read_plausibilities(const std::filesystem::path& path,
                                            std::vector<std::string> class_ids) {
  const auto rows = io::read_jsonl(path);
  AmbiguousCalibrationSet set;
  if (class_ids.empty() && !rows.empty()) {
    for (const auto& [cls, _] : rows.front().at("lambda").items()) class_ids.push_back(cls);
  }
  set.class_ids = std::move(class_ids);
  for (const auto& row : rows) {
    PlausibilityVector v;
    v.example_id = row.at("example_id").get<std::string>();
    v.class_query = row.value("class_query", "");
    v.lambda = aligned(row.at("lambda"), set.class_ids, v.example_id, "lambda");
    v.lambda_junk = row.at("lambda_junk").get<double>();
    if (row.contains("components")) {
      const auto& c = row["components"];
      if (c.contains("context") && !c["context"].empty()) v.context = aligned(c["context"], set.class_ids, v.example_id, "context");
      if (c.contains("content") && !c["content"].empty()) v.content = aligned(c["content"], set.class_ids, v.example_id, "content");
      v.s_neg = c.value("s_neg", 0.0);
    }
    set.entries.push_back(std::move(v));
  }
  std::sort(set.entries.begin(), set.entries.end(),
            [](const auto& a, const auto& b) { return a.example_id < b.example_id; });
  set.validate();
  return set;
}

}  // namespace webcp::plausibility

#include "webcp/evaluation/metrics.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"

namespace webcp::evaluation {

double coverage(const std::vector<conformal::PredictionSet>& sets, const LabeledEvalSet& truth) {
  if (sets.size() != truth.items.size()) {
    throw ConfigError("coverage: " + std::to_string(sets.size()) + " prediction sets for " +
                      std::to_string(truth.items.size()) + " labelled examples");
  }
  if (sets.empty()) throw DomainError("coverage: empty evaluation set");
  std::unordered_map<std::string_view, const conformal::PredictionSet*> by_id;
  by_id.reserve(sets.size());
  for (const auto& s : sets) {
    if (!by_id.emplace(s.example_id, &s).second) {
      throw ConfigError("coverage: duplicate prediction set for " + s.example_id);
    }
  }
  std::size_t hits = 0;
  for (const auto& item : truth.items) {
    auto it = by_id.find(item.example_id);
    if (it == by_id.end()) throw ConfigError("coverage: no prediction set for " + item.example_id);
    const auto& members = it->second->members;
    if (std::find(members.begin(), members.end(), item.true_class) != members.end()) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.items.size());
}

double efficiency(const std::vector<conformal::PredictionSet>& sets) {
  if (sets.empty()) throw DomainError("efficiency: empty evaluation set");
  std::size_t total = 0;
  for (const auto& s : sets) total += s.members.size();
  return static_cast<double>(total) / static_cast<double>(sets.size());
}

LabeledEvalSet read_labels(const std::filesystem::path& path, std::string split) {
  LabeledEvalSet set;
  set.split = std::move(split);
  std::unordered_set<std::string> seen;
  for (const auto& row : io::read_jsonl(path)) {
    try {
      LabeledItem item{row.at("example_id").get<std::string>(), row.at("label").get<std::string>()};
      if (!seen.insert(item.example_id).second) {
        throw FormatError(path.string() + ": duplicate example_id " + item.example_id, 0);
      }
      set.items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what(), 0);
    }
  }
  return set;
}

void write_labels(const LabeledEvalSet& set, const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(set.items.size());
  for (const auto& item : set.items) {
    rows.push_back({{"example_id", item.example_id}, {"label", item.true_class}});
  }
  io::write_jsonl(path, rows);
}

}  // namespace webcp::evaluation

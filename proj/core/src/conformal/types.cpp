#include "webcp/conformal/types.hpp"

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"

namespace webcp::conformal {

ScoreTable::ScoreTable(std::vector<std::string> class_ids, std::vector<std::string> example_ids,
                       std::vector<double> scores, std::vector<double> probs)
    : class_ids_(std::move(class_ids)),
      example_ids_(std::move(example_ids)),
      scores_(std::move(scores)),
      probs_(std::move(probs)) {
  if (scores_.size() != class_ids_.size() * example_ids_.size()) {
    throw DomainError("score table shape mismatch");
  }
  if (!probs_.empty() && probs_.size() != scores_.size()) {
    throw DomainError("probability table shape mismatch");
  }
  for (double s : scores_) {
    if (!std::isfinite(s)) throw DomainError("non-finite nonconformity score");
  }
  for (std::size_t i = 0; i < example_ids_.size(); ++i) {
    if (!index_.emplace(example_ids_[i], i).second) {
      throw DomainError("duplicate example id '" + example_ids_[i] + "' in score table");
    }
  }
}

std::optional<std::size_t> ScoreTable::find(const std::string& example_id) const {
  const auto it = index_.find(example_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t ScoreTable::column(const std::string& class_id) const {
  for (std::size_t j = 0; j < class_ids_.size(); ++j) {
    if (class_ids_[j] == class_id) return j;
  }
  throw ConfigError("score table has no class '" + class_id + "'");
}

ScoreTable ScoreTable::select(const std::vector<std::string>& example_ids,
                              const std::vector<std::string>& class_ids) const {
  std::vector<std::size_t> cols;
  cols.reserve(class_ids.size());
  for (const auto& c : class_ids) cols.push_back(column(c));
  std::vector<double> scores, probs;
  scores.reserve(example_ids.size() * cols.size());
  for (const auto& id : example_ids) {
    const auto i = find(id);
    if (!i) throw MissingEmbeddingError(id);
    const auto r = row(*i);
    const auto p = prob_row(*i);
    for (std::size_t c : cols) {
      scores.push_back(r[c]);
      if (!p.empty()) probs.push_back(p[c]);
    }
  }
  return ScoreTable(class_ids, example_ids, std::move(scores), std::move(probs));
}

void MonteCarloConfig::validate() const {
  if (mc_samples < 1) throw ConfigError("Monte Carlo sample count M must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

void write_scores(const ScoreTable& table, const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    nlohmann::json scores = nlohmann::json::object(), probs = nlohmann::json::object();
    const auto r = table.row(i);
    const auto p = table.prob_row(i);
    for (std::size_t j = 0; j < table.num_classes(); ++j) {
      scores[table.class_ids()[j]] = r[j];
      if (!p.empty()) probs[table.class_ids()[j]] = p[j];
    }
    nlohmann::json line{{"example_id", table.example_ids()[i]}, {"scores", scores}};
    if (!p.empty()) line["probs"] = probs;
    rows.push_back(std::move(line));
  }
  io::write_jsonl(path, rows);
}

ScoreTable read_scores(const std::filesystem::path& path) {
  const auto rows = io::read_jsonl(path);
  std::vector<std::string> class_ids, example_ids;
  std::vector<double> scores, probs;
  if (!rows.empty()) {
    for (const auto& [cls, _] : rows.front().at("scores").items()) class_ids.push_back(cls);
  }
  bool with_probs = !rows.empty() && rows.front().contains("probs");
  for (const auto& row : rows) {
    example_ids.push_back(row.at("example_id").get<std::string>());
    const auto& s = row.at("scores");
    if (s.size() != class_ids.size()) {
      throw FormatError(path.string() + ": row " + example_ids.back() + " has a different class set", 0);
    }
    for (const auto& c : class_ids) {
      if (!s.contains(c)) {
        throw FormatError(path.string() + ": row " + example_ids.back() + " lacks class " + c, 0);
      }
      scores.push_back(s[c].get<double>());
      if (with_probs) {
        if (!row.contains("probs") || !row["probs"].contains(c)) {
          with_probs = false;
          probs.clear();
        } else {
          probs.push_back(row["probs"][c].get<double>());
        }
      }
    }
  }
  if (!with_probs) probs.clear();
  return ScoreTable(std::move(class_ids), std::move(example_ids), std::move(scores),
                    std::move(probs));
}

nlohmann::json threshold_to_json(const ConformalThreshold& t) {
  nlohmann::json j{{"method", t.method},
                   {"all_labels", t.all_labels()},
                   {"alpha", t.alpha},
                   {"mc_samples", t.mc_samples},
                   {"seed", t.seed},
                   {"rule", t.rule},
                   {"n_calibration", t.n_calibration},
                   {"iteration_sizes", t.iteration_sizes}};
  j["gamma"] = t.all_labels() ? nlohmann::json(nullptr) : nlohmann::json(t.gamma);
  return j;
}

ConformalThreshold threshold_from_json(const nlohmann::json& j) {
  ConformalThreshold t;
  t.method = j.value("method", "webcp");
  const bool all = j.value("all_labels", false) || !j.contains("gamma") || j["gamma"].is_null();
  t.gamma = all ? kAllLabels : j["gamma"].get<double>();
  t.alpha = j.value("alpha", 0.1);
  t.mc_samples = j.value("mc_samples", std::size_t{1});
  t.seed = j.value("seed", std::uint64_t{0});
  t.rule = j.value("rule", "as_written");
  t.n_calibration = j.value("n_calibration", std::size_t{0});
  t.iteration_sizes = j.value("iteration_sizes", std::vector<std::size_t>{});
  return t;
}

void write_prediction_sets(const std::vector<PredictionSet>& sets,
                           const std::filesystem::path& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(sets.size());
  for (const auto& s : sets) {
    nlohmann::json line{{"example_id", s.example_id}, {"members", s.members}};
    line["gamma"] = is_all_labels(s.gamma) ? nlohmann::json(nullptr) : nlohmann::json(s.gamma);
    rows.push_back(std::move(line));
  }
  io::write_jsonl(path, rows);
}

std::vector<PredictionSet> read_prediction_sets(const std::filesystem::path& path) {
  std::vector<PredictionSet> out;
  for (const auto& row : io::read_jsonl(path)) {
    PredictionSet s;
    s.example_id = row.at("example_id").get<std::string>();
    s.members = row.at("members").get<std::vector<std::string>>();
    s.gamma = row.contains("gamma") && !row["gamma"].is_null() ? row["gamma"].get<double>()
                                                               : kAllLabels;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace webcp::conformal

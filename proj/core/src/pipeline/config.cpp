#include "webcp/pipeline/config.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "webcp/common/json_io.hpp"
#include "webcp/plausibility/types.hpp"

namespace webcp::pipeline {

namespace {

using nlohmann::json;

std::string join_problems(const std::vector<std::string>& problems) {
  std::ostringstream out;
  out << problems.size() << " configuration problem" << (problems.size() == 1 ? "" : "s");
  for (const auto& p : problems) out << "\n  - " << p;
  return out.str();
}

// Reads typed fields from one JSON object, recording type errors and keys
// that were never consumed.
class Section {
 public:
  Section(const json& doc, std::string path, std::vector<std::string>& problems)
      : doc_(doc), path_(std::move(path)), problems_(problems) {
    if (!doc_.is_object()) problems_.push_back(where() + "must be an object");
  }
  ~Section() {
    if (!doc_.is_object()) return;
    for (const auto& [key, _] : doc_.items()) {
      if (!seen_.contains(key)) problems_.push_back("unknown key '" + qualified(key) + "'");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!doc_.is_object() || !doc_.contains(key) || doc_[key].is_null()) return;
    try {
      out = doc_[key].get<T>();
    } catch (const json::exception&) {
      problems_.push_back("'" + qualified(key) + "' has the wrong type");
    }
  }

  bool has(const char* key) const {
    return doc_.is_object() && doc_.contains(key) && !doc_[key].is_null();
  }

  Section child(const char* key) {
    seen_.insert(key);
    static const json kEmpty = json::object();
    return Section(has(key) ? doc_[key] : kEmpty, qualified(key), problems_);
  }

  void mark(const char* key) { seen_.insert(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return doc_[key];
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "config " : "'" + path_ + "' "; }

  const json& doc_;
  std::string path_;
  std::vector<std::string>& problems_;
  std::set<std::string> seen_;
};

ProviderConfig parse_provider(Section s) {
  ProviderConfig p;
  s.get("kind", p.kind);
  s.get("location", p.location);
  std::int64_t timeout_ms = p.timeout.count();
  s.get("timeout_ms", timeout_ms);
  p.timeout = std::chrono::milliseconds{timeout_ms};
  s.get("retries", p.retries);
  s.get("respect_robots", p.respect_robots);
  s.get("user_agent", p.user_agent);
  s.get("max_per_host", p.max_per_host);
  return p;
}

TextEncoderConfig parse_encoder(Section s) {
  TextEncoderConfig e;
  s.get("kind", e.kind);
  s.get("dim", e.dim);
  s.get("endpoint", e.endpoint);
  s.get("batch_size", e.batch_size);
  return e;
}

json provider_json(const ProviderConfig& p) {
  return {{"kind", p.kind},
          {"location", p.location},
          {"timeout_ms", p.timeout.count()},
          {"retries", p.retries},
          {"respect_robots", p.respect_robots},
          {"user_agent", p.user_agent},
          {"max_per_host", p.max_per_host}};
}

json encoder_json(const TextEncoderConfig& e) {
  json j = {{"kind", e.kind}, {"batch_size", e.batch_size}};
  if (e.kind == "hashing") j["dim"] = e.dim;
  if (!e.endpoint.empty()) j["endpoint"] = e.endpoint;
  return j;
}

bool contains(const std::vector<Stage>& stages, Stage s) {
  return std::find(stages.begin(), stages.end(), s) != stages.end();
}

void check_provider(const std::optional<ProviderConfig>& p, const char* name,
                    std::vector<std::string>& problems) {
  const std::string key = std::string("providers.") + name;
  if (!p) {
    problems.push_back("'" + key + "' is required by the mine stage");
    return;
  }
  if (p->kind != "fixture" && p->kind != "http") {
    problems.push_back("'" + key + ".kind' must be \"fixture\" or \"http\"");
  }
  if (p->location.empty()) problems.push_back("'" + key + ".location' is required");
  if (p->timeout.count() <= 0) problems.push_back("'" + key + ".timeout_ms' must be > 0");
  if (p->retries < 0) problems.push_back("'" + key + ".retries' must be >= 0");
  if (p->max_per_host == 0) problems.push_back("'" + key + ".max_per_host' must be >= 1");
}

}  // namespace

const std::vector<Stage>& all_stages() {
  static const std::vector<Stage> kStages{Stage::kMine,      Stage::kEmbed,   Stage::kPlausibility,
                                          Stage::kCalibrate, Stage::kPredict, Stage::kEvaluate};
  return kStages;
}

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::kMine:
      return "mine";
    case Stage::kEmbed:
      return "embed";
    case Stage::kPlausibility:
      return "plausibility";
    case Stage::kCalibrate:
      return "calibrate";
    case Stage::kPredict:
      return "predict";
    case Stage::kEvaluate:
      return "evaluate";
  }
  return "unknown";
}

Stage parse_stage(const std::string& name) {
  for (Stage s : all_stages()) {
    if (stage_name(s) == name) return s;
  }
  if (name == "embed-import") return Stage::kEmbed;
  throw ConfigError("unknown stage '" + name + "'");
}

std::vector<Stage> parse_stages(const std::string& csv) {
  std::set<Stage> wanted;
  std::stringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) wanted.insert(parse_stage(item));
  }
  if (wanted.empty()) throw ConfigError("empty stage list");
  return {wanted.begin(), wanted.end()};
}

ConfigErrors::ConfigErrors(std::vector<std::string> problems)
    : ConfigError(join_problems(problems)), problems_(std::move(problems)) {}

std::filesystem::path PipelineConfig::resolve(const std::string& p) const {
  std::filesystem::path path(p);
  if (path.is_absolute() || base_dir.empty()) return path.lexically_normal();
  return (base_dir / path).lexically_normal();
}

std::filesystem::path PipelineConfig::corpus_dir() const {
  return corpus.empty() ? output_dir() / "corpus" : resolve(corpus);
}
std::filesystem::path PipelineConfig::embeddings_dir() const {
  return embeddings.empty() ? output_dir() / "embeddings" : resolve(embeddings);
}
std::filesystem::path PipelineConfig::scores_path() const {
  return scores.empty() ? output_dir() / "scores.jsonl" : resolve(scores);
}
std::filesystem::path PipelineConfig::plausibilities_path() const {
  return plausibilities.empty() ? output_dir() / "plausibilities.jsonl" : resolve(plausibilities);
}
std::filesystem::path PipelineConfig::threshold_path() const {
  return threshold.empty() ? output_dir() / "threshold.json" : resolve(threshold);
}
std::filesystem::path PipelineConfig::predictions_path() const {
  return predictions.empty() ? output_dir() / "prediction_sets.jsonl" : resolve(predictions);
}
std::filesystem::path PipelineConfig::report_path() const {
  return report.empty() ? output_dir() / "report.csv" : resolve(report);
}

const TextEncoderConfig& PipelineConfig::encoder(const std::string& role) const {
  auto it = text_encoders.find(role);
  if (it == text_encoders.end()) it = text_encoders.find("default");
  if (it == text_encoders.end()) throw ConfigError("no text encoder configured for role '" + role + "'");
  return it->second;
}

std::vector<std::string> PipelineConfig::problems() const {
  std::vector<std::string> out;
  if (task_name.empty()) out.push_back("'task_name' must be non-empty");
  const std::pair<const char*, double> temps[] = {
      {"ctx", t_ctx}, {"filter", t_filter}, {"content", t_content}, {"clf", t_clf}};
  for (const auto& [name, t] : temps) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      out.push_back(std::string("'temperatures.") + name + "' must be > 0");
    }
  }
  if (!(alpha > 0.0 && alpha < 1.0)) out.push_back("'alpha' must be in (0, 1)");
  if (mc_samples == 0) out.push_back("'mc_samples' must be >= 1");
  if (method != "webcp" && method != "standard" && method != "oracle") {
    out.push_back("'method' must be webcp, standard or oracle");
  }
  if (rule != "as_written" && rule != "conservative") {
    out.push_back("'rule' must be as_written or conservative");
  }
  if (aggregation != "max" && aggregation != "mean") {
    out.push_back("'aggregation' must be max or mean");
  }
  if (stages.empty()) out.push_back("'stages' must list at least one stage");
  if (output.empty()) out.push_back("'paths.output' must be non-empty");

  if (contains(stages, Stage::kMine)) {
    if (classes.empty()) out.push_back("'classes' is required by the mine stage");
    if (per_class == 0) out.push_back("'per_class' must be >= 1");
    if (max_in_flight == 0) out.push_back("'max_in_flight' must be >= 1");
    if (query_template.empty()) out.push_back("'query_template' must be non-empty");
    check_provider(search, "search", out);
    check_provider(fetch, "fetch", out);
  }
  if (contains(stages, Stage::kEmbed)) {
    if (content_images.empty()) out.push_back("'paths.content_images' is required by the embed stage");
    if (classifier_images.empty()) {
      out.push_back("'paths.classifier_images' is required by the embed stage");
    }
    if (classifier_labels.empty() && prompt_template.empty()) {
      out.push_back("'prompt_template' or 'paths.classifier_labels' is required by the embed stage");
    }
    for (const auto& [role, e] : text_encoders) {
      if (role != "default" && role != "context" && role != "content" && role != "classifier") {
        out.push_back("unknown text encoder role '" + role + "'");
      }
      if (e.kind == "hashing") {
        if (e.dim == 0) out.push_back("'providers.text." + role + ".dim' must be >= 1");
      } else if (e.kind == "http") {
        if (e.endpoint.empty()) out.push_back("'providers.text." + role + ".endpoint' is required");
      } else {
        out.push_back("'providers.text." + role + ".kind' must be \"hashing\" or \"http\"");
      }
      if (e.batch_size == 0) out.push_back("'providers.text." + role + ".batch_size' must be >= 1");
    }
  }
  if (contains(stages, Stage::kPlausibility) || contains(stages, Stage::kEmbed)) {
    plausibility::PromptSet prompts = plausibility::PromptSet::defaults();
    if (invalid_form_prompts) prompts.invalid_form_prompts = *invalid_form_prompts;
    if (negative_label) prompts.negative_label = *negative_label;
    try {
      prompts.validate();
    } catch (const Error& e) {
      out.push_back(std::string("'prompts': ") + e.what());
    }
  }
  if (contains(stages, Stage::kCalibrate) && method == "oracle" && oracle_labels.empty()) {
    out.push_back("'paths.oracle_labels' is required by method oracle");
  }
  if (contains(stages, Stage::kEvaluate)) {
    if (test_labels.empty()) out.push_back("'paths.test_labels' is required by the evaluate stage");
    if (eval_alphas.empty()) out.push_back("'evaluate.alphas' must be non-empty");
    for (double a : eval_alphas) {
      if (!(a > 0.0 && a < 1.0)) {
        out.push_back("'evaluate.alphas' entries must be in (0, 1)");
        break;
      }
    }
    for (const auto& m : eval_methods) {
      if (m != "webcp" && m != "standard" && m != "oracle") {
        out.push_back("'evaluate.methods' has unknown method '" + m + "'");
      } else if (m == "oracle" && oracle_labels.empty()) {
        out.push_back("'evaluate.methods' lists oracle but 'paths.oracle_labels' is unset");
      }
    }
  }
  return out;
}

void PipelineConfig::validate() const {
  auto p = problems();
  if (!p.empty()) throw ConfigErrors(std::move(p));
}

PipelineConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  PipelineConfig c;
  c.base_dir = base_dir;
  std::vector<std::string> problems;
  {
    Section s(doc, "", problems);
    s.get("task_name", c.task_name);
    s.get("classes", c.classes);
    s.get("query_template", c.query_template);
    s.get("prompt_template", c.prompt_template);
    s.get("per_class", c.per_class);
    s.get("search_depth", c.search_depth);
    s.get("max_in_flight", c.max_in_flight);
    {
      Section t = s.child("temperatures");
      t.get("ctx", c.t_ctx);
      t.get("filter", c.t_filter);
      t.get("content", c.t_content);
      t.get("clf", c.t_clf);
    }
    s.get("aggregation", c.aggregation);
    {
      Section p = s.child("prompts");
      if (p.has("invalid_form")) {
        std::vector<std::string> v;
        p.get("invalid_form", v);
        c.invalid_form_prompts = std::move(v);
      } else {
        p.mark("invalid_form");
      }
      if (p.has("negative_label")) {
        std::string n;
        p.get("negative_label", n);
        c.negative_label = std::move(n);
      } else {
        p.mark("negative_label");
      }
    }
    s.get("pseudo_labels", c.pseudo_labels);
    s.get("alpha", c.alpha);
    s.get("mc_samples", c.mc_samples);
    s.get("seed", c.seed);
    s.get("method", c.method);
    s.get("rule", c.rule);
    s.get("threads", c.threads);
    {
      Section e = s.child("evaluate");
      e.get("alphas", c.eval_alphas);
      e.get("methods", c.eval_methods);
    }
    if (s.has("stages")) {
      const auto& st = s.raw("stages");
      try {
        if (st.is_string()) {
          c.stages = parse_stages(st.get<std::string>());
        } else if (st.is_array()) {
          std::string csv;
          for (const auto& item : st) csv += item.get<std::string>() + ",";
          c.stages = parse_stages(csv);
        } else {
          problems.push_back("'stages' must be a list or a comma-separated string");
        }
      } catch (const std::exception& e) {
        problems.push_back(std::string("'stages': ") + e.what());
      }
    } else {
      s.mark("stages");
    }
    {
      Section p = s.child("paths");
      p.get("output", c.output);
      p.get("corpus", c.corpus);
      p.get("embeddings", c.embeddings);
      p.get("content_images", c.content_images);
      p.get("classifier_images", c.classifier_images);
      p.get("classifier_labels", c.classifier_labels);
      p.get("scores", c.scores);
      p.get("plausibilities", c.plausibilities);
      p.get("threshold", c.threshold);
      p.get("predictions", c.predictions);
      p.get("report", c.report);
      p.get("test_labels", c.test_labels);
      p.get("oracle_labels", c.oracle_labels);
    }
    {
      Section pr = s.child("providers");
      if (pr.has("search")) c.search = parse_provider(pr.child("search"));
      if (pr.has("fetch")) c.fetch = parse_provider(pr.child("fetch"));
      if (pr.has("text")) {
        const auto& text = pr.raw("text");
        c.text_encoders.clear();
        if (text.is_object() && text.contains("kind")) {
          c.text_encoders["default"] = parse_encoder(Section(text, "providers.text", problems));
        } else if (text.is_object()) {
          for (const auto& [role, value] : text.items()) {
            c.text_encoders[role] = parse_encoder(Section(value, "providers.text." + role, problems));
          }
        } else {
          problems.push_back("'providers.text' must be an object");
        }
      }
      pr.mark("search");
      pr.mark("fetch");
      pr.mark("text");
    }
  }
  auto validation = c.problems();
  problems.insert(problems.end(), validation.begin(), validation.end());
  if (!problems.empty()) throw ConfigErrors(std::move(problems));
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  json doc;
  try {
    doc = io::read_json(path);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
  auto base = std::filesystem::absolute(path).parent_path();
  return parse_config(doc, base);
}

json config_to_json(const PipelineConfig& c) {
  json j = {{"task_name", c.task_name},
            {"classes", c.classes},
            {"query_template", c.query_template},
            {"prompt_template", c.prompt_template},
            {"per_class", c.per_class},
            {"search_depth", c.search_depth},
            {"max_in_flight", c.max_in_flight},
            {"temperatures",
             {{"ctx", c.t_ctx}, {"filter", c.t_filter}, {"content", c.t_content}, {"clf", c.t_clf}}},
            {"aggregation", c.aggregation},
            {"pseudo_labels", c.pseudo_labels},
            {"alpha", c.alpha},
            {"mc_samples", c.mc_samples},
            {"seed", c.seed},
            {"method", c.method},
            {"rule", c.rule},
            {"threads", c.threads},
            {"evaluate", {{"alphas", c.eval_alphas}, {"methods", c.eval_methods}}}};
  json prompts = json::object();
  if (c.invalid_form_prompts) prompts["invalid_form"] = *c.invalid_form_prompts;
  if (c.negative_label) prompts["negative_label"] = *c.negative_label;
  j["prompts"] = prompts;
  json stages = json::array();
  for (Stage s : c.stages) stages.push_back(stage_name(s));
  j["stages"] = stages;
  j["paths"] = {{"output", c.output},
                {"corpus", c.corpus},
                {"embeddings", c.embeddings},
                {"content_images", c.content_images},
                {"classifier_images", c.classifier_images},
                {"classifier_labels", c.classifier_labels},
                {"scores", c.scores},
                {"plausibilities", c.plausibilities},
                {"threshold", c.threshold},
                {"predictions", c.predictions},
                {"report", c.report},
                {"test_labels", c.test_labels},
                {"oracle_labels", c.oracle_labels}};
  json providers = json::object();
  if (c.search) providers["search"] = provider_json(*c.search);
  if (c.fetch) providers["fetch"] = provider_json(*c.fetch);
  json text = json::object();
  for (const auto& [role, e] : c.text_encoders) text[role] = encoder_json(e);
  providers["text"] = text;
  j["providers"] = providers;
  return j;
}

void apply_override(json& doc, const std::string& dotted_key, const std::string& value) {
  if (dotted_key.empty()) throw ConfigError("empty override key");
  if (!doc.is_object()) doc = json::object();
  json* node = &doc;
  std::stringstream in(dotted_key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(in, part, '.')) {
    if (part.empty()) throw ConfigError("malformed override key '" + dotted_key + "'");
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    json& next = (*node)[parts[i]];
    if (!next.is_object()) next = json::object();
    node = &next;
  }
  json parsed = json::parse(value, nullptr, false);
  (*node)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
}

}  // namespace webcp::pipeline

#include "webcp/evaluation/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/philox.hpp"
#include "webcp/conformal/scores.hpp"
#include "webcp/embedding/wcpe.hpp"

namespace webcp::evaluation {

namespace {

enum Stream : std::uint64_t { kCenters = 0, kWeb = 1, kTest = 2, kOracle = 3 };

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string item_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%05zu", prefix, i);
  return buf;
}

std::string class_id(std::size_t y, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "class_%0*zu", k > 100 ? 3 : 2, y);
  return buf;
}

struct Generator {
  const SyntheticTask& task;
  std::vector<std::vector<double>> centers;

  std::vector<float> draw(RandomStream& rng, const std::vector<double>& mean, double scale,
                          double noise) const {
    const double sd = noise / std::sqrt(static_cast<double>(task.dim));
    std::vector<float> x(task.dim);
    for (std::size_t k = 0; k < task.dim; ++k) {
      x[k] = static_cast<float>(scale * mean[k] + sd * rng.normal());
    }
    return x;
  }

  // Class the classifier ranks first among y != exclude: softmax is monotone in cosine.
  std::size_t top_class(const std::vector<float>& x, std::size_t exclude = SIZE_MAX) const {
    double best = kNegInf;
    std::size_t arg = 0;
    for (std::size_t y = 0; y < centers.size(); ++y) {
      if (y == exclude) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < task.dim; ++k) dot += static_cast<double>(x[k]) * centers[y][k];
      if (dot > best) {
        best = dot;
        arg = y;
      }
    }
    return arg;
  }

  double log_density(const std::vector<float>& x, const std::vector<double>& mean, double scale,
                     double noise) const {
    double sq = 0.0;
    for (std::size_t k = 0; k < task.dim; ++k) {
      const double r = static_cast<double>(x[k]) - scale * mean[k];
      sq += r * r;
    }
    const double d = static_cast<double>(task.dim);
    return -d * sq / (2.0 * noise * noise) - d * std::log(noise);
  }
};

}  // namespace

std::string label_noise_name(LabelNoise mode) {
  return mode == LabelNoise::kNearestWrong ? "nearest_wrong" : "classifier_top";
}

LabelNoise parse_label_noise(const std::string& name) {
  if (name == "classifier_top") return LabelNoise::kClassifierTop;
  if (name == "nearest_wrong") return LabelNoise::kNearestWrong;
  throw ConfigError("synthetic task: unknown label_noise_mode '" + name + "'");
}

void SyntheticTask::validate() const {
  if (num_classes < 2) throw ConfigError("synthetic task: num_classes must be >= 2");
  if (dim < 2) throw ConfigError("synthetic task: dim must be >= 2");
  if (!(noise_scale > 0.0)) throw ConfigError("synthetic task: noise_scale must be > 0");
  if (!class_noise_scale.empty()) {
    if (class_noise_scale.size() != num_classes) {
      throw ConfigError("synthetic task: class_noise_scale needs one value per class");
    }
    for (double s : class_noise_scale) {
      if (!(s > 0.0)) throw ConfigError("synthetic task: class noise scales must be > 0");
    }
  }
  if (!(label_noise >= 0.0 && label_noise <= 1.0)) {
    throw ConfigError("synthetic task: label_noise must be in [0, 1]");
  }
  if (!(junk_rate >= 0.0 && junk_rate < 1.0)) {
    throw ConfigError("synthetic task: junk_rate must be in [0, 1)");
  }
  if (!(junk_noise_scale > 0.0)) throw ConfigError("synthetic task: junk_noise_scale must be > 0");
  if (!std::isfinite(junk_center_scale)) {
    throw ConfigError("synthetic task: junk_center_scale must be finite");
  }
  if (!(classifier_temperature > 0.0)) {
    throw ConfigError("synthetic task: classifier_temperature must be > 0");
  }
  if (n_calib == 0 || n_test == 0) throw ConfigError("synthetic task: empty split");
}

void to_json(nlohmann::json& j, const SyntheticTask& t) {
  j = {{"num_classes", t.num_classes},
       {"dim", t.dim},
       {"noise_scale", t.noise_scale},
       {"class_noise_scale", t.class_noise_scale},
       {"label_noise", t.label_noise},
       {"label_noise_mode", label_noise_name(t.label_noise_mode)},
       {"junk_rate", t.junk_rate},
       {"junk_center_scale", t.junk_center_scale},
       {"junk_noise_scale", t.junk_noise_scale},
       {"classifier_temperature", t.classifier_temperature},
       {"n_calib", t.n_calib},
       {"n_test", t.n_test},
       {"n_oracle", t.n_oracle},
       {"seed", t.seed}};
}

void from_json(const nlohmann::json& j, SyntheticTask& t) {
  const SyntheticTask d;
  t.num_classes = j.value("num_classes", d.num_classes);
  t.dim = j.value("dim", d.dim);
  t.noise_scale = j.value("noise_scale", d.noise_scale);
  t.class_noise_scale = j.value("class_noise_scale", d.class_noise_scale);
  t.label_noise = j.value("label_noise", d.label_noise);
  t.label_noise_mode =
      parse_label_noise(j.value("label_noise_mode", label_noise_name(d.label_noise_mode)));
  t.junk_rate = j.value("junk_rate", d.junk_rate);
  t.junk_center_scale = j.value("junk_center_scale", d.junk_center_scale);
  t.junk_noise_scale = j.value("junk_noise_scale", d.junk_noise_scale);
  t.classifier_temperature = j.value("classifier_temperature", d.classifier_temperature);
  t.n_calib = j.value("n_calib", d.n_calib);
  t.n_test = j.value("n_test", d.n_test);
  t.n_oracle = j.value("n_oracle", d.n_oracle);
  t.seed = j.value("seed", d.seed);
}

SyntheticData generate_synthetic_task(const SyntheticTask& task) {
  task.validate();
  const std::size_t K = task.num_classes;
  Generator gen{task, {}};

  RandomStream center_rng(task.seed, kCenters);
  gen.centers.assign(K, std::vector<double>(task.dim));
  for (auto& c : gen.centers) {
    double norm = 0.0;
    for (auto& v : c) {
      v = center_rng.normal();
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (auto& v : c) v /= norm;
  }

  SyntheticData out;
  for (std::size_t y = 0; y < K; ++y) out.class_ids.push_back(class_id(y, K));
  {
    embedding::EmbeddingBuilder labels(task.dim);
    for (std::size_t y = 0; y < K; ++y) labels.add(out.class_ids[y], std::span<const double>(gen.centers[y]));
    out.labels = std::move(labels).build();
  }

  embedding::EmbeddingBuilder images(task.dim);

  // Web split.
  out.web.class_ids = out.class_ids;
  out.web_truth.split = "calibration";
  RandomStream web_rng(task.seed, kWeb);
  const auto replacement = [&](const std::vector<float>& x, std::size_t truth) {
    return task.label_noise_mode == LabelNoise::kNearestWrong ? gen.top_class(x, truth)
                                                              : gen.top_class(x);
  };
  const double log_keep = task.junk_rate < 1.0 ? std::log1p(-task.junk_rate) : kNegInf;
  const double log_junk = task.junk_rate > 0.0 ? std::log(task.junk_rate) : kNegInf;
  for (std::size_t i = 0; i < task.n_calib; ++i) {
    const std::string id = item_id("web", i);
    const bool junk = web_rng.uniform() < task.junk_rate;
    std::size_t truth = K;
    std::size_t query;
    std::vector<float> x;
    if (junk) {
      query = web_rng.below(K);
      x = gen.draw(web_rng, gen.centers[query], task.junk_center_scale, task.junk_noise_scale);
    } else {
      truth = web_rng.below(K);
      x = gen.draw(web_rng, gen.centers[truth], 1.0, task.class_noise(truth));
      query = web_rng.uniform() < task.label_noise ? replacement(x, truth) : truth;
    }

    // Posterior over (true class t, junk) given the image and its label.
    std::vector<double> logw(K + 1, kNegInf);
    for (std::size_t t = 0; t < K; ++t) {
      const double p_label = (1.0 - task.label_noise) * (query == t ? 1.0 : 0.0) +
                             task.label_noise * (query == replacement(x, t) ? 1.0 : 0.0);
      if (p_label <= 0.0 || log_keep == kNegInf) continue;
      logw[t] = log_keep + std::log(p_label) +
                gen.log_density(x, gen.centers[t], 1.0, task.class_noise(t));
    }
    if (log_junk != kNegInf) {
      logw[K] = log_junk + gen.log_density(x, gen.centers[query], task.junk_center_scale,
                                           task.junk_noise_scale);
    }
    double mx = kNegInf;
    for (double v : logw) mx = std::max(mx, v);
    std::vector<double> w(K + 1, 0.0);
    double total = 0.0;
    for (std::size_t t = 0; t <= K; ++t) {
      w[t] = logw[t] == kNegInf ? 0.0 : std::exp(logw[t] - mx);
      total += w[t];
    }

    plausibility::PlausibilityVector v;
    v.example_id = id;
    v.class_query = out.class_ids[query];
    v.lambda.resize(K);
    double mass = 0.0;
    for (std::size_t t = 0; t < K; ++t) {
      v.lambda[t] = w[t] / total;
      mass += v.lambda[t];
    }
    v.lambda_junk = std::clamp(1.0 - mass, 0.0, 1.0);
    out.web.entries.push_back(std::move(v));
    out.web_truth.items.push_back({id, junk ? std::string() : out.class_ids[truth]});
    images.add(id, std::span<const float>(x));
  }

  auto labelled_split = [&](const char* prefix, std::uint64_t stream, std::size_t n,
                            LabeledEvalSet& split) {
    RandomStream rng(task.seed, stream);
    for (std::size_t i = 0; i < n; ++i) {
      const std::string id = item_id(prefix, i);
      const std::size_t t = rng.below(K);
      const auto x = gen.draw(rng, gen.centers[t], 1.0, task.class_noise(t));
      split.items.push_back({id, out.class_ids[t]});
      images.add(id, std::span<const float>(x));
    }
  };
  out.test.split = "test";
  labelled_split("test", kTest, task.n_test, out.test);
  out.oracle_pool.split = "calibration";
  labelled_split("oracle", kOracle, task.n_oracle == 0 ? task.n_calib : task.n_oracle,
                 out.oracle_pool);

  out.images = std::move(images).build();
  out.web.validate();
  return out;
}

void write_synthetic_task(const SyntheticData& data, const SyntheticTask& task,
                          const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  embedding::store_embeddings(data.images, dir / "classifier_images.wcpe");
  embedding::store_embeddings(data.labels, dir / "classifier_labels.wcpe");
  plausibility::write_plausibilities(data.web, dir / "plausibilities.jsonl");
  write_labels(data.test, dir / "test_labels.jsonl");
  write_labels(data.oracle_pool, dir / "oracle_labels.jsonl");
  write_labels(data.web_truth, dir / "web_truth.jsonl");
  conformal::write_scores(conformal::nonconformity_scores(data.images, data.labels, data.class_ids,
                                                          task.classifier_temperature),
                          dir / "scores.jsonl");
  nlohmann::json meta = task;
  meta["class_ids"] = data.class_ids;
  io::write_json(dir / "task.json", meta);
}

}  // namespace webcp::evaluation

#include "webcp/plausibility/builder.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "webcp/common/error.hpp"
#include "webcp/common/log.hpp"

namespace webcp::plausibility {
namespace {

struct Outcome {
  std::optional<PlausibilityVector> vector;
  std::string drop_reason;
};

}  // namespace

void PlausibilityConfig::validate() const {
  for (double t : {t_ctx, t_filter, t_content}) {
    if (!(t > 0.0)) throw ConfigError("plausibility temperatures must be > 0");
  }
  prompts.validate();
}

BuildReport build_ambiguous_set(const miner::CorpusManifest& corpus,
                                const PlausibilityStores& stores, const PseudoLabelMap& pseudo,
                                const PlausibilityConfig& config) {
  config.validate();
  BuildReport report;
  for (const auto& c : corpus.classes) report.set.class_ids.push_back(c.id);
  const auto& class_ids = report.set.class_ids;

  // Class-level vectors are shared by every example; resolve them once.
  std::vector<Vec> queries, pseudo_vecs, prompt_vecs;
  for (const auto& id : class_ids) {
    queries.push_back(stores.queries.at(id));
    const auto it = pseudo.find(id);
    if (it == pseudo.end()) throw ConfigError("no pseudo label for class '" + id + "'");
    pseudo_vecs.push_back(stores.content_text.at(it->second));
  }
  for (const auto& p : config.prompts.invalid_form_prompts) {
    prompt_vecs.push_back(stores.content_text.at(p));
  }
  const Vec negative = stores.content_text.at(config.prompts.negative_label);

  const auto& examples = corpus.examples;
  std::vector<Outcome> outcomes(examples.size());
  auto work = [&](std::size_t i) {
    const auto& ex = examples[i];
    Outcome& out = outcomes[i];
    std::vector<Vec> sentences;
    for (const auto& [sid, text] : example_sentences(ex)) {
      if (auto row = stores.sentences.find(sid)) sentences.push_back(*row);
    }
    if (sentences.empty()) {
      out.drop_reason = "no embedded context sentences";
      return;
    }
    const auto image = stores.content_images.find(ex.example_id);
    if (!image) {
      out.drop_reason = "missing content image embedding";
      return;
    }
    try {
      const auto c = context_scores(sentences, queries, config.t_ctx, config.aggregation);
      const double s_neg = content_filter(*image, prompt_vecs, negative, config.t_filter);
      const auto h = content_scores(*image, pseudo_vecs, negative, config.t_content);
      PlausibilityVector v = combine(c, h, s_neg);
      v.example_id = ex.example_id;
      v.class_query = ex.class_query;
      out.vector = std::move(v);
    } catch (const DomainError& e) {
      out.drop_reason = e.what();
    }
  };

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(1, examples.size()));
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < examples.size(); i = next++) work(i);
      });
    }
  }

  for (std::size_t i = 0; i < examples.size(); ++i) {
    auto& out = outcomes[i];
    if (!out.vector) {
      report.dropped.emplace_back(examples[i].example_id, out.drop_reason);
      log::warn("plausibility", "example_dropped",
                {{"example_id", examples[i].example_id}, {"reason", out.drop_reason}});
      continue;
    }
    if (out.vector->junk_clamp > 1e-6) {
      ++report.clamp_warnings;
      log::warn("plausibility", "junk_clamped",
                {{"example_id", out.vector->example_id}, {"delta", out.vector->junk_clamp}});
    }
    report.set.entries.push_back(std::move(*out.vector));
  }
  std::sort(report.set.entries.begin(), report.set.entries.end(),
            [](const auto& a, const auto& b) { return a.example_id < b.example_id; });
  if (report.set.entries.empty()) {
    throw CalibrationError("plausibility: every example was dropped (" +
                           std::to_string(report.dropped.size()) + " examples)");
  }
  report.set.validate();
  log::info("plausibility", "built",
            {{"kept", report.set.entries.size()}, {"dropped", report.dropped.size()}});
  return report;
}

}  // namespace webcp::plausibility

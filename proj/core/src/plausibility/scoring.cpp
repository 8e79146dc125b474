#include "webcp/plausibility/scoring.hpp"

#include <algorithm>

#include "webcp/common/error.hpp"
#include "webcp/embedding/kernels.hpp"
#include "webcp/miner/context.hpp"

namespace webcp::plausibility {

using embedding::cosine;
using embedding::softmax;

std::vector<double> context_scores(std::span<const Vec> sentences, std::span<const Vec> queries,
                                   double temperature, Aggregation aggregation) {
  if (sentences.empty()) throw DomainError("context_scores: example has no embedded sentences");
  std::vector<double> raw(queries.size());
  for (std::size_t y = 0; y < queries.size(); ++y) {
    double agg = aggregation == Aggregation::kMax ? -1.0 : 0.0;
    for (const Vec& s : sentences) {
      const double sim = cosine(s, queries[y]);
      agg = aggregation == Aggregation::kMax ? std::max(agg, sim) : agg + sim;
    }
    raw[y] = aggregation == Aggregation::kMax ? agg : agg / static_cast<double>(sentences.size());
  }
  return softmax(raw, temperature);
}

double content_filter(Vec image, std::span<const Vec> invalid_prompts, Vec negative,
                      double temperature) {
  std::vector<double> logits;
  logits.reserve(invalid_prompts.size() + 1);
  for (const Vec& p : invalid_prompts) logits.push_back(cosine(image, p));
  logits.push_back(cosine(image, negative));
  return softmax(logits, temperature).back();
}

std::vector<double> content_scores(Vec image, std::span<const Vec> pseudo_labels, Vec negative,
                                   double temperature) {
  const double neg = cosine(image, negative);
  std::vector<double> h;
  h.reserve(pseudo_labels.size());
  for (const Vec& p : pseudo_labels) {
    const double pair[2] = {cosine(image, p), neg};
    h.push_back(softmax(pair, temperature)[0]);
  }
  return h;
}

PlausibilityVector combine(std::span<const double> context, std::span<const double> content,
                           double s_neg) {
  if (context.size() != content.size()) {
    throw DomainError("combine: context and content cover different class sets");
  }
  PlausibilityVector v;
  v.context.assign(context.begin(), context.end());
  v.content.assign(content.begin(), content.end());
  v.s_neg = s_neg;
  v.lambda.resize(context.size());
  double total = 0.0;
  for (std::size_t y = 0; y < context.size(); ++y) {
    v.lambda[y] = content[y] * context[y] * s_neg;
    total += v.lambda[y];
  }
  const double junk = 1.0 - total;
  v.lambda_junk = std::clamp(junk, 0.0, 1.0);
  v.junk_clamp = std::abs(junk - v.lambda_junk);
  return v;
}

std::vector<std::pair<std::string, std::string>> example_sentences(const miner::MinedExample& ex) {
  std::vector<std::pair<std::string, std::string>> out;
  if (!ex.alt_text.empty()) out.emplace_back(ex.example_id + "/alt", ex.alt_text);
  const auto pre = miner::stored_sentences(ex.pre_text);
  for (std::size_t k = 0; k < pre.size(); ++k) {
    out.emplace_back(ex.example_id + "/pre/" + std::to_string(k), pre[k]);
  }
  const auto post = miner::stored_sentences(ex.post_text);
  for (std::size_t k = 0; k < post.size(); ++k) {
    out.emplace_back(ex.example_id + "/post/" + std::to_string(k), post[k]);
  }
  return out;
}

}  // namespace webcp::plausibility

#include "webcp/conformal/calibration.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "webcp/common/error.hpp"
#include "webcp/common/log.hpp"
#include "webcp/common/philox.hpp"

namespace webcp::conformal {
namespace {

const char* rule_name(ThresholdRule rule) {
  return rule == ThresholdRule::kAsWritten ? "as_written" : "conservative";
}

// Average coverage term across iterations for threshold `gamma`.
bool satisfies(std::span<const std::vector<double>> iterations, double gamma, double alpha,
               ThresholdRule rule) {
  double total = 0.0;
  for (const auto& scores : iterations) {
    const auto covered = static_cast<double>(
        std::upper_bound(scores.begin(), scores.end(), gamma) - scores.begin());
    const auto denom = static_cast<double>(scores.size()) + 1.0;
    total += rule == ThresholdRule::kAsWritten ? (covered + 1.0) / denom : covered / denom;
  }
  const double mean = total / static_cast<double>(iterations.size());
  return rule == ThresholdRule::kAsWritten ? mean > 1.0 - alpha : mean >= 1.0 - alpha;
}

}  // namespace

std::vector<SampledLabel> sample_calibration_iteration(
    const plausibility::AmbiguousCalibrationSet& set, const ScoreTable& aligned_scores,
    std::uint64_t seed, std::uint64_t iteration) {
  RandomStream rng(seed, iteration);
  std::vector<SampledLabel> out;
  const std::size_t k = set.class_ids.size();
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& e = set.entries[i];
    // Two draws per entry regardless of outcome keep stream positions stable.
    const double u_keep = rng.uniform();
    const double u_label = rng.uniform();
    if (u_keep < e.lambda_junk) continue;
    double mass = 0.0;
    for (double l : e.lambda) mass += l;
    if (!(mass > 0.0)) continue;
    const double target = u_label * mass;
    std::size_t label = k;
    double cumulative = 0.0;
    for (std::size_t y = 0; y < k; ++y) {
      if (e.lambda[y] <= 0.0) continue;
      cumulative += e.lambda[y];
      label = y;
      if (target < cumulative) break;
    }
    out.push_back({i, label, aligned_scores.row(i)[label]});
  }
  return out;
}

double mc_threshold_from_samples(std::span<const std::vector<double>> sorted_iterations,
                                 double alpha, ThresholdRule rule) {
  std::vector<double> candidates;
  for (const auto& it : sorted_iterations) candidates.insert(candidates.end(), it.begin(), it.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  // The averaged term is non-decreasing in gamma, so bisect for the first hit.
  std::size_t lo = 0, hi = candidates.size();
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (satisfies(sorted_iterations, candidates[mid], alpha, rule)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return lo < candidates.size() ? candidates[lo] : kAllLabels;
}

ConformalThreshold mc_threshold(const plausibility::AmbiguousCalibrationSet& set,
                                const ScoreTable& aligned_scores, const MonteCarloConfig& config) {
  config.validate();
  if (aligned_scores.size() != set.entries.size() ||
      aligned_scores.num_classes() != set.class_ids.size()) {
    throw DomainError("mc_threshold: score table is not aligned with the calibration set");
  }
  const std::size_t m_total = config.mc_samples;
  std::vector<std::vector<double>> iterations(m_total);

  std::size_t threads = config.threads ? config.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, m_total);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t m = next++; m < m_total; m = next++) {
          auto sample = sample_calibration_iteration(set, aligned_scores, config.seed, m);
          auto& scores = iterations[m];
          scores.reserve(sample.size());
          for (const auto& s : sample) scores.push_back(s.score);
          std::sort(scores.begin(), scores.end());
        }
      });
    }
  }

  ConformalThreshold t;
  t.method = "webcp";
  t.alpha = config.alpha;
  t.mc_samples = m_total;
  t.seed = config.seed;
  t.rule = rule_name(config.rule);
  t.n_calibration = set.entries.size();
  bool any = false;
  for (const auto& it : iterations) {
    t.iteration_sizes.push_back(it.size());
    any = any || !it.empty();
  }
  if (!any) {
    throw CalibrationError(
        "every Monte Carlo iteration rejected all examples; mine a larger corpus or review the "
        "junk probabilities");
  }
  t.gamma = mc_threshold_from_samples(iterations, config.alpha, config.rule);
  log::info("calibrate", "mc_threshold",
            {{"gamma", t.all_labels() ? nlohmann::json("all") : nlohmann::json(t.gamma)},
             {"alpha", config.alpha},
             {"M", m_total}});
  return t;
}

double standard_threshold(std::span<const double> scores, double alpha) {
  if (scores.empty()) throw CalibrationError("standard_threshold: no calibration scores");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  const std::size_t n = scores.size();
  // The 1e-9 guard keeps exact integer products from rounding up a rank.
  const double rank = std::ceil(static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9);
  if (rank > static_cast<double>(n)) return kAllLabels;
  const auto k = static_cast<std::size_t>(std::max(rank, 1.0));
  std::vector<double> sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  return sorted[k - 1];
}

ScoreTable align_scores(const plausibility::AmbiguousCalibrationSet& set, const ScoreTable& table) {
  std::vector<std::string> ids;
  ids.reserve(set.entries.size());
  for (const auto& e : set.entries) ids.push_back(e.example_id);
  return table.select(ids, set.class_ids);
}

std::vector<double> query_label_scores(const plausibility::AmbiguousCalibrationSet& set,
                                       const ScoreTable& aligned_scores) {
  std::vector<double> out;
  out.reserve(set.entries.size());
  for (std::size_t i = 0; i < set.entries.size(); ++i) {
    const auto& cls = set.entries[i].class_query;
    const auto it = std::find(set.class_ids.begin(), set.class_ids.end(), cls);
    if (it == set.class_ids.end()) {
      throw ConfigError(set.entries[i].example_id + ": queried class '" + cls + "' not in task");
    }
    out.push_back(aligned_scores.row(i)[static_cast<std::size_t>(it - set.class_ids.begin())]);
  }
  return out;
}

PredictionSet predict_set(const std::string& example_id, std::span<const double> scores,
                          const std::vector<std::string>& class_ids, double gamma) {
  PredictionSet s;
  s.example_id = example_id;
  s.gamma = gamma;
  for (std::size_t y = 0; y < class_ids.size(); ++y) {
    if (scores[y] <= gamma) s.members.push_back(class_ids[y]);
  }
  return s;
}

std::vector<PredictionSet> predict_sets(const ScoreTable& table, double gamma) {
  std::vector<PredictionSet> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    out.push_back(predict_set(table.example_ids()[i], table.row(i), table.class_ids(), gamma));
  }
  return out;
}

}  // namespace webcp::conformal

#include <benchmark/benchmark.h>

#include <string>
#include <vector>

#include "webcp/common/philox.hpp"
#include "webcp/conformal/calibration.hpp"
#include "webcp/conformal/scores.hpp"
#include "webcp/embedding/wcpe.hpp"
#include "webcp/evaluation/synthetic.hpp"
#include "webcp/miner/context.hpp"
#include "webcp/miner/fuzzy.hpp"

namespace {

using namespace webcp;

void BM_FuzzyRatio(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RandomStream rng(1, 0);
  std::string a, b;
  for (std::size_t i = 0; i < n; ++i) {
    a += static_cast<char>('a' + rng.below(6));
    b += static_cast<char>('a' + rng.below(6));
  }
  for (auto _ : state) benchmark::DoNotOptimize(miner::fuzzy_ratio(a, b));
}
BENCHMARK(BM_FuzzyRatio)->Arg(16)->Arg(64)->Arg(256);

void BM_McThreshold(benchmark::State& state) {
  evaluation::SyntheticTask task;
  task.label_noise = 0.2;
  task.junk_rate = 0.1;
  task.n_calib = static_cast<std::size_t>(state.range(0));
  task.n_test = 1;
  const auto d = evaluation::generate_synthetic_task(task);
  const auto scores = conformal::align_scores(
      d.web, conformal::nonconformity_scores(d.images, d.labels, d.class_ids, 0.1));
  conformal::MonteCarloConfig cfg;
  cfg.mc_samples = 100;
  cfg.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(conformal::mc_threshold(d.web, scores, cfg).gamma);
}
BENCHMARK(BM_McThreshold)->Arg(500)->Arg(5000)->Unit(benchmark::kMillisecond);

embedding::EmbeddingMatrix bench_matrix(std::size_t rows, std::size_t dim) {
  RandomStream rng(2, 0);
  std::vector<std::string> ids;
  std::vector<float> data(rows * dim);
  for (std::size_t i = 0; i < rows; ++i) ids.push_back("example-" + std::to_string(i));
  for (auto& x : data) x = static_cast<float>(rng.normal());
  return {dim, std::move(ids), std::move(data)};
}

void BM_WcpeEncode(benchmark::State& state) {
  const auto m = bench_matrix(static_cast<std::size_t>(state.range(0)), 512);
  for (auto _ : state) benchmark::DoNotOptimize(embedding::encode_wcpe(m));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(m.data().size() * 4));
}
BENCHMARK(BM_WcpeEncode)->Arg(1000)->Arg(10000);

void BM_WcpeDecode(benchmark::State& state) {
  const auto bytes = embedding::encode_wcpe(bench_matrix(static_cast<std::size_t>(state.range(0)), 512));
  for (auto _ : state) benchmark::DoNotOptimize(embedding::decode_wcpe(bytes));
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(bytes.size()));
}
BENCHMARK(BM_WcpeDecode)->Arg(1000)->Arg(10000);

void BM_ExtractContext(benchmark::State& state) {
  std::string html = "<html><head><script>var x = 1;</script></head><body>";
  for (int i = 0; i < state.range(0); ++i) {
    html += "<p>Paragraph " + std::to_string(i) + " about a skin lesion. It has two sentences.</p>";
    if (i == state.range(0) / 2) html += "<img src=\"photo_01.jpg?w=200\" alt=\"lesion\">";
  }
  html += "</body></html>";
  for (auto _ : state) {
    const miner::HtmlDocument doc(html);
    const auto m = miner::match_image_in_page(doc, "https://cdn.example.org/photo_01.jpg");
    benchmark::DoNotOptimize(miner::extract_context(doc, *m));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<std::int64_t>(html.size()));
}
BENCHMARK(BM_ExtractContext)->Arg(20)->Arg(500);

}  // namespace

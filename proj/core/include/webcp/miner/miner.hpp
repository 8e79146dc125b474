#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "webcp/miner/context.hpp"
#include "webcp/miner/fetch.hpp"
#include "webcp/miner/search.hpp"
#include "webcp/miner/types.hpp"

namespace webcp::miner {

struct MineOptions {
  std::string task_name = "task";
  std::vector<ClassLabel> classes;
  std::string query_template = "An image of <category>";
  std::size_t per_class = 50;  // K
  /// Search results requested per class; 0 means 2 * per_class.
  std::size_t search_depth = 0;
  /// Entries fetched concurrently ahead of the acceptance cursor.
  std::size_t max_in_flight = 8;
  ContextLimits limits;
};

/// Mines the calibration corpus into `out_dir` (images/ written as accepted)
/// and returns the manifest. Call write_corpus to persist it.
CorpusManifest mine_corpus(const MineOptions& options, SearchProvider& provider,
                           PageFetcher& fetcher, const std::filesystem::path& out_dir);

/// Writes manifest.json and metadata.jsonl under `dir`.
void write_corpus(const CorpusManifest& manifest, const std::filesystem::path& dir);

CorpusManifest load_corpus(const std::filesystem::path& dir);

std::vector<ClassLabel> load_classes(const std::filesystem::path& path);

/// Checks the manifest invariants; returns one message per violation.
std::vector<std::string> check_corpus(const CorpusManifest& manifest,
                                      const std::filesystem::path& dir);

}  // namespace webcp::miner

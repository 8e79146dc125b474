#include "webcp/miner/miner.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <deque>
#include <future>
#include <set>

#include "webcp/common/error.hpp"
#include "webcp/common/json_io.hpp"
#include "webcp/common/log.hpp"
#include "webcp/common/sha256.hpp"
#include "webcp/miner/url.hpp"

namespace webcp::miner {
namespace {

struct EntryOutcome {
  std::string skip_reason;  // empty when accepted
  MinedExample example;
  std::string image_bytes;
  std::string detail;
};

std::string image_extension(const std::string& image_url) {
  const std::string ext = url_extension(image_url);
  if (ext.empty() || ext.size() > 5) return "bin";
  for (unsigned char c : ext) {
    if (!std::isalnum(c)) return "bin";
  }
  return ext;
}

// Pure function of the fetched bytes; safe to run on worker threads.
EntryOutcome process_entry(const SearchEntry& entry, const ClassLabel& label,
                           const ContextLimits& limits, PageFetcher& fetcher) {
  EntryOutcome out;
  const FetchResult page = fetcher.fetch(entry.context_url);
  if (!page.ok()) {
    out.skip_reason = std::string(status_name(page.status));
    out.detail = page.detail;
    return out;
  }
  const HtmlDocument doc(page.body);
  const auto match = match_image_in_page(doc, entry.image_url);
  if (!match) {
    out.skip_reason = "no_match";
    return out;
  }
  if (!match->has_resolvable_src) {
    out.skip_reason = "lazy_load";
    return out;
  }
  const ExtractedContext ctx = extract_context(doc, *match, limits);
  MinedExample& ex = out.example;
  ex.alt_text = ctx.alt_text;
  ex.pre_text = ctx.pre_text();
  ex.post_text = ctx.post_text();
  if (ex.alt_text.empty() && ex.pre_text.empty() && ex.post_text.empty()) {
    out.skip_reason = "no_context";
    return out;
  }
  const FetchResult image = fetcher.fetch(entry.image_url);
  if (!image.ok() || image.body.empty()) {
    out.skip_reason = "image_unavailable";
    out.detail = image.ok() ? "empty body" : image.detail;
    return out;
  }
  char rank[24];
  std::snprintf(rank, sizeof rank, "-%04zu", static_cast<std::size_t>(entry.rank));
  ex.example_id = label.id + rank;
  ex.class_query = label.id;
  ex.image_bytes_path =
      "images/" + sha256_hex(image.body) + "." + image_extension(entry.image_url);
  ex.source_url = entry.context_url;
  ex.image_url = entry.image_url;
  ex.fetched_at = page.fetched_at;
  out.image_bytes = image.body;
  return out;
}

}  // namespace

CorpusManifest mine_corpus(const MineOptions& options, SearchProvider& provider,
                           PageFetcher& fetcher, const std::filesystem::path& out_dir) {
  if (options.per_class < 1) throw DomainError("mine_corpus: per-class target K must be >= 1");
  validate_classes(options.classes);
  CorpusManifest manifest;
  manifest.task_name = options.task_name;
  manifest.classes = options.classes;
  manifest.per_class_target = options.per_class;
  manifest.query_template = options.query_template;

  const std::size_t depth = options.search_depth ? options.search_depth : 2 * options.per_class;
  const std::size_t window = std::max<std::size_t>(1, options.max_in_flight);
  std::filesystem::create_directories(out_dir / "images");

  for (const auto& label : options.classes) {
    ClassStats& stats = manifest.stats[label.id];
    const auto entries = search_images(provider, label, options.query_template, depth);
    stats.entries = entries.size();

    // Fetch ahead in a bounded window, accept strictly in rank order.
    std::deque<std::future<EntryOutcome>> pending;
    std::size_t next = 0;
    auto refill = [&] {
      while (next < entries.size() && pending.size() < window) {
        const SearchEntry& e = entries[next++];
        pending.push_back(std::async(std::launch::async, [&, e] {
          return process_entry(e, label, options.limits, fetcher);
        }));
      }
    };
    refill();
    std::size_t consumed = 0;
    while (!pending.empty() && stats.accepted < options.per_class) {
      EntryOutcome outcome = pending.front().get();
      pending.pop_front();
      const SearchEntry& entry = entries[consumed++];
      if (!outcome.skip_reason.empty()) {
        ++stats.skipped[outcome.skip_reason];
        log::info("mine", "entry_skipped",
                  {{"class", label.id}, {"rank", entry.rank}, {"reason", outcome.skip_reason},
                   {"detail", outcome.detail}});
      } else {
        const auto image_path = out_dir / outcome.example.image_bytes_path;
        if (!std::filesystem::exists(image_path)) io::write_file(image_path, outcome.image_bytes);
        manifest.examples.push_back(std::move(outcome.example));
        ++stats.accepted;
      }
      refill();
    }
    for (auto& f : pending) f.wait();

    if (stats.accepted == 0) {
      manifest.warnings.push_back("class '" + label.id + "' yielded no examples");
      log::warn("mine", "class_empty", {{"class", label.id}});
    }
    log::info("mine", "class_done",
              {{"class", label.id}, {"entries", stats.entries}, {"accepted", stats.accepted}});
  }
  return manifest;
}

void write_corpus(const CorpusManifest& manifest, const std::filesystem::path& dir) {
  io::write_json(dir / "manifest.json", manifest);
  std::vector<nlohmann::json> rows;
  rows.reserve(manifest.examples.size());
  for (const auto& e : manifest.examples) rows.emplace_back(e);
  io::write_jsonl(dir / "metadata.jsonl", rows);
}

CorpusManifest load_corpus(const std::filesystem::path& dir) {
  return io::read_json(dir / "manifest.json").get<CorpusManifest>();
}

std::vector<ClassLabel> load_classes(const std::filesystem::path& path) {
  const auto doc = io::read_json(path);
  std::vector<ClassLabel> classes;
  if (doc.is_array()) {
    for (const auto& item : doc) {
      if (item.is_string()) {
        classes.push_back({item.get<std::string>(), item.get<std::string>()});
      } else {
        classes.push_back(item.get<ClassLabel>());
      }
    }
  } else if (doc.is_object() && doc.contains("classes")) {
    classes = doc["classes"].get<std::vector<ClassLabel>>();
  } else {
    throw ConfigError(path.string() + ": expected an array of {id, display_name}");
  }
  validate_classes(classes);
  return classes;
}

std::vector<std::string> check_corpus(const CorpusManifest& manifest,
                                      const std::filesystem::path& dir) {
  std::vector<std::string> problems;
  std::set<std::string> class_ids, example_ids;
  std::map<std::string, std::size_t> per_class;
  for (const auto& c : manifest.classes) class_ids.insert(c.id);
  for (const auto& e : manifest.examples) {
    if (!example_ids.insert(e.example_id).second) {
      problems.push_back("duplicate example_id " + e.example_id);
    }
    if (!class_ids.contains(e.class_query)) {
      problems.push_back(e.example_id + ": unknown class " + e.class_query);
    }
    ++per_class[e.class_query];
    if (e.alt_text.empty() && e.pre_text.empty() && e.post_text.empty()) {
      problems.push_back(e.example_id + ": no textual context");
    }
    for (const auto* text : {&e.pre_text, &e.post_text}) {
      const auto sentences = stored_sentences(*text);
      if (sentences.size() > kMaxContextSentences || count_tokens(*text) > kMaxContextTokens) {
        problems.push_back(e.example_id + ": context exceeds bounds");
      }
    }
    const auto image = dir / e.image_bytes_path;
    std::error_code ec;
    if (!std::filesystem::exists(image, ec) || std::filesystem::file_size(image, ec) == 0) {
      problems.push_back(e.example_id + ": image missing or empty");
    }
  }
  for (const auto& [cls, n] : per_class) {
    if (n > manifest.per_class_target) problems.push_back("class " + cls + " exceeds K");
  }
  return problems;
}

}  // namespace webcp::miner
